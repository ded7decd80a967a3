#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
시나리오 실행 모듈

설정으로부터 모델, 구속 빌더, 제어기, 시뮬레이터를 조립하고, 주기별 trace 를
pandas DataFrame 으로 모아 trace.csv, summary.json, metrics.json 을 씁니다.

trace.csv 컬럼 정의는 docs/trace_schema.md 를 참고하세요.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.spatial.transform import Rotation

from fsfpid.config_api import ScenarioConfig, load_scenario
from fsfpid.control_api import (
    SURFACE_TASK_ROWS,
    ControlOutput,
    GraspContact,
    ProjectedImpedanceController,
    SurfaceContact,
    evaluate_terms,
    split_joints,
)
from fsfpid.dynamics_api import (
    JointState,
    ManipulatorModel,
    forward_kinematics,
    inverse_kinematics,
    load_model,
    model_from_dict,
)
from fsfpid.errors import ConfigValidationError, SimulationError
from fsfpid.impedance_api import FULL_ROWS, ImpedanceGains, TrajectorySample, pose_error
from fsfpid.projection_api import projector
from fsfpid.simulation_api import DisturbanceProfile, Payload, PhysicsRecord, SimState, Simulator
from fsfpid.wrench_api import cone_margin

logger = logging.getLogger(__name__)

AXES = ("rx", "ry", "rz", "x", "y", "z")
WRENCH_LABELS = ("fx", "fy", "fz", "mx", "my", "mz")
FLOAT_FORMAT = "%.10g"


# =============================================================================
# 목표 궤적
# =============================================================================

def trajectory_single_arm_wipe(r: float, s: float, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    테이블 닦기 원 궤적

    Args:
        r (float): 반지름 [m]
        s (float): 각속도 [rad/s]
        t (float): 시각 [s]

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: [x, y, yaw] 와 그 1, 2차 미분
    """
    c, sn = math.cos(s * t), math.sin(s * t)
    x_d = np.array([r * c, r * sn, 0.0])
    xdot_d = np.array([-r * s * sn, r * s * c, 0.0])
    xddot_d = np.array([-r * s * s * c, -r * s * s * sn, 0.0])
    return x_d, xdot_d, xddot_d


def trajectory_dual_arm_circle(r: float, s: float, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    물체 원 궤적 (y-z 평면, 원 중심 기준)

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: [x, y, z] 와 그 1, 2차 미분
    """
    c, sn = math.cos(s * t), math.sin(s * t)
    x_d = np.array([0.0, r * c, r * sn])
    xdot_d = np.array([0.0, -r * s * sn, r * s * c])
    xddot_d = np.array([0.0, -r * s * s * c, -r * s * s * sn])
    return x_d, xdot_d, xddot_d


def wipe_trajectory(start_position: np.ndarray, rotation: np.ndarray,
                    r: float, s: float) -> Callable[[float], TrajectorySample]:
    """시작점에서 출발하는 테이블 평면 원 궤적 (yaw 는 시작 자세 유지)"""
    center = np.asarray(start_position, dtype=float) - np.array([r, 0.0, 0.0])
    R0 = np.asarray(rotation, dtype=float)

    def sample(t: float) -> TrajectorySample:
        x_d, xdot_d, xddot_d = trajectory_single_arm_wipe(r, s, t)
        yaw = Rotation.from_rotvec([0.0, 0.0, x_d[2]]).as_matrix()
        return TrajectorySample(
            position=center + np.array([x_d[0], x_d[1], 0.0]),
            rotation=yaw @ R0,
            twist=np.array([0.0, 0.0, xdot_d[2], xdot_d[0], xdot_d[1], 0.0]),
            acceleration=np.array([0.0, 0.0, xddot_d[2], xddot_d[0], xddot_d[1], 0.0]),
        )

    return sample


def circle_trajectory(start_position: np.ndarray, rotation: np.ndarray,
                      r: float, s: float) -> Callable[[float], TrajectorySample]:
    """시작점에서 출발하는 y-z 평면 물체 원 궤적 (자세 고정)"""
    center = np.asarray(start_position, dtype=float) - np.array([0.0, r, 0.0])
    R0 = np.asarray(rotation, dtype=float)

    def sample(t: float) -> TrajectorySample:
        x_d, xdot_d, xddot_d = trajectory_dual_arm_circle(r, s, t)
        return TrajectorySample(
            position=center + x_d,
            rotation=R0,
            twist=np.concatenate([np.zeros(3), xdot_d]),
            acceleration=np.concatenate([np.zeros(3), xddot_d]),
        )

    return sample


def hold_trajectory(position: np.ndarray, rotation: np.ndarray) -> Callable[[float], TrajectorySample]:
    sample = TrajectorySample(
        position=np.asarray(position, dtype=float),
        rotation=np.asarray(rotation, dtype=float),
        twist=np.zeros(6),
        acceleration=np.zeros(6),
    )
    return lambda t: sample


# =============================================================================
# 시나리오 조립
# =============================================================================

@dataclass(eq=False)
class ScenarioRun:
    """
    조립이 끝난 실행 단위

    Attributes:
        config (ScenarioConfig): 시나리오 설정
        models (Tuple[ManipulatorModel, ...]): 배치가 끝난 팔 모델 (물체 질량 제외)
        controller (ProjectedImpedanceController): 제어기
        simulator (Simulator): 시뮬레이터
        initial_state (SimState): 초기 상태
        trajectory (Callable[[float], TrajectorySample]): 목표 궤적
        task_rows (Tuple[int, ...]): 제어하는 작업 행
    """
    config: ScenarioConfig
    models: Tuple[ManipulatorModel, ...]
    controller: ProjectedImpedanceController
    simulator: Simulator
    initial_state: SimState
    trajectory: Callable[[float], TrajectorySample]
    task_rows: Tuple[int, ...]

    @property
    def ticks(self) -> int:
        return int(round(self.config.duration / self.config.integrator.dt))


def _load_robot(config: ScenarioConfig, index: int) -> ManipulatorModel:
    robot = config.robots[index]
    where = f"robots[{index}].model"
    if isinstance(robot.model, dict):
        model = model_from_dict(robot.model, path=where)
    else:
        path = config.resolve(robot.model)
        if not path.exists():
            raise ConfigValidationError(f"모델 파일이 없습니다: {path}", field=where)
        model = load_model(path)
    if len(robot.q_seed) != model.dof:
        raise ConfigValidationError(f"관절 수 {model.dof} 와 길이가 다릅니다", field=f"robots[{index}].q_seed")
    return model.placed(robot.base_xyz, robot.base_rpy)


def _place(model: ManipulatorModel, position: np.ndarray, rotation: np.ndarray,
           q_seed: Sequence[float], index: int) -> np.ndarray:
    try:
        return inverse_kinematics(model, position, rotation, np.asarray(q_seed, dtype=float))
    except ConfigValidationError as e:
        raise ConfigValidationError(e.message, field=f"robots[{index}].q_seed")


def _contact_rotation(normal: np.ndarray, hand_x: np.ndarray) -> np.ndarray:
    """z 가 normal, x 가 hand_x 를 normal 에 수직으로 투영한 방향인 회전"""
    z = normal / np.linalg.norm(normal)
    x = hand_x - np.dot(hand_x, z) * z
    x = x / np.linalg.norm(x)
    return np.column_stack([x, np.cross(z, x), z])


def _initial_velocity(controller: ProjectedImpedanceController, q: np.ndarray,
                      trajectory: Callable[[float], TrajectorySample],
                      task_rows: Sequence[int]) -> np.ndarray:
    """[Jx; Jc] qdot = [목표 트위스트; 0] 의 최소 노름 해를 P 로 투영합니다."""
    models = controller.models
    terms = evaluate_terms(models, q, np.zeros_like(q), with_inertia=False)
    kin = controller.builder.evaluate(terms, split_joints(models, np.zeros_like(q)))
    rows = list(task_rows)
    Jc = kin.constraint.Jc
    A = np.vstack([kin.Jx[rows], Jc])
    b = np.concatenate([trajectory(0.0).twist[rows], np.zeros(Jc.shape[0])])
    qdot, *_ = np.linalg.lstsq(A, b, rcond=None)
    return projector(Jc) @ qdot


def _build_surface(config: ScenarioConfig, models: Tuple[ManipulatorModel, ...]):
    model = models[0]
    robot = config.robots[0]
    seed_frames = forward_kinematics(model, np.asarray(robot.q_seed, dtype=float))
    rotation = seed_frames.ee_rotation if config.task.start_rpy is None else \
        Rotation.from_euler("xyz", config.task.start_rpy).as_matrix()
    q0 = _place(model, np.asarray(config.task.start_position), rotation, robot.q_seed, 0)
    frames = forward_kinematics(model, q0)

    builder = SurfaceContact(frames.ee_position, frames.ee_rotation)
    traj = config.trajectory
    if traj.kind == "wipe":
        trajectory = wipe_trajectory(frames.ee_position, frames.ee_rotation, traj.radius, traj.speed)
    else:
        trajectory = hold_trajectory(frames.ee_position, frames.ee_rotation)
    return builder, trajectory, tuple(SURFACE_TASK_ROWS), (q0,), None


def _build_grasp(config: ScenarioConfig, models: Tuple[ManipulatorModel, ...]):
    obj = config.object
    center = np.asarray(config.task.start_position, dtype=float)
    R_obj = np.eye(3) if config.task.start_rpy is None else \
        Rotation.from_euler("xyz", config.task.start_rpy).as_matrix()

    qs, hand_rotations, contact_rotations = [], [], []
    for i, (model, robot, offset) in enumerate(zip(models, config.robots, obj.grasp_offsets)):
        point = center + R_obj @ np.asarray(offset, dtype=float)
        seed_rotation = forward_kinematics(model, np.asarray(robot.q_seed, dtype=float)).ee_rotation
        q = _place(model, point, seed_rotation, robot.q_seed, i)
        R_hand = forward_kinematics(model, q).ee_rotation
        normal = point - center
        if np.linalg.norm(normal) < 1e-9:
            raise ConfigValidationError("접촉점이 물체 중심과 겹칩니다", field=f"object.grasp_offsets[{i}]")
        Rc = _contact_rotation(normal, R_hand[:, 0])
        qs.append(q)
        hand_rotations.append(R_hand)
        contact_rotations.append(R_hand.T @ Rc)

    builder = GraspContact(contact_rotations, hand_rotations[0].T @ R_obj)
    inertia = Payload.box_inertia(obj.mass, obj.dims)
    com_in_ee, rotation_in_ee = [], []
    for model, q, R_hand in zip(models, qs, hand_rotations):
        p_hand = forward_kinematics(model, q).ee_position
        com_in_ee.append(R_hand.T @ (center - p_hand))
        rotation_in_ee.append(R_hand.T @ R_obj)
    payload = Payload(obj.mass, inertia, tuple(com_in_ee), tuple(rotation_in_ee))

    traj = config.trajectory
    if traj.kind == "circle":
        trajectory = circle_trajectory(center, R_obj, traj.radius, traj.speed)
    else:
        trajectory = hold_trajectory(center, R_obj)
    return builder, trajectory, FULL_ROWS, tuple(qs), payload


def build_scenario(config: ScenarioConfig) -> ScenarioRun:
    """
    설정으로 실행 단위를 조립합니다.

    초기 자세는 q_seed 에서 시작한 역기구학으로 목표 말단 자세(평면 접촉은 시작점,
    파지는 물체 중심 + 접촉 오프셋)에 맞춥니다. 제어기 모델은 물체 질량을 모르고,
    시뮬레이터 모델에만 물체가 팔마다 균등하게 붙습니다.

    Raises:
        ConfigValidationError: 모델 파일, 관절 수, 초기 자세가 잘못되었을 때
    """
    models = tuple(_load_robot(config, i) for i in range(len(config.robots)))
    if config.constraint == "surface":
        builder, trajectory, task_rows, qs, payload = _build_surface(config, models)
    else:
        builder, trajectory, task_rows, qs, payload = _build_grasp(config, models)

    q0 = np.concatenate(qs)
    gains = config.gains
    friction = config.friction
    controller = ProjectedImpedanceController(
        models=models,
        builder=builder,
        trajectory=trajectory,
        gains=ImpedanceGains.from_diagonal(gains.stiffness, gains.damping),
        friction=friction.params,
        task_rows=task_rows,
        q_rest=q0,
        posture_stiffness=gains.posture_stiffness,
        posture_damping=gains.posture_damping,
        edges=friction.edges,
        epsilon=friction.epsilon,
        estimator_mode=config.estimator_mode,
        dt=config.integrator.dt,
    )
    simulator = Simulator(
        models=models,
        builder=builder,
        config=config.integrator,
        disturbances=DisturbanceProfile(config.disturbances),
        payload=payload,
        seed=config.seed,
    )

    if config.initial_velocity == "matched":
        qdot0 = _initial_velocity(controller, q0, trajectory, task_rows)
    else:
        qdot0 = np.zeros_like(q0)
    kin = simulator.evaluate(q0, qdot0, with_inertia=False)
    Jc = kin.constraint.Jc
    state = SimState(
        arms=tuple(JointState(qi, qdi, 0.0) for qi, qdi in
                   zip(split_joints(models, q0), split_joints(models, qdot0))),
        time=0.0,
        drift=float(np.linalg.norm(Jc @ qdot0)) if Jc.shape[0] else 0.0,
        object_position=kin.position,
        object_rotation=kin.rotation,
    )
    logger.info("시나리오 조립: %s (%s, 팔 %d, Jc %s)", config.name, config.constraint,
                len(models), Jc.shape)
    return ScenarioRun(
        config=config,
        models=models,
        controller=controller,
        simulator=simulator,
        initial_state=state,
        trajectory=trajectory,
        task_rows=tuple(task_rows),
    )


# =============================================================================
# 실행 루프와 trace
# =============================================================================

def _labels(prefix: str, n: int) -> List[str]:
    return [f"{prefix}_{i}" for i in range(n)]


def _contact_labels(prefix: str, K: int) -> List[str]:
    return [f"{prefix}_c{i}_{w}" for i in range(K) for w in WRENCH_LABELS]


def _projection_error(out: ControlOutput) -> float:
    P = out.proj.P
    Jc = out.proj.Jc
    errs = [np.abs(P @ P - P).max(), np.abs(P - P.T).max()]
    if Jc.shape[0]:
        errs.append(np.abs(Jc @ P).max())
    return float(max(errs))


def _acceleration_residual(rec: PhysicsRecord, qdot: np.ndarray) -> float:
    Jc = rec.proj.Jc
    if Jc.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(Jc @ rec.qddot + rec.proj.Jc_dot @ qdot))


def _trace_row(t: float, state: SimState, out: ControlOutput, rec: PhysicsRecord,
               config: ScenarioConfig) -> Dict[str, float]:
    row: Dict[str, float] = {"t": t}
    q, qdot = state.q, state.qdot
    N = q.size
    row.update(zip(_labels("q", N), q))
    row.update(zip(_labels("qdot", N), qdot))
    row.update(zip(_labels("tau_motion", N), out.tau_motion))
    row.update(zip(_labels("tau_constraint", N), out.tau_constraint))
    row.update(zip(_labels("F", out.F.size), out.F))
    row.update(zip(_labels("Fx_hat", out.Fx_hat.size), out.Fx_hat))
    row.update(zip(_labels("Fx", 6), rec.Fx))
    row.update(zip(_labels("F_e", out.F_e.size), out.F_e))
    row.update(zip(_labels("F_c", out.F_c.size), out.F_c))
    row.update(zip(_labels("lambda_true", rec.lambda_true.size), rec.lambda_true))

    task = out.task
    row.update(zip((f"x_{a}" for a in "xyz"), task.position))
    row.update(zip((f"x_d_{a}" for a in "xyz"), task.position_d))
    err = pose_error(task.position, task.rotation, task.position_d, task.rotation_d)
    row.update(zip((f"err_{a}" for a in AXES), err))

    K = len(rec.kin.contacts)
    row.update(zip(_contact_labels("exp", K), out.expected_local.ravel()))
    row.update(zip(_contact_labels("true", K), rec.wrench_local.ravel()))
    params = config.friction.params
    row["cone_margin"] = min(cone_margin(w, params) for w in rec.wrench_local)

    row["drift"] = state.drift
    row["added_mass"] = rec.added_mass
    row["proj_error"] = _projection_error(out)
    row["acc_residual"] = _acceleration_residual(rec, qdot)
    row["qp_failed"] = int(out.qp_failed)
    row["qp_iterations"] = out.qp.iterations if out.qp is not None else -1
    row["qp_active"] = len(out.qp.active_set) if out.qp is not None else -1
    row["qp_objective"] = out.qp.objective if out.qp is not None else float("nan")
    row["qp_kkt"] = out.qp.kkt_residual if out.qp is not None else float("nan")
    return row


def run_scenario(run: ScenarioRun) -> pd.DataFrame:
    """
    제어/적분 루프를 끝까지 실행하고 주기별 trace 를 반환합니다.

    시각은 tick * dt 로 정확히 맞춥니다. drift 컬럼은 해당 주기 시작 상태의 값입니다.

    Raises:
        SimulationError: 루프 안에서 발생한 모든 에러 (tick 번호 포함)
    """
    config = run.config
    dt = config.integrator.dt
    state = run.initial_state
    rows = []
    logger.info("시뮬레이션 시작: %s (%d ticks, dt=%g)", config.name, run.ticks, dt)
    for tick in range(run.ticks):
        t = tick * dt
        state = replace(state, time=t)
        try:
            out = run.controller.compute(state.q, state.qdot, t)
            next_state, rec = run.simulator.step(state, out.tau)
        except Exception as e:
            raise SimulationError(f"{type(e).__name__}: {e}", tick=tick, time=t) from e
        rows.append(_trace_row(t, state, out, rec, config))
        state = next_state
    logger.info("시뮬레이션 종료: %s (t=%.3f)", config.name, run.ticks * dt)
    return pd.DataFrame(rows)


# =============================================================================
# 지표와 보고서
# =============================================================================

@dataclass(frozen=True)
class InvariantCheck:
    name: str
    value: float
    threshold: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "passed": self.passed}


@dataclass(frozen=True)
class RunMetrics:
    """
    실행 결과 지표

    Attributes:
        tracking_rms (Dict[str, float]): 축별 자세 오차 RMS (전체 구간)
        tracking_rms_settled (Dict[str, float]): settle_time 이후 축별 RMS
        tracking_rms_position (float): settle_time 이후 제어하는 위치 방향 오차 노름의 RMS [m]
        max_drift (float): 최대 |Jc qdot|
        min_normal_force, max_normal_force (float): 참 접촉 법선력 범위 [N]
        cone_margin_min (float): 참 접촉 렌치의 최소 원뿔 여유
        force_discrepancy (float): 기대/참 접촉 렌치 RMS 불일치 / 참 렌치 RMS
        qp_failures (int): QP 실패 횟수
        max_projection_error (float): 투영 불변식 최대 오차
        max_acceleration_residual (float): 최대 |Jc qddot + Jc_dot qdot|
    """
    name: str
    ticks: int
    tracking_rms: Dict[str, float]
    tracking_rms_settled: Dict[str, float]
    tracking_rms_position: float
    max_drift: float
    min_normal_force: float
    max_normal_force: float
    cone_margin_min: float
    force_discrepancy: float
    qp_failures: int
    max_projection_error: float
    max_acceleration_residual: float
    checks: Tuple[InvariantCheck, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def finite(self) -> bool:
        values = [self.tracking_rms_position, self.max_drift, self.min_normal_force, self.max_normal_force,
                  self.cone_margin_min, self.force_discrepancy, self.max_projection_error,
                  self.max_acceleration_residual]
        values += list(self.tracking_rms.values()) + list(self.tracking_rms_settled.values())
        return bool(np.all(np.isfinite(values)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "ticks": self.ticks,
            "tracking_rms": self.tracking_rms,
            "tracking_rms_settled": self.tracking_rms_settled,
            "tracking_rms_position": self.tracking_rms_position,
            "max_drift": self.max_drift,
            "min_normal_force": self.min_normal_force,
            "max_normal_force": self.max_normal_force,
            "cone_margin_min": self.cone_margin_min,
            "force_discrepancy": self.force_discrepancy,
            "qp_failures": self.qp_failures,
            "max_projection_error": self.max_projection_error,
            "max_acceleration_residual": self.max_acceleration_residual,
            "passed": self.passed,
        }


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(x)))) if x.size else 0.0


def force_discrepancy(trace: pd.DataFrame) -> float:
    """기대 접촉 렌치와 참 접촉 렌치의 RMS 차이를 참 렌치 RMS 로 나눈 값"""
    exp = trace.filter(regex=r"^exp_c\d+_").to_numpy()
    true = trace.filter(regex=r"^true_c\d+_").to_numpy()
    signal = _rms(true)
    if signal == 0.0:
        return 0.0 if _rms(exp) == 0.0 else float("inf")
    return _rms(exp - true) / signal


def evaluate_checks(metrics: RunMetrics, config: ScenarioConfig) -> Tuple[InvariantCheck, ...]:
    checks = config.checks
    specs = [
        ("max_drift", metrics.max_drift, checks.max_drift, "le"),
        ("cone_margin_min", metrics.cone_margin_min, checks.min_cone_margin, "ge"),
        ("force_discrepancy", metrics.force_discrepancy, checks.max_force_discrepancy, "le"),
        ("tracking_rms_position", metrics.tracking_rms_position, checks.max_tracking_rms, "le"),
        ("qp_failures", metrics.qp_failures, checks.max_qp_failures, "le"),
        ("max_projection_error", metrics.max_projection_error, checks.max_projection_error, "le"),
        ("max_acceleration_residual", metrics.max_acceleration_residual, checks.max_acceleration_residual, "le"),
    ]
    out = [InvariantCheck("finite", float(metrics.finite), 1.0, metrics.finite)]
    for name, value, threshold, op in specs:
        if threshold is None:
            continue
        passed = value <= threshold if op == "le" else value >= threshold
        out.append(InvariantCheck(name, float(value), float(threshold), bool(passed)))
    return tuple(out)


def metrics_from_trace(trace: pd.DataFrame, config: ScenarioConfig,
                       task_rows: Sequence[int]) -> RunMetrics:
    """trace 로부터 지표와 불변식 검사 결과를 계산합니다."""
    settled = trace[trace["t"] >= config.settle_time]
    if settled.empty:
        settled = trace
    err_cols = [f"err_{a}" for a in AXES]
    position_cols = [f"err_{AXES[r]}" for r in task_rows if r >= 3]
    normal = trace.filter(regex=r"^true_c\d+_fz$").to_numpy()
    metrics = RunMetrics(
        name=config.name,
        ticks=len(trace),
        tracking_rms={a: _rms(trace[c].to_numpy()) for a, c in zip(AXES, err_cols)},
        tracking_rms_settled={a: _rms(settled[c].to_numpy()) for a, c in zip(AXES, err_cols)},
        tracking_rms_position=float(np.sqrt(np.mean(np.sum(np.square(settled[position_cols].to_numpy()), axis=1)))),
        max_drift=float(trace["drift"].max()),
        min_normal_force=float(normal.min()),
        max_normal_force=float(normal.max()),
        cone_margin_min=float(trace["cone_margin"].min()),
        force_discrepancy=force_discrepancy(trace),
        qp_failures=int(trace["qp_failed"].sum()),
        max_projection_error=float(trace["proj_error"].max()),
        max_acceleration_residual=float(trace["acc_residual"].max()),
    )
    return replace(metrics, checks=evaluate_checks(metrics, config))


def run_and_report(run: ScenarioRun, output_dir: Optional[Union[str, Path]] = None) -> RunMetrics:
    """
    시나리오를 실행하고 trace.csv, summary.json, metrics.json 을 씁니다.

    Args:
        run (ScenarioRun): 조립된 실행 단위
        output_dir (str, optional): 출력 디렉터리, None 이면 설정의 output_dir

    Returns:
        RunMetrics: 지표와 불변식 검사 결과

    Raises:
        SimulationError: 루프 도중 에러
    """
    config = run.config
    out_dir = Path(output_dir if output_dir is not None else (config.output_dir or config.name))
    out_dir.mkdir(parents=True, exist_ok=True)

    trace = run_scenario(run)
    trace.to_csv(out_dir / "trace.csv", index=False, float_format=FLOAT_FORMAT)
    metrics = metrics_from_trace(trace, config, run.task_rows)

    summary = {
        "name": config.name,
        "passed": metrics.passed,
        "checks": [c.to_dict() for c in metrics.checks],
        "config": config.to_dict(),
    }
    with open(out_dir / "summary.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, ensure_ascii=False)
    with open(out_dir / "metrics.json", "w", encoding="utf-8") as f:
        json.dump(metrics.to_dict(), f, indent=2, ensure_ascii=False)

    for check in metrics.checks:
        if not check.passed:
            logger.warning("검사 실패: %s = %.3e (기준 %.3e)", check.name, check.value, check.threshold)
    logger.info("%s: 추종 RMS %.2e m, 최대 drift %.2e, 최소 법선력 %.2f N, 불일치 %.2e, QP 실패 %d -> %s",
                config.name, metrics.tracking_rms_position, metrics.max_drift, metrics.min_normal_force,
                metrics.force_discrepancy, metrics.qp_failures, "PASS" if metrics.passed else "FAIL")
    return metrics


def _run_one(path: Path, output_dir: Path, overrides: Dict[str, Any]) -> Tuple[str, RunMetrics]:
    config = load_scenario(path).with_overrides(**overrides)
    run = build_scenario(config)
    return config.name, run_and_report(run, output_dir / config.name)


def run_batch(
    paths: Sequence[Union[str, Path]],
    output_dir: Union[str, Path],
    workers: int = 1,
    **overrides: Any
) -> Dict[str, RunMetrics]:
    """
    여러 시나리오를 worker 스레드에서 하나씩 실행합니다.

    실행 사이에 공유 상태는 없고, 시나리오마다 output_dir/<name> 에 결과를 씁니다.

    Args:
        paths (Sequence[str]): 시나리오 파일 경로
        output_dir (str): 출력 루트 디렉터리
        workers (int): worker 수
        **overrides: ScenarioConfig.with_overrides 인자 (duration, dt, seed)

    Returns:
        Dict[str, RunMetrics]: 시나리오 이름 -> 지표
    """
    output_dir = Path(output_dir)
    results: Dict[str, RunMetrics] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = [executor.submit(_run_one, Path(p), output_dir, overrides) for p in sorted(map(str, paths))]
        for future in futures:
            name, metrics = future.result()
            if name in results:
                raise ConfigValidationError(f"시나리오 이름이 중복됩니다: {name}", field="name")
            results[name] = metrics
    return results
