#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
시나리오 설정 모듈

JSON 시나리오 파일을 dataclass 로 파싱/직렬화합니다. 모든 검증 에러는
점(.)으로 구분된 설정 경로를 field 로 갖는 ConfigValidationError 입니다.
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

from fsfpid.errors import ConfigValidationError
from fsfpid.simulation_api import DisturbanceProfile, DisturbanceSegment, IntegratorConfig
from fsfpid.wrench_api import FrictionParams

logger = logging.getLogger(__name__)

CONSTRAINT_TYPES = ("surface", "grasp")
TRAJECTORY_KINDS = ("wipe", "circle", "hold")
ESTIMATOR_MODES = ("quasi_static", "full")
DATA_DIR = Path(__file__).parent / "data"


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _require(data: Dict[str, Any], key: str, path: str) -> Any:
    if not isinstance(data, dict):
        raise ConfigValidationError("객체(dict)여야 합니다", field=path or None)
    if key not in data or data[key] is None:
        raise ConfigValidationError("필수 항목입니다", field=_join(path, key))
    return data[key]


def _number(value: Any, path: str, positive: bool = False, minimum: Optional[float] = None) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigValidationError("숫자여야 합니다", field=path)
    if not math.isfinite(number):
        raise ConfigValidationError("유한한 값이어야 합니다", field=path)
    if positive and not number > 0.0:
        raise ConfigValidationError("양수여야 합니다", field=path)
    if minimum is not None and number < minimum:
        raise ConfigValidationError(f"{minimum} 이상이어야 합니다", field=path)
    return number


def _vector(value: Any, size: int, path: str) -> Tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or len(value) != size:
        raise ConfigValidationError(f"길이 {size} 의 배열이어야 합니다", field=path)
    return tuple(_number(v, f"{path}[{i}]") for i, v in enumerate(value))


def _optional_number(data: Dict[str, Any], key: str, path: str, default: Optional[float]) -> Optional[float]:
    if key not in data:
        return default
    if data[key] is None:
        return None
    return _number(data[key], _join(path, key))


@dataclass(frozen=True)
class RobotConfig:
    """
    팔 하나의 설정

    Attributes:
        name (str): 팔 이름
        model (Union[str, dict]): 로봇 모델 JSON 경로 (시나리오 파일 기준 상대 경로) 또는 인라인 모델
        base_xyz (Tuple[float, ...]): 월드 기준 베이스 위치
        base_rpy (Tuple[float, ...]): 월드 기준 베이스 자세
        q_seed (Tuple[float, ...]): 초기 자세 역기구학 시작점 (목표 말단 자세도 이 자세에서 정함)
    """
    name: str
    model: Union[str, Dict[str, Any]]
    q_seed: Tuple[float, ...]
    base_xyz: Tuple[float, ...] = (0.0, 0.0, 0.0)
    base_rpy: Tuple[float, ...] = (0.0, 0.0, 0.0)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str) -> "RobotConfig":
        model = _require(data, "model", path)
        if not isinstance(model, (str, dict)):
            raise ConfigValidationError("경로 문자열 또는 모델 객체여야 합니다", field=_join(path, "model"))
        seed = _require(data, "q_seed", path)
        if not isinstance(seed, list) or not seed:
            raise ConfigValidationError("관절 각도 배열이어야 합니다", field=_join(path, "q_seed"))
        return cls(
            name=str(data.get("name", path)),
            model=model,
            q_seed=_vector(seed, len(seed), _join(path, "q_seed")),
            base_xyz=_vector(data.get("base_xyz", [0.0, 0.0, 0.0]), 3, _join(path, "base_xyz")),
            base_rpy=_vector(data.get("base_rpy", [0.0, 0.0, 0.0]), 3, _join(path, "base_rpy")),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "model": self.model,
            "q_seed": list(self.q_seed),
            "base_xyz": list(self.base_xyz),
            "base_rpy": list(self.base_rpy),
        }


@dataclass(frozen=True)
class TaskConfig:
    """작업 프레임 시작 자세. start_rpy 가 None 이면 단일 팔은 seed 자세, 파지는 항등 자세."""
    start_position: Tuple[float, ...]
    start_rpy: Optional[Tuple[float, ...]] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str) -> "TaskConfig":
        rpy = data.get("start_rpy") if isinstance(data, dict) else None
        return cls(
            start_position=_vector(_require(data, "start_position", path), 3, _join(path, "start_position")),
            start_rpy=None if rpy is None else _vector(rpy, 3, _join(path, "start_rpy")),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start_position": list(self.start_position),
            "start_rpy": None if self.start_rpy is None else list(self.start_rpy),
        }


@dataclass(frozen=True)
class TrajectoryConfig:
    kind: str
    radius: float = 0.1
    speed: float = math.pi / 2

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str) -> "TrajectoryConfig":
        kind = _require(data, "kind", path)
        if kind not in TRAJECTORY_KINDS:
            raise ConfigValidationError(f"{TRAJECTORY_KINDS} 중 하나여야 합니다", field=_join(path, "kind"))
        radius = _number(data.get("radius", 0.1), _join(path, "radius"))
        speed = _number(data.get("speed", math.pi / 2), _join(path, "speed"))
        if kind != "hold" and not radius > 0.0:
            raise ConfigValidationError("원 궤적 반지름은 양수여야 합니다", field=_join(path, "radius"))
        return cls(kind=kind, radius=radius, speed=speed)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "radius": self.radius, "speed": self.speed}


@dataclass(frozen=True)
class GainsConfig:
    """
    임피던스/자세 이득

    JSON 은 {"stiffness": {"linear": [..], "angular": [..]}, "damping": {...},
    "posture": {"stiffness": .., "damping": ..}} 형태입니다.
    """
    stiffness_linear: Tuple[float, ...] = (300.0, 300.0, 300.0)
    stiffness_angular: Tuple[float, ...] = (30.0, 30.0, 30.0)
    damping_linear: Tuple[float, ...] = (60.0, 60.0, 60.0)
    damping_angular: Tuple[float, ...] = (1.5, 1.5, 1.5)
    posture_stiffness: float = 10.0
    posture_damping: float = 1.0

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str) -> "GainsConfig":
        defaults = cls()

        def pair(block: str, attr: str) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
            entry = data.get(block, {})
            where = _join(path, block)
            linear = entry.get("linear", getattr(defaults, f"{attr}_linear"))
            angular = entry.get("angular", getattr(defaults, f"{attr}_angular"))
            lin = _vector(linear, 3, _join(where, "linear"))
            ang = _vector(angular, 3, _join(where, "angular"))
            for i, v in enumerate(lin + ang):
                if not v > 0.0:
                    raise ConfigValidationError("이득은 양수여야 합니다", field=where)
            return lin, ang

        k_lin, k_ang = pair("stiffness", "stiffness")
        d_lin, d_ang = pair("damping", "damping")
        posture = data.get("posture", {})
        return cls(
            stiffness_linear=k_lin,
            stiffness_angular=k_ang,
            damping_linear=d_lin,
            damping_angular=d_ang,
            posture_stiffness=_number(posture.get("stiffness", defaults.posture_stiffness),
                                      _join(path, "posture.stiffness"), minimum=0.0),
            posture_damping=_number(posture.get("damping", defaults.posture_damping),
                                    _join(path, "posture.damping"), minimum=0.0),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "stiffness": {"linear": list(self.stiffness_linear), "angular": list(self.stiffness_angular)},
            "damping": {"linear": list(self.damping_linear), "angular": list(self.damping_angular)},
            "posture": {"stiffness": self.posture_stiffness, "damping": self.posture_damping},
        }

    @property
    def stiffness(self) -> Tuple[float, ...]:
        """[각; 선] 순서 대각 성분"""
        return self.stiffness_angular + self.stiffness_linear

    @property
    def damping(self) -> Tuple[float, ...]:
        return self.damping_angular + self.damping_linear


@dataclass(frozen=True)
class FrictionConfig:
    mu: float
    gamma: float
    delta_x: float
    delta_y: float
    min_normal_force: float = 0.0
    edges: int = 8
    epsilon: Optional[float] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str) -> "FrictionConfig":
        values = {key: _number(_require(data, key, path), _join(path, key), positive=True)
                  for key in ("mu", "gamma", "delta_x", "delta_y")}
        edges = data.get("edges", 8)
        if not isinstance(edges, int) or edges < 3:
            raise ConfigValidationError("3 이상의 정수여야 합니다", field=_join(path, "edges"))
        epsilon = _optional_number(data, "epsilon", path, None)
        if epsilon is not None and not epsilon > 0.0:
            raise ConfigValidationError("양수여야 합니다", field=_join(path, "epsilon"))
        return cls(
            min_normal_force=_number(data.get("min_normal_force", 0.0),
                                     _join(path, "min_normal_force"), minimum=0.0),
            edges=edges,
            epsilon=epsilon,
            **values,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mu": self.mu,
            "gamma": self.gamma,
            "delta_x": self.delta_x,
            "delta_y": self.delta_y,
            "min_normal_force": self.min_normal_force,
            "edges": self.edges,
            "epsilon": self.epsilon,
        }

    @property
    def params(self) -> FrictionParams:
        return FrictionParams(self.mu, self.gamma, self.delta_x, self.delta_y, self.min_normal_force)


@dataclass(frozen=True)
class ObjectConfig:
    """
    파지 물체

    Attributes:
        dims (Tuple[float, ...]): 상자 크기 [m]
        mass (float): 질량 [kg] (제어기는 모름)
        grasp_offsets (Tuple[Tuple[float, ...], ...]): 물체 프레임 기준 접촉점 위치
    """
    grasp_offsets: Tuple[Tuple[float, ...], ...]
    dims: Tuple[float, ...] = (0.20, 0.30, 0.40)
    mass: float = 0.7

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str) -> "ObjectConfig":
        offsets = _require(data, "grasp_offsets", path)
        if not isinstance(offsets, list) or len(offsets) < 2:
            raise ConfigValidationError("접촉점이 2개 이상 필요합니다", field=_join(path, "grasp_offsets"))
        dims = _vector(data.get("dims", [0.20, 0.30, 0.40]), 3, _join(path, "dims"))
        if min(dims) <= 0.0:
            raise ConfigValidationError("양수여야 합니다", field=_join(path, "dims"))
        return cls(
            grasp_offsets=tuple(_vector(o, 3, f"{_join(path, 'grasp_offsets')}[{i}]")
                                for i, o in enumerate(offsets)),
            dims=dims,
            mass=_number(data.get("mass", 0.7), _join(path, "mass"), minimum=0.0),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dims": list(self.dims),
            "mass": self.mass,
            "grasp_offsets": [list(o) for o in self.grasp_offsets],
        }


def disturbance_from_dict(data: Dict[str, Any], path: str) -> DisturbanceSegment:
    """
    외란 구간 하나를 파싱합니다.

    wrench 구간은 "force", "moment" 3 성분으로 적습니다.
    """
    kind = _require(data, "kind", path)
    moment = _vector(data.get("moment", [0.0, 0.0, 0.0]), 3, _join(path, "moment"))
    force = _vector(data.get("force", [0.0, 0.0, 0.0]), 3, _join(path, "force"))
    target = data.get("target")
    seed = data.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigValidationError("정수여야 합니다", field=_join(path, "seed"))
    try:
        return DisturbanceSegment(
            kind=kind,
            t_start=_number(_require(data, "t_start", path), _join(path, "t_start"), minimum=0.0),
            t_end=_number(_require(data, "t_end", path), _join(path, "t_end")),
            wrench=moment + force,
            mass=_number(data.get("mass", 0.0), _join(path, "mass")),
            target=None if target is None else _vector(target, 3, _join(path, "target")),
            stiffness=_number(data.get("stiffness", 1e4), _join(path, "stiffness"), positive=True),
            damping=_number(data.get("damping", 200.0), _join(path, "damping"), minimum=0.0),
            std=_number(data.get("std", 0.0), _join(path, "std")),
            seed=seed,
        )
    except ConfigValidationError as e:
        if e.field and e.field.startswith(path):
            raise
        raise ConfigValidationError(e.message, field=_join(path, e.field or ""))


def disturbance_to_dict(seg: DisturbanceSegment) -> Dict[str, Any]:
    return {
        "kind": seg.kind,
        "t_start": seg.t_start,
        "t_end": seg.t_end,
        "moment": list(seg.wrench[:3]),
        "force": list(seg.wrench[3:]),
        "mass": seg.mass,
        "target": None if seg.target is None else list(seg.target),
        "stiffness": seg.stiffness,
        "damping": seg.damping,
        "std": seg.std,
        "seed": seg.seed,
    }


def integrator_from_dict(data: Dict[str, Any], path: str) -> IntegratorConfig:
    method = data.get("method", "semi_implicit_euler")
    correction = data.get("position_correction", True)
    if not isinstance(correction, bool):
        raise ConfigValidationError("true/false 여야 합니다", field=_join(path, "position_correction"))
    return IntegratorConfig(
        dt=_number(data.get("dt", 1e-3), _join(path, "dt"), positive=True),
        method=method,
        baumgarte_gain=_optional_number(data, "baumgarte_gain", path, None),
        drift_tolerance=_number(data.get("drift_tolerance", 1e-6), _join(path, "drift_tolerance"), positive=True),
        position_correction=correction,
    )


def integrator_to_dict(cfg: IntegratorConfig) -> Dict[str, Any]:
    return {
        "dt": cfg.dt,
        "method": cfg.method,
        "baumgarte_gain": cfg.baumgarte_gain,
        "drift_tolerance": cfg.drift_tolerance,
        "position_correction": cfg.position_correction,
    }


@dataclass(frozen=True)
class ChecksConfig:
    """
    실행 후 불변식 검사 임계값 (None 이면 검사하지 않음)

    Attributes:
        max_drift (float): 최대 |Jc qdot|
        min_cone_margin (float): 참 접촉 렌치의 최소 원뿔 여유 [N]
        max_force_discrepancy (float): 기대/참 접촉 렌치 RMS 불일치 비율
        max_tracking_rms (float): settle_time 이후 위치 추종 RMS [m]
        max_qp_failures (int): 허용 QP 실패 횟수
        max_projection_error (float): 투영 불변식 최대 오차
        max_acceleration_residual (float): |Jc qddot + Jc_dot qdot| 최대값
    """
    max_drift: Optional[float] = 1e-6
    min_cone_margin: Optional[float] = -1e-6
    max_force_discrepancy: Optional[float] = 0.01
    max_tracking_rms: Optional[float] = None
    max_qp_failures: Optional[int] = 0
    max_projection_error: Optional[float] = 1e-9
    max_acceleration_residual: Optional[float] = 1e-6

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str) -> "ChecksConfig":
        defaults = cls()
        values = {}
        for name in ("max_drift", "min_cone_margin", "max_force_discrepancy", "max_tracking_rms",
                     "max_projection_error", "max_acceleration_residual"):
            values[name] = _optional_number(data, name, path, getattr(defaults, name))
        failures = data.get("max_qp_failures", defaults.max_qp_failures)
        if failures is not None and (not isinstance(failures, int) or failures < 0):
            raise ConfigValidationError("0 이상의 정수여야 합니다", field=_join(path, "max_qp_failures"))
        return cls(max_qp_failures=failures, **values)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_drift": self.max_drift,
            "min_cone_margin": self.min_cone_margin,
            "max_force_discrepancy": self.max_force_discrepancy,
            "max_tracking_rms": self.max_tracking_rms,
            "max_qp_failures": self.max_qp_failures,
            "max_projection_error": self.max_projection_error,
            "max_acceleration_residual": self.max_acceleration_residual,
        }


@dataclass(frozen=True)
class ScenarioConfig:
    """
    시나리오 설정

    Examples:
        >>> config = load_scenario("fsfpid/data/single_wipe.json")
        >>> config.constraint
        'surface'
    """
    name: str
    constraint: str
    duration: float
    robots: Tuple[RobotConfig, ...]
    task: TaskConfig
    trajectory: TrajectoryConfig
    gains: GainsConfig
    friction: FrictionConfig
    object: Optional[ObjectConfig] = None
    disturbances: Tuple[DisturbanceSegment, ...] = ()
    integrator: IntegratorConfig = IntegratorConfig()
    estimator_mode: str = "quasi_static"
    initial_velocity: str = "matched"
    settle_time: float = 0.5
    checks: ChecksConfig = ChecksConfig()
    output_dir: Optional[str] = None
    seed: int = 0
    base_dir: Optional[str] = field(default=None, compare=False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], path: str = "") -> "ScenarioConfig":
        """
        시나리오 딕셔너리를 검증하고 파싱합니다.

        Raises:
            ConfigValidationError: 값이 없거나 잘못되었을 때 (field 는 설정 경로)
        """
        if not isinstance(data, dict):
            raise ConfigValidationError("시나리오는 객체여야 합니다")
        constraint = _require(data, "constraint", path)
        if constraint not in CONSTRAINT_TYPES:
            raise ConfigValidationError(f"{CONSTRAINT_TYPES} 중 하나여야 합니다", field=_join(path, "constraint"))

        robots_data = _require(data, "robots", path)
        if not isinstance(robots_data, list) or not robots_data:
            raise ConfigValidationError("팔 목록이 필요합니다", field=_join(path, "robots"))
        robots = tuple(RobotConfig.from_dict(r, f"{_join(path, 'robots')}[{i}]")
                       for i, r in enumerate(robots_data))

        trajectory = TrajectoryConfig.from_dict(_require(data, "trajectory", path), _join(path, "trajectory"))
        friction = FrictionConfig.from_dict(_require(data, "friction", path), _join(path, "friction"))

        object_cfg = None
        if constraint == "surface":
            if len(robots) != 1:
                raise ConfigValidationError("평면 접촉은 팔 하나만 지원합니다", field=_join(path, "robots"))
            if data.get("object") is not None:
                raise ConfigValidationError("평면 접촉 시나리오에는 쓰이지 않습니다", field=_join(path, "object"))
            if trajectory.kind not in ("wipe", "hold"):
                raise ConfigValidationError("평면 접촉은 wipe/hold 궤적만 지원합니다",
                                            field=_join(path, "trajectory.kind"))
        else:
            if len(robots) < 2:
                raise ConfigValidationError("파지에는 팔이 2개 이상 필요합니다", field=_join(path, "robots"))
            object_cfg = ObjectConfig.from_dict(_require(data, "object", path), _join(path, "object"))
            if len(object_cfg.grasp_offsets) != len(robots):
                raise ConfigValidationError("접촉점 수와 팔 수가 같아야 합니다",
                                            field=_join(path, "object.grasp_offsets"))
            if trajectory.kind not in ("circle", "hold"):
                raise ConfigValidationError("파지는 circle/hold 궤적만 지원합니다",
                                            field=_join(path, "trajectory.kind"))

        disturbances_data = data.get("disturbances", [])
        if not isinstance(disturbances_data, list):
            raise ConfigValidationError("배열이어야 합니다", field=_join(path, "disturbances"))
        disturbances = tuple(disturbance_from_dict(d, f"{_join(path, 'disturbances')}[{i}]")
                             for i, d in enumerate(disturbances_data))
        try:
            DisturbanceProfile(disturbances)
        except ConfigValidationError as e:
            raise ConfigValidationError(e.message, field=_join(path, "disturbances"))

        estimator_mode = data.get("estimator", {}).get("mode", "quasi_static")
        if estimator_mode not in ESTIMATOR_MODES:
            raise ConfigValidationError(f"{ESTIMATOR_MODES} 중 하나여야 합니다", field=_join(path, "estimator.mode"))
        initial_velocity = data.get("initial_velocity", "matched")
        if initial_velocity not in ("matched", "zero"):
            raise ConfigValidationError("matched 또는 zero 여야 합니다", field=_join(path, "initial_velocity"))
        seed = data.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigValidationError("정수여야 합니다", field=_join(path, "seed"))

        integrator = integrator_from_dict(data.get("integrator", {}), _join(path, "integrator"))

        return cls(
            name=str(data.get("name", "scenario")),
            constraint=constraint,
            duration=_number(_require(data, "duration", path), _join(path, "duration"), positive=True),
            robots=robots,
            task=TaskConfig.from_dict(_require(data, "task", path), _join(path, "task")),
            trajectory=trajectory,
            gains=GainsConfig.from_dict(data.get("gains", {}), _join(path, "gains")),
            friction=friction,
            object=object_cfg,
            disturbances=disturbances,
            integrator=integrator,
            estimator_mode=estimator_mode,
            initial_velocity=initial_velocity,
            settle_time=_number(data.get("settle_time", 0.5), _join(path, "settle_time"), minimum=0.0),
            checks=ChecksConfig.from_dict(data.get("checks", {}), _join(path, "checks")),
            output_dir=data.get("output_dir"),
            seed=seed,
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "name": self.name,
            "constraint": self.constraint,
            "duration": self.duration,
            "robots": [r.to_dict() for r in self.robots],
            "task": self.task.to_dict(),
            "trajectory": self.trajectory.to_dict(),
            "gains": self.gains.to_dict(),
            "friction": self.friction.to_dict(),
            "disturbances": [disturbance_to_dict(d) for d in self.disturbances],
            "integrator": integrator_to_dict(self.integrator),
            "estimator": {"mode": self.estimator_mode},
            "initial_velocity": self.initial_velocity,
            "settle_time": self.settle_time,
            "checks": self.checks.to_dict(),
            "output_dir": self.output_dir,
            "seed": self.seed,
        }
        if self.object is not None:
            data["object"] = self.object.to_dict()
        return data

    def with_overrides(
        self,
        duration: Optional[float] = None,
        dt: Optional[float] = None,
        seed: Optional[int] = None
    ) -> "ScenarioConfig":
        """CLI 옵션으로 일부 값을 바꾼 설정을 반환합니다."""
        config = self
        if duration is not None:
            config = replace(config, duration=_number(duration, "duration", positive=True))
        if dt is not None:
            config = replace(config, integrator=replace(config.integrator, dt=_number(dt, "integrator.dt", positive=True)))
        if seed is not None:
            config = replace(config, seed=int(seed))
        return config

    def resolve(self, relative: str) -> Path:
        """시나리오 파일 기준 상대 경로를 풉니다."""
        candidate = Path(relative)
        if candidate.is_absolute():
            return candidate
        base = Path(self.base_dir) if self.base_dir else DATA_DIR
        return base / candidate


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """
    JSON 시나리오 파일을 읽습니다.

    Raises:
        ConfigValidationError: JSON 문법 오류 또는 검증 실패
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigValidationError(f"JSON 파싱 실패: {e}")
    except OSError as e:
        raise ConfigValidationError(f"파일을 읽을 수 없습니다: {e}")
    config = ScenarioConfig.from_dict(data)
    logger.debug("시나리오 로드: %s (%s)", config.name, path)
    return replace(config, base_dir=str(path.resolve().parent))


def dump_scenario(config: ScenarioConfig, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.to_dict(), f, indent=2, ensure_ascii=False)
