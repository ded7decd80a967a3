#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
직렬 매니퓰레이터 기구학/동역학 모듈

회전 관절만으로 이루어진 직렬 체인의 순기구학, 기하 야코비안과 그 시간미분,
질량 행렬(CRBA), 바이어스 토크(RNEA)를 계산합니다.

모든 트위스트/야코비안 행은 [각속도(3); 선속도(3)] 순서를 따르며,
모든 공간 벡터는 월드 좌표계에서 표현됩니다.
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from fsfpid.errors import ConfigValidationError, DimensionMismatch

logger = logging.getLogger(__name__)

DEFAULT_GRAVITY = (0.0, 0.0, -9.81)
AXIS_TOL = 1e-12


def _vector(value: Any, size: int = 3) -> np.ndarray:
    arr = np.array(value, dtype=float).reshape(size)
    arr.setflags(write=False)
    return arr


def _hat(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def _axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    # Rodrigues
    k = _hat(axis)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def _rpy_matrix(rpy: np.ndarray) -> np.ndarray:
    # 고정축 roll-pitch-yaw: R = Rz(yaw) Ry(pitch) Rx(roll)
    return Rotation.from_euler("xyz", rpy).as_matrix()


@dataclass(frozen=True, eq=False)
class Link:
    """
    링크 하나와 그 링크를 구동하는 회전 관절

    Attributes:
        name (str): 링크 이름
        xyz (np.ndarray): 부모 프레임 기준 관절 원점 위치 [m]
        rpy (np.ndarray): 부모 프레임 기준 관절 프레임 자세 (roll, pitch, yaw) [rad]
        axis (np.ndarray): 관절 프레임에서 표현한 회전축 (단위 벡터)
        mass (float): 링크 질량 [kg]
        com (np.ndarray): 링크 프레임 기준 질량 중심 [m]
        inertia (np.ndarray): 질량 중심 기준 회전 관성 (3x3, 링크 프레임) [kg·m²]
    """
    name: str
    xyz: np.ndarray
    rpy: np.ndarray
    axis: np.ndarray
    mass: float
    com: np.ndarray
    inertia: np.ndarray
    origin: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "xyz", _vector(self.xyz))
        object.__setattr__(self, "rpy", _vector(self.rpy))
        object.__setattr__(self, "axis", _vector(self.axis))
        object.__setattr__(self, "com", _vector(self.com))
        inertia = np.array(self.inertia, dtype=float).reshape(3, 3)
        inertia.setflags(write=False)
        object.__setattr__(self, "inertia", inertia)
        object.__setattr__(self, "origin", _rpy_matrix(self.rpy))

        if abs(np.linalg.norm(self.axis) - 1.0) > AXIS_TOL:
            raise ConfigValidationError("관절 축은 단위 벡터여야 합니다", field=f"{self.name}.axis")
        if not self.mass > 0.0:
            raise ConfigValidationError("질량은 양수여야 합니다", field=f"{self.name}.mass")
        if not np.allclose(inertia, inertia.T, atol=1e-12):
            raise ConfigValidationError("관성 텐서가 대칭이 아닙니다", field=f"{self.name}.inertia")
        if np.linalg.eigvalsh(inertia).min() <= 0.0:
            raise ConfigValidationError("관성 텐서가 양의 정부호가 아닙니다", field=f"{self.name}.inertia")


@dataclass(frozen=True, eq=False)
class ManipulatorModel:
    """
    직렬 매니퓰레이터 모델

    Attributes:
        name (str): 모델 이름
        links (Tuple[Link, ...]): 베이스에서 말단 방향 순서의 링크
        gravity (np.ndarray): 중력 가속도 벡터 [m/s²]
        tool_xyz (np.ndarray): 마지막 링크 프레임 기준 말단(작업점) 위치 [m]
        tool_rpy (np.ndarray): 마지막 링크 프레임 기준 말단 자세 [rad]
        base_xyz (np.ndarray): 월드 기준 베이스 위치 [m]
        base_rpy (np.ndarray): 월드 기준 베이스 자세 [rad]
    """
    name: str
    links: Tuple[Link, ...]
    gravity: np.ndarray = field(default_factory=lambda: _vector(DEFAULT_GRAVITY))
    tool_xyz: np.ndarray = field(default_factory=lambda: _vector((0.0, 0.0, 0.0)))
    tool_rpy: np.ndarray = field(default_factory=lambda: _vector((0.0, 0.0, 0.0)))
    base_xyz: np.ndarray = field(default_factory=lambda: _vector((0.0, 0.0, 0.0)))
    base_rpy: np.ndarray = field(default_factory=lambda: _vector((0.0, 0.0, 0.0)))

    def __post_init__(self) -> None:
        if not self.links:
            raise ConfigValidationError("링크가 최소 하나 필요합니다", field="links")
        object.__setattr__(self, "links", tuple(self.links))
        for name in ("gravity", "tool_xyz", "tool_rpy", "base_xyz", "base_rpy"):
            object.__setattr__(self, name, _vector(getattr(self, name)))

    @property
    def dof(self) -> int:
        return len(self.links)

    @property
    def tool_rotation(self) -> np.ndarray:
        return _rpy_matrix(self.tool_rpy)

    @property
    def base_rotation(self) -> np.ndarray:
        return _rpy_matrix(self.base_rpy)

    def placed(self, xyz: Sequence[float], rpy: Sequence[float]) -> "ManipulatorModel":
        """월드 좌표계에서 베이스 위치만 바꾼 모델을 반환합니다."""
        return replace(self, base_xyz=_vector(xyz), base_rpy=_vector(rpy))


@dataclass(frozen=True, eq=False)
class JointState:
    q: np.ndarray
    qdot: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        q = np.array(self.q, dtype=float).reshape(-1)
        qdot = np.array(self.qdot, dtype=float).reshape(-1)
        if q.shape != qdot.shape:
            raise DimensionMismatch(what="qdot", expected=q.shape[0], got=qdot.shape[0])
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qdot)


@dataclass(frozen=True, eq=False)
class JointTorque:
    tau: np.ndarray

    def __post_init__(self) -> None:
        tau = np.array(self.tau, dtype=float).reshape(-1)
        if not np.all(np.isfinite(tau)):
            raise ValueError("관절 토크에 유한하지 않은 값이 있습니다")
        object.__setattr__(self, "tau", tau)

    def __add__(self, other: "JointTorque") -> "JointTorque":
        return JointTorque(self.tau + other.tau)


@dataclass(frozen=True, eq=False)
class LinkFrames:
    """
    순기구학 결과

    Attributes:
        positions (np.ndarray): (Q, 3) 각 관절 프레임 원점의 월드 위치
        axes (np.ndarray): (Q, 3) 각 관절 회전축의 월드 방향
        rotations (np.ndarray): (Q, 3, 3) 관절 회전 이후 각 링크 프레임의 월드 자세
        ee_position (np.ndarray): 말단 위치
        ee_rotation (np.ndarray): 말단 자세 (3x3)
    """
    positions: np.ndarray
    axes: np.ndarray
    rotations: np.ndarray
    ee_position: np.ndarray
    ee_rotation: np.ndarray

    @property
    def ee_quaternion(self) -> np.ndarray:
        """말단 자세 단위 쿼터니언 [x, y, z, w]"""
        return Rotation.from_matrix(self.ee_rotation).as_quat()


@dataclass(frozen=True, eq=False)
class DynamicsTerms:
    M: Optional[np.ndarray]
    h: Optional[np.ndarray]
    Jx: np.ndarray
    Jx_dot: np.ndarray
    ee_position: np.ndarray
    ee_rotation: np.ndarray

    @property
    def ee_quaternion(self) -> np.ndarray:
        return Rotation.from_matrix(self.ee_rotation).as_quat()


def _check_q(model: ManipulatorModel, q: np.ndarray, what: str = "q") -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != model.dof:
        raise DimensionMismatch(what=what, expected=model.dof, got=q.shape[0])
    return q


def forward_kinematics(model: ManipulatorModel, q: np.ndarray) -> LinkFrames:
    """
    순기구학

    Args:
        model (ManipulatorModel): 매니퓰레이터 모델
        q (np.ndarray): 관절 각도 [rad], 길이 Q

    Returns:
        LinkFrames: 모든 링크 프레임과 말단의 월드 자세

    Raises:
        DimensionMismatch: q 의 길이가 자유도와 다를 때

    Examples:
        >>> frames = forward_kinematics(model, np.zeros(model.dof))
        >>> frames.ee_position
    """
    q = _check_q(model, q)
    n = model.dof
    positions = np.empty((n, 3))
    axes = np.empty((n, 3))
    rotations = np.empty((n, 3, 3))

    R = model.base_rotation
    p = np.array(model.base_xyz, dtype=float)
    for i, link in enumerate(model.links):
        p = p + R @ link.xyz
        R = R @ link.origin
        axes[i] = R @ link.axis
        R = R @ _axis_angle(link.axis, q[i])
        positions[i] = p
        rotations[i] = R

    ee_position = p + R @ model.tool_xyz
    ee_rotation = R @ model.tool_rotation
    return LinkFrames(positions, axes, rotations, ee_position, ee_rotation)


def _jacobian_from_frames(frames: LinkFrames) -> np.ndarray:
    z = frames.axes
    lever = frames.ee_position - frames.positions
    return np.vstack([z.T, np.cross(z, lever).T])


def jacobian(model: ManipulatorModel, q: np.ndarray,
             frames: Optional[LinkFrames] = None) -> np.ndarray:
    """말단 기하 야코비안 (6xQ, [각속도; 선속도] 행 순서)

    i 번째 열은 [z_i; z_i x (p_ee - p_i)] 입니다.
    """
    if frames is None:
        frames = forward_kinematics(model, q)
    else:
        _check_q(model, q)
    return _jacobian_from_frames(frames)


def _jacobian_dot_from_frames(frames: LinkFrames, qdot: np.ndarray) -> np.ndarray:
    z = frames.axes
    p = frames.positions
    zq = z * qdot[:, None]

    # 관절 i 의 축은 링크 i-1 의 각속도로 회전한다
    omega = np.cumsum(zq, axis=0)
    omega_prev = np.vstack([np.zeros(3), omega[:-1]])
    z_dot = np.cross(omega_prev, z)

    # 관절 원점 속도: sum_{j<i} z_j x (p_i - p_j) qdot_j
    moment = np.cumsum(np.cross(zq, p), axis=0)
    moment_prev = np.vstack([np.zeros(3), moment[:-1]])
    p_dot = np.cross(omega_prev, p) - moment_prev

    ee_dot = np.sum(np.cross(zq, frames.ee_position - p), axis=0)
    lever = frames.ee_position - p
    linear = np.cross(z_dot, lever) + np.cross(z, ee_dot - p_dot)
    return np.vstack([z_dot.T, linear.T])


def jacobian_dot(model: ManipulatorModel, q: np.ndarray, qdot: np.ndarray,
                 frames: Optional[LinkFrames] = None) -> np.ndarray:
    """(q, qdot) 궤적을 따른 야코비안의 시간미분"""
    qdot = _check_q(model, qdot, "qdot")
    if frames is None:
        frames = forward_kinematics(model, q)
    return _jacobian_dot_from_frames(frames, qdot)


def _spatial_inertias(model: ManipulatorModel, frames: LinkFrames) -> np.ndarray:
    """월드 원점 기준 6x6 공간 관성 ([각; 선] 순서)"""
    out = np.empty((model.dof, 6, 6))
    for i, link in enumerate(model.links):
        R = frames.rotations[i]
        c = frames.positions[i] + R @ link.com
        C = _hat(c)
        m = link.mass
        out[i, :3, :3] = R @ link.inertia @ R.T + m * C @ C.T
        out[i, :3, 3:] = m * C
        out[i, 3:, :3] = m * C.T
        out[i, 3:, 3:] = m * np.eye(3)
    return out


def _motion_subspaces(frames: LinkFrames) -> np.ndarray:
    z = frames.axes
    return np.hstack([z, np.cross(frames.positions, z)])


def _mass_matrix_from_frames(model: ManipulatorModel, frames: LinkFrames) -> np.ndarray:
    inertias = _spatial_inertias(model, frames)
    S = _motion_subspaces(frames)
    # 합성 강체 관성: Ic_j = sum_{k>=j} I_k
    composite = np.cumsum(inertias[::-1], axis=0)[::-1]
    F = np.einsum("jab,jb->ja", composite, S)
    M = S @ F.T
    # i <= j 인 원소는 M[i, j] = S_i . (Ic_j S_j)
    upper = np.triu(M)
    return upper + np.triu(upper, 1).T


def mass_matrix(model: ManipulatorModel, q: np.ndarray,
                frames: Optional[LinkFrames] = None) -> np.ndarray:
    """
    복합 강체 알고리즘(CRBA)으로 질량 행렬을 계산합니다.

    Returns:
        np.ndarray: (Q, Q) 대칭 양의 정부호 질량 행렬 [kg·m²]
    """
    if frames is None:
        frames = forward_kinematics(model, q)
    return _mass_matrix_from_frames(model, frames)


def _crm(v: np.ndarray) -> np.ndarray:
    out = np.zeros((6, 6))
    w = _hat(v[:3])
    out[:3, :3] = w
    out[3:, :3] = _hat(v[3:])
    out[3:, 3:] = w
    return out


def _rnea(model: ManipulatorModel, frames: LinkFrames, qdot: np.ndarray,
          qddot: np.ndarray, gravity: np.ndarray) -> np.ndarray:
    inertias = _spatial_inertias(model, frames)
    S = _motion_subspaces(frames)

    v = np.zeros(6)
    a = np.concatenate([np.zeros(3), -gravity])
    forces = np.empty((model.dof, 6))
    for i in range(model.dof):
        vj = S[i] * qdot[i]
        v = v + vj
        a = a + _crm(v) @ vj + S[i] * qddot[i]
        Iv = inertias[i] @ v
        forces[i] = inertias[i] @ a - _crm(v).T @ Iv

    total = np.cumsum(forces[::-1], axis=0)[::-1]
    return np.einsum("ia,ia->i", S, total)


def bias_forces(model: ManipulatorModel, q: np.ndarray, qdot: np.ndarray,
                frames: Optional[LinkFrames] = None) -> np.ndarray:
    """
    재귀 뉴턴-오일러(RNEA, qddot = 0)로 h = C(q, qdot) qdot + g(q) 를 계산합니다.
    """
    qdot = _check_q(model, qdot, "qdot")
    if frames is None:
        frames = forward_kinematics(model, q)
    return _rnea(model, frames, qdot, np.zeros(model.dof), model.gravity)


def inverse_dynamics(model: ManipulatorModel, q: np.ndarray, qdot: np.ndarray,
                     qddot: np.ndarray) -> np.ndarray:
    """tau = M qddot + h"""
    qdot = _check_q(model, qdot, "qdot")
    qddot = _check_q(model, qddot, "qddot")
    frames = forward_kinematics(model, q)
    return _rnea(model, frames, qdot, qddot, model.gravity)


def dynamics_terms(model: ManipulatorModel, q: np.ndarray, qdot: np.ndarray,
                   with_inertia: bool = True) -> DynamicsTerms:
    """한 상태에서의 (M, h, Jx, Jx_dot, 말단 자세) 묶음을 한 번의 순기구학으로 계산합니다.

    with_inertia=False 이면 M, h 는 None 입니다 (구속 투영만 필요한 경우).
    """
    qdot = _check_q(model, qdot, "qdot")
    frames = forward_kinematics(model, q)
    return DynamicsTerms(
        M=_mass_matrix_from_frames(model, frames) if with_inertia else None,
        h=_rnea(model, frames, qdot, np.zeros(model.dof), model.gravity) if with_inertia else None,
        Jx=_jacobian_from_frames(frames),
        Jx_dot=_jacobian_dot_from_frames(frames, qdot),
        ee_position=frames.ee_position,
        ee_rotation=frames.ee_rotation,
    )


def point_acceleration(model: ManipulatorModel, q: np.ndarray, qdot: np.ndarray,
                       qddot: np.ndarray) -> np.ndarray:
    """말단 점의 [각가속도; 선가속도] = Jx qddot + Jx_dot qdot"""
    qddot = _check_q(model, qddot, "qddot")
    frames = forward_kinematics(model, q)
    return _jacobian_from_frames(frames) @ qddot + _jacobian_dot_from_frames(frames, qdot) @ qdot


def attach_payload(model: ManipulatorModel, mass: float, com: Sequence[float],
                   inertia: np.ndarray) -> ManipulatorModel:
    """
    말단에 강체 부하를 붙인 모델을 반환합니다.

    부하의 질량 중심과 관성(질량 중심 기준)은 말단(tool) 프레임에서 주어지며,
    평행축 정리로 마지막 링크에 합쳐집니다.

    Args:
        model (ManipulatorModel): 원래 모델
        mass (float): 부하 질량 [kg], 0 이면 원래 모델을 그대로 반환
        com (Sequence[float]): 말단 프레임 기준 부하 질량 중심 [m]
        inertia (np.ndarray): 말단 프레임 기준 부하 관성 [kg·m²]

    Returns:
        ManipulatorModel: 마지막 링크의 관성 파라미터가 바뀐 모델
    """
    if mass < 0.0:
        raise ValueError("부하 질량은 음수일 수 없습니다")
    if mass == 0.0:
        return model

    last = model.links[-1]
    R_tool = model.tool_rotation
    c_payload = model.tool_xyz + R_tool @ np.asarray(com, dtype=float)
    I_payload = R_tool @ np.asarray(inertia, dtype=float) @ R_tool.T

    total = last.mass + mass
    c = (last.mass * last.com + mass * c_payload) / total

    def shifted(I: np.ndarray, m: float, d: np.ndarray) -> np.ndarray:
        return I + m * (np.dot(d, d) * np.eye(3) - np.outer(d, d))

    I = shifted(last.inertia, last.mass, last.com - c) + shifted(I_payload, mass, c_payload - c)
    merged = replace(last, mass=total, com=c, inertia=0.5 * (I + I.T))
    return replace(model, links=model.links[:-1] + (merged,))


def inverse_kinematics(
    model: ManipulatorModel,
    position: np.ndarray,
    rotation: np.ndarray,
    q_seed: np.ndarray,
    damping: float = 1e-3,
    max_iter: int = 500,
    tol: float = 1e-10
) -> np.ndarray:
    """
    감쇠 최소자승(DLS) 역기구학

    시나리오 초기 자세를 목표 말단 자세에 맞추는 데 사용합니다.

    Raises:
        ConfigValidationError: 최대 반복 안에 수렴하지 못했을 때
    """
    q = _check_q(model, q_seed, "q_seed").copy()
    target_p = np.asarray(position, dtype=float)
    target_R = np.asarray(rotation, dtype=float)
    err = np.full(6, np.inf)
    for _ in range(max_iter):
        frames = forward_kinematics(model, q)
        rot_err = Rotation.from_matrix(target_R @ frames.ee_rotation.T).as_rotvec()
        err = np.concatenate([rot_err, target_p - frames.ee_position])
        if np.linalg.norm(err) < tol:
            return q
        J = _jacobian_from_frames(frames)
        JJt = J @ J.T + damping ** 2 * np.eye(6)
        q = q + J.T @ np.linalg.solve(JJt, err)
    raise ConfigValidationError(
        f"역기구학이 수렴하지 않았습니다 (잔차 {np.linalg.norm(err):.2e})", field="q_seed")


def model_from_dict(data: Dict[str, Any], path: str = "model") -> ManipulatorModel:
    """
    로봇 모델 딕셔너리를 파싱합니다.

    Args:
        data (dict): {"name", "gravity", "links": [...], "tool": {"xyz", "rpy"}}
        path (str): 에러 메시지에 사용할 설정 경로

    Raises:
        ConfigValidationError: 필드가 없거나 값이 잘못되었을 때
    """
    if "links" not in data or not isinstance(data["links"], list):
        raise ConfigValidationError("링크 목록이 필요합니다", field=f"{path}.links")

    links = []
    for i, entry in enumerate(data["links"]):
        where = f"{path}.links[{i}]"
        try:
            links.append(Link(
                name=entry.get("name", f"link{i + 1}"),
                xyz=entry.get("xyz", (0.0, 0.0, 0.0)),
                rpy=entry.get("rpy", (0.0, 0.0, 0.0)),
                axis=entry["axis"],
                mass=float(entry["mass"]),
                com=entry.get("com", (0.0, 0.0, 0.0)),
                inertia=entry["inertia"],
            ))
        except KeyError as e:
            raise ConfigValidationError("필수 항목입니다", field=f"{where}.{e.args[0]}")
        except ValueError as e:
            raise ConfigValidationError(str(e), field=where)
        except ConfigValidationError as e:
            raise ConfigValidationError(e.message, field=f"{where}.{e.field.split('.')[-1]}")

    tool = data.get("tool", {})
    return ManipulatorModel(
        name=data.get("name", "robot"),
        links=tuple(links),
        gravity=data.get("gravity", DEFAULT_GRAVITY),
        tool_xyz=tool.get("xyz", (0.0, 0.0, 0.0)),
        tool_rpy=tool.get("rpy", (0.0, 0.0, 0.0)),
    )


def model_to_dict(model: ManipulatorModel) -> Dict[str, Any]:
    return {
        "name": model.name,
        "gravity": model.gravity.tolist(),
        "links": [
            {
                "name": link.name,
                "xyz": link.xyz.tolist(),
                "rpy": link.rpy.tolist(),
                "axis": link.axis.tolist(),
                "mass": link.mass,
                "com": link.com.tolist(),
                "inertia": link.inertia.tolist(),
            }
            for link in model.links
        ],
        "tool": {"xyz": model.tool_xyz.tolist(), "rpy": model.tool_rpy.tolist()},
    }


def load_model(path: Union[str, Path]) -> ManipulatorModel:
    """JSON 로봇 모델 파일을 읽습니다."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    logger.debug("로봇 모델 로드: %s", path)
    return model_from_dict(data, path=path.stem)
