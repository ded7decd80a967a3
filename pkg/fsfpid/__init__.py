#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
fsfpid - Projected Inverse Dynamics Library

구속된 매니퓰레이터(평면 접촉 단일 팔, 물체를 파지한 다중 팔)를 위한
투영 역동역학 임피던스 제어, 마찰 제약 접촉 렌치 QP, 구속 강체 시뮬레이션
라이브러리입니다.
"""

__version__ = "1.0.0"
__author__ = "풀스택패밀리 연구소"

from .dynamics_api import (
    ManipulatorModel,
    forward_kinematics,
    jacobian,
    mass_matrix,
    bias_forces,
    inverse_dynamics,
    load_model,
)

from .projection_api import ConstraintJacobian, projector, projector_dot, projection_state

from .grasp_api import grasp_map, multiarm_constraint_jacobian

from .impedance_api import ImpedanceGains, control_force

from .wrench_api import ActiveSetQP, FrictionParams, build_wrench_qp, linearize_friction_cone

from .control_api import ProjectedImpedanceController, SurfaceContact, GraspContact

from .simulation_api import Simulator, IntegratorConfig, DisturbanceProfile

from .config_api import ScenarioConfig, load_scenario, dump_scenario

from .scenario_api import build_scenario, run_and_report, run_batch

__all__ = [
    # 동역학
    "ManipulatorModel",
    "forward_kinematics",
    "jacobian",
    "mass_matrix",
    "bias_forces",
    "inverse_dynamics",
    "load_model",
    # 투영
    "ConstraintJacobian",
    "projector",
    "projector_dot",
    "projection_state",
    # 파지
    "grasp_map",
    "multiarm_constraint_jacobian",
    # 임피던스 제어
    "ImpedanceGains",
    "control_force",
    # 접촉 렌치 QP
    "ActiveSetQP",
    "FrictionParams",
    "build_wrench_qp",
    "linearize_friction_cone",
    # 제어기
    "ProjectedImpedanceController",
    "SurfaceContact",
    "GraspContact",
    # 시뮬레이션
    "Simulator",
    "IntegratorConfig",
    "DisturbanceProfile",
    # 시나리오
    "ScenarioConfig",
    "load_scenario",
    "dump_scenario",
    "build_scenario",
    "run_and_report",
    "run_batch",
]
