# Projection API
# 구속 자코비안으로 투영 행렬 만들기
import numpy as np

import fsfpid
from fsfpid.config_api import DATA_DIR
from fsfpid.projection_api import ConstraintJacobian, projection_state

model = fsfpid.load_model(DATA_DIR / "lwr.json")
q = np.array([0.0, 0.70, 0.0, 1.37, 0.0, 1.0715926535897932, 0.0])
qdot = np.zeros(model.dof)

# 테이블 평면 접촉: ω_x, ω_y, v_z 행을 구속
J = fsfpid.jacobian(model, q)
Jc = J[[0, 1, 5]]
P = fsfpid.projector(Jc)
print(P.shape, np.trace(P))
print(np.abs(Jc @ P).max())

# 질량 행렬로 구속 관성까지
M = fsfpid.mass_matrix(model, q)
proj = projection_state(ConstraintJacobian(Jc, np.zeros_like(Jc)), M)
print(proj.Mc.shape)
