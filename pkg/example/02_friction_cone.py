# Wrench API
# 선형화 마찰 원뿔과 원뿔 여유
import numpy as np

from fsfpid import FrictionParams, linearize_friction_cone
from fsfpid.wrench_api import cone_margin

params = FrictionParams(mu=0.5, gamma=0.1, delta_x=0.1, delta_y=0.1, min_normal_force=5.0)
A, b = linearize_friction_cone(params, edges=8)
print(A.shape, b.shape)

# 접촉 프레임 렌치 [fx, fy, fz, mx, my, mz]
inside = np.array([1.0, 0.0, 20.0, 0.0, 0.0, 0.0])
slipping = np.array([15.0, 0.0, 20.0, 0.0, 0.0, 0.0])
print(cone_margin(inside, params))
print(cone_margin(slipping, params))
