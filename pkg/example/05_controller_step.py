# Control API
# 제어기 한 주기와 시뮬레이터 한 주기
import numpy as np

from fsfpid import build_scenario, load_scenario
from fsfpid.config_api import DATA_DIR

run = build_scenario(load_scenario(DATA_DIR / "dual_circle.json"))
state = run.initial_state

out = run.controller.compute(state.q, state.qdot, state.time)
print(out.tau_motion)
print(out.tau_constraint)
print(out.expected_local)

next_state, rec = run.simulator.step(state, out.tau)
print(np.abs(rec.wrench_local - out.expected_local).max())
print(next_state.drift)
