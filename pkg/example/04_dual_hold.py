# Scenario API
# 양팔 상자 유지, 추가 질량에 따른 최소 법선력
import pandas as pd

from fsfpid import build_scenario, load_scenario, run_and_report
from fsfpid.config_api import DATA_DIR

config = load_scenario(DATA_DIR / "dual_hold.json")
metrics = run_and_report(build_scenario(config), "results/dual_hold")
print(metrics.min_normal_force, metrics.max_normal_force)

trace = pd.read_csv("results/dual_hold/trace.csv")
normal = trace.filter(regex=r"^true_c\d+_fz$").min(axis=1)
print(normal.groupby(trace["added_mass"]).mean())
