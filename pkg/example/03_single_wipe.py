# Scenario API
# 단일 팔 테이블 닦기 시나리오 실행
from fsfpid import build_scenario, load_scenario, run_and_report
from fsfpid.config_api import DATA_DIR

config = load_scenario(DATA_DIR / "single_wipe.json").with_overrides(duration=2.0)
metrics = run_and_report(build_scenario(config), "results/single_wipe")

print(metrics.tracking_rms_position)
print(metrics.force_discrepancy)
print(metrics.passed)
