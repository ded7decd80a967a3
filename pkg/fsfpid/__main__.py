#
# fsfpid - Projected inverse dynamics control and constrained simulation
#
# Copyright (c) 2025 풀스택패밀리 연구소
#
# Licensed under the Apache License, Version 2.0
# See LICENSE file for the full text of the license.
#

"""
명령행 진입점

    python -m fsfpid run --config fsfpid/data/single_wipe.json --out results/
    python -m fsfpid run --batch fsfpid/data --out results/ --workers 3

종료 코드: 0 모든 검사 통과, 1 검사 실패 또는 시뮬레이션 에러, 2 설정 에러
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from fsfpid.config_api import load_scenario
from fsfpid.errors import ConfigValidationError, SimulationError
from fsfpid.scenario_api import build_scenario, run_and_report, run_batch

logger = logging.getLogger("fsfpid")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fsfpid", description="투영 역동역학 제어 시나리오 실행기")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="시나리오 실행")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="시나리오 JSON 파일")
    source.add_argument("--batch", type=Path, help="시나리오 JSON 파일들이 있는 디렉터리")
    run.add_argument("--out", type=Path, required=True, help="출력 디렉터리")
    run.add_argument("--duration", type=float, help="실행 시간 [s]")
    run.add_argument("--dt", type=float, help="적분 주기 [s]")
    run.add_argument("--seed", type=int, help="noise 외란 시드")
    run.add_argument("--workers", type=int, default=1, help="--batch 동시 실행 수")
    run.add_argument("--verbose", action="store_true", help="DEBUG 로그 출력")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s [fsfpid] %(levelname)s: %(message)s',
    )
    overrides = {"duration": args.duration, "dt": args.dt, "seed": args.seed}

    try:
        if args.batch is not None:
            paths = sorted(args.batch.glob("*.json"))
            paths = [p for p in paths if _is_scenario(p)]
            if not paths:
                raise ConfigValidationError(f"시나리오 파일이 없습니다: {args.batch}", field="batch")
            results = run_batch(paths, args.out, workers=args.workers, **overrides)
            passed = all(m.passed for m in results.values())
        else:
            config = load_scenario(args.config).with_overrides(**overrides)
            passed = run_and_report(build_scenario(config), args.out).passed
    except ConfigValidationError as e:
        logger.error("설정 에러: %s", e)
        return EXIT_CONFIG
    except SimulationError as e:
        logger.error("시뮬레이션 실패: %s", e)
        return EXIT_FAILED

    return EXIT_OK if passed else EXIT_FAILED


def _is_scenario(path: Path) -> bool:
    # 로봇 모델 파일(lwr.json 등)은 같은 디렉터리에 있어도 건너뜀
    try:
        with open(path, "r", encoding="utf-8") as f:
            return "constraint" in json.load(f)
    except (OSError, ValueError):
        return True


if __name__ == "__main__":
    sys.exit(main())
