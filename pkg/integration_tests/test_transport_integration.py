"""
Smoke-scale integration run of every experiment.

Each experiment is run on a reduced scenario, its tables are written to a scratch
directory and the failed checks are printed. Exit code is that of ``tsl all``.

Usage:
    $ poetry run python integration_tests/test_transport_integration.py
    $ poetry run python integration_tests/test_transport_integration.py --keep out_dir
"""

import argparse
import sys
import tempfile
import time
from pathlib import Path
from typing import Dict, List, Optional

from transport_selection.harness import EXPERIMENTS, emit_outcome, load_config, write_failures
from transport_selection.harness.config import ScenarioConfig

SMOKE = [
    "scenario = smoke",
    "lambdas = 0, 1",
    "q_list = 1, 2",
    "k_ladder = 4, 8, 16",
    "lp_lambdas = 2, 3, 4",
    "depth = 4",
    "fv_levels = 4, 5",
    "residual_resolution = 6",
    "mc_samples = 4000",
    "corollary_points = 16",
    "quadrature_cells = 24",
    "flow_step = 0.005",
]


class TransportIntegrationTester:
    """
    Runs the experiments one by one and keeps a summary per experiment.
    """

    def __init__(self, out_dir: Path, overrides: Optional[List[str]] = None):
        self.out_dir = out_dir
        self.cfg: ScenarioConfig = load_config(overrides=SMOKE + list(overrides or []))
        self.summary: Dict[str, Dict[str, object]] = {}

        print("=" * 60)
        print("🔧 Transport-Selection Integration Test")
        print("=" * 60)
        print(f"Output directory: {self.out_dir}")
        for key, value in self.cfg.manifest():
            print(f"  {key} = {value}")
        print("=" * 60)

    def run_experiment(self, name: str) -> bool:
        print(f"\n🔬 {name}")
        start = time.perf_counter()
        outcome = EXPERIMENTS[name](self.cfg)
        paths = emit_outcome(outcome, self.out_dir, svg=self.cfg.svg)
        elapsed = time.perf_counter() - start

        for table, frame in outcome.tables.items():
            print(f"  📊 {table}: {len(frame)} rows")
        print(f"  📁 {len(paths)} files written")
        for check, detail in outcome.failures:
            print(f"  ❌ {check}: {detail}")
        mark = "✅" if outcome.passed else "❌"
        print(f"  {mark} {len(outcome.failures)} failed checks ({elapsed:.1f} s)")

        self.summary[name] = dict(passed=outcome.passed, failures=outcome.failures,
                                  seconds=elapsed)
        return outcome.passed

    def run_all(self) -> bool:
        for name in EXPERIMENTS:
            self.run_experiment(name)
        failures = [(f"{name}:{check}", detail)
                    for name, row in self.summary.items() for check, detail in row["failures"]]
        if failures:
            path = write_failures(failures, self.out_dir)
            print(f"\n📝 Failure manifest: {path}")
        return not failures


def main() -> int:
    """Main test function"""
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--keep", type=Path, default=None, help="write artifacts here")
    parser.add_argument("--flag", action="append", default=[], help="extra key=value override")
    args = parser.parse_args()

    print("\n" + "=" * 60)
    print("🧪 Transport-Selection Integration Test Suite")
    print("=" * 60)

    with tempfile.TemporaryDirectory() as scratch:
        out_dir = args.keep or Path(scratch)
        tester = TransportIntegrationTester(out_dir, args.flag)
        passed = tester.run_all()

    print("\n" + "=" * 60)
    total = sum(row["seconds"] for row in tester.summary.values())
    if passed:
        print(f"🎉 All experiments passed in {total:.1f} s")
    else:
        failed = [name for name, row in tester.summary.items() if not row["passed"]]
        print(f"❌ Failed experiments: {', '.join(failed)}")
    print("=" * 60)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
