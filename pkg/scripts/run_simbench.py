"""
Run the simulation benchmark for one or more scenarios and save the tables.

Results go to the configured results directory (~/.coxplasso/results by
default, see ~/.coxplassorc) unless --results-dir is given.

Usage:
    python scripts/run_simbench.py --scenario prop_hier                  # Table for one scenario
    python scripts/run_simbench.py --scenario prop_hier --nz 20          # Larger modifier set
    python scripts/run_simbench.py --all --reps 5                        # Every scenario, quick run
    python scripts/run_simbench.py --scenario tv_hier --engine logistic  # Time-varying, logistic engine
"""

import argparse
import time
from pathlib import Path

from coxplasso.config.user_config import get_configured_results_dir
from coxplasso.models.path import PathConfig
from coxplasso.simbench import SimDesign, available_scenarios, run_comparison, write_table
from coxplasso.utils.logging import get_logger

logger = get_logger(__name__)


def run_scenario(args, scenario: str, results_dir: Path) -> None:
    """Run one scenario and write its text and CSV tables."""
    print("\n" + "=" * 60)
    print(f"Scenario: {scenario}")
    print("=" * 60)

    design = SimDesign.from_scenario(
        scenario, n=args.n, p=args.p, nz=args.nz,
        n_reps=args.reps, n_test=args.n_test, seed=args.seed, engine=args.engine,
    )
    print(f"n={design.n}, p={design.p}, nz={design.nz}, reps={design.n_reps}, alpha={design.alpha}")

    started = time.perf_counter()
    result = run_comparison(design, path_config=PathConfig(seed=args.seed), n_jobs=args.n_jobs)
    elapsed = time.perf_counter() - started

    stem = f"{scenario}_n{design.n}_p{design.p}_nz{design.nz}_seed{args.seed}"
    txt = write_table(result.metrics, results_dir / f"{stem}.txt", result.failures)
    csv = write_table(result.metrics, results_dir / f"{stem}.csv", result.failures)
    result.replicates.to_csv(results_dir / f"{stem}_replicates.csv", index=False)

    print(txt.read_text(encoding='utf-8'))
    print(f"✓ {scenario} finished in {elapsed:.1f}s")
    print(f"  Tables: {txt}, {csv}")


def main():
    parser = argparse.ArgumentParser(description='Run the coxplasso simulation benchmark')
    target = parser.add_mutually_exclusive_group(required=True)
    target.add_argument('--scenario', choices=available_scenarios(), help='Scenario to run')
    target.add_argument('--all', action='store_true', help='Run every bundled scenario')
    parser.add_argument('--n', type=int, default=None, help='Training size (scenario default)')
    parser.add_argument('--p', type=int, default=None, help='Number of covariates (scenario default)')
    parser.add_argument('--nz', type=int, default=None, help='Number of modifiers (scenario default)')
    parser.add_argument('--reps', type=int, default=20, help='Replicates (default: 20)')
    parser.add_argument('--n-test', type=int, default=1000, help='Test size (default: 1000)')
    parser.add_argument('--seed', type=int, default=0, help='Root seed (default: 0)')
    parser.add_argument('--engine', choices=['exact', 'logistic'], default='exact')
    parser.add_argument('--n-jobs', type=int, default=None, help='Replicate threads (settings default)')
    parser.add_argument('--results-dir', default=None, help='Output directory')

    args = parser.parse_args()

    results_dir = Path(args.results_dir).expanduser() if args.results_dir else get_configured_results_dir()
    results_dir.mkdir(parents=True, exist_ok=True)

    scenarios = available_scenarios() if args.all else [args.scenario]
    for scenario in scenarios:
        run_scenario(args, scenario, results_dir)

    print("\n" + "=" * 60)
    print("✓ Benchmark Complete!")
    print("=" * 60)


if __name__ == "__main__":
    main()
