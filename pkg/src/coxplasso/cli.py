"""
Command-line interface for coxplasso.

Usage:
    coxplasso fit --data d.csv --lambda 0.05 --out model.json
    coxplasso path --data d.csv --alpha 0.5 --nlambda 50
    coxplasso cv --data d.csv --alpha 0.5 --nfolds 5 --seed 1 --model-out best.json
    coxplasso cv --data d.csv --time-basis spline:5 --risk-sample 5 --engine logistic
    coxplasso simbench --scenario prop_hier --n 100 --p 10 --nz 4 --reps 20 --seed 7 --out table.csv
    coxplasso predict --model model.json --data new.csv --times 0.5

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .client import PlassoClient
from .config import get_settings
from .data.schema import json_safe
from .models.path import RULE_1SE, RULE_MIN, PathConfig
from .simbench import SimDesign, available_scenarios, emit_table, run_comparison
from .simbench.tables import FORMAT_CSV, FORMAT_TEXT
from .utils.logging import configure_logging, get_logger, set_log_level

logger = get_logger(__name__)


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='coxplasso',
        description='Pliable lasso for the Cox model: fit, path, cross-validation, simulation, prediction',
    )
    parser.add_argument('--version', action='version', version=f'coxplasso {__version__}')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--quiet', action='store_true', help='Only log errors')
    verbosity.add_argument('--verbose', action='store_true', help='Log debug output')

    sub = parser.add_subparsers(dest='command', required=True)

    def model_options(p):
        p.add_argument('--data', required=True, help='Survival CSV (time, status, [weight], x_*, z_*)')
        p.add_argument('--engine', choices=['exact', 'logistic'], default='exact')
        p.add_argument('--alpha', type=float, default=None,
                       help='Mixing parameter (default 0.5, or 0 with --time-basis)')
        p.add_argument('--time-basis', '--basis', dest='basis', default=None,
                       help="Time basis: 'linear' or 'spline:<k>'")
        p.add_argument('--risk-sample', '--sample', dest='sample', default=None,
                       help="Risk-set sample size per failure time, or 'all'")
        p.add_argument('--seed', type=int, default=0)
        p.add_argument('--exclude-constant', action='store_true', help='Drop constant columns instead of failing')
        p.add_argument('--out', default=None, help='Output file (stdout when omitted)')

    def grid_options(p):
        grid = p.add_mutually_exclusive_group()
        grid.add_argument('--nlambda', type=int, default=None)
        grid.add_argument('--lambdas', type=_float_list, default=None, help='Explicit decreasing grid, comma-separated')
        p.add_argument('--lambda-min-ratio', type=float, default=None)

    fit_p = sub.add_parser('fit', help='Fit at one lambda')
    model_options(fit_p)
    fit_p.add_argument('--lambda', dest='lam', type=float, required=True)

    path_p = sub.add_parser('path', help='Fit a warm-started lambda path')
    model_options(path_p)
    grid_options(path_p)

    cv_p = sub.add_parser('cv', help='Path plus goodness-of-fit cross-validation')
    model_options(cv_p)
    grid_options(cv_p)
    cv_p.add_argument('--nfolds', type=int, default=None)
    cv_p.add_argument('--rule', choices=[RULE_MIN, RULE_1SE], default=None)
    cv_p.add_argument('--model-out', default=None, help='Also save the selected model document here')

    sim_p = sub.add_parser('simbench', help='Simulation benchmark')
    sim_p.add_argument('--scenario', required=True, choices=available_scenarios())
    sim_p.add_argument('--n', type=int, default=None)
    sim_p.add_argument('--p', type=int, default=None)
    sim_p.add_argument('--nz', type=int, default=None)
    sim_p.add_argument('--reps', type=int, default=20)
    sim_p.add_argument('--n-test', type=int, default=1000)
    sim_p.add_argument('--seed', type=int, default=0)
    sim_p.add_argument('--engine', choices=['exact', 'logistic'], default='exact')
    sim_p.add_argument('--covariate-law', choices=['normal', 'uniform'], default=None,
                       help='Covariate distribution (scenario default when omitted)')
    sim_p.add_argument('--nlambda', type=int, default=None)
    sim_p.add_argument('--nfolds', type=int, default=None)
    sim_p.add_argument('--format', choices=[FORMAT_TEXT, FORMAT_CSV], default=None,
                       help='Table format (from the --out suffix when omitted, else txt)')
    sim_p.add_argument('--out', default=None, help='Output file (stdout when omitted)')

    pred_p = sub.add_parser('predict', help='Risk scores from a saved model')
    pred_p.add_argument('--model', required=True, help='Model document (JSON)')
    pred_p.add_argument('--data', required=True, help='CSV with the model columns')
    pred_p.add_argument('--times', type=_float_list, default=None,
                        help='Evaluation time(s) for time-varying models: one value or one per row')
    pred_p.add_argument('--out', default=None, help='Output CSV (stdout when omitted)')

    return parser


def manifest(args: argparse.Namespace) -> Dict[str, Any]:
    """Reproducibility record: version, command and every option."""
    options = {k: v for k, v in sorted(vars(args).items()) if k not in ('quiet', 'verbose')}
    return {'coxplasso_version': __version__, 'command': args.command, 'options': options}


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    logger.info(f"Wrote {path}")


def _write_json(document: Dict[str, Any], out: Optional[str]) -> None:
    _write(json.dumps(json_safe(document), indent=2, sort_keys=True) + "\n", out)


def _write_manifest(args: argparse.Namespace, out: Optional[str]) -> None:
    """Sidecar manifest for table outputs; stderr when writing to stdout."""
    text = json.dumps(json_safe(manifest(args)), indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stderr.write(text)
    else:
        _write(text, f"{out}.manifest.json")


def _client(args: argparse.Namespace) -> PlassoClient:
    return PlassoClient(
        alpha=args.alpha,
        engine=args.engine,
        basis=args.basis,
        sample=args.sample,
        seed=args.seed,
        exclude_constant=args.exclude_constant,
    )


def _path_config(args: argparse.Namespace) -> PathConfig:
    params: Dict[str, Any] = {'seed': args.seed}
    for name in ('nlambda', 'lambda_min_ratio', 'lambdas', 'nfolds', 'rule'):
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value
    return PathConfig(**params)


def cmd_fit(args: argparse.Namespace) -> None:
    client = _client(args)
    fitted = client.fit(client.load_data(args.data), args.lam)
    document = fitted.to_dict()
    document['manifest'] = manifest(args)
    _write_json(document, args.out)


def cmd_path(args: argparse.Namespace) -> None:
    client = _client(args)
    result = client.path(client.load_data(args.data), _path_config(args))
    _write_json({'manifest': manifest(args), 'path': result.to_dict()}, args.out)


def cmd_cv(args: argparse.Namespace) -> None:
    client = _client(args)
    result, fitted = client.cv(client.load_data(args.data), _path_config(args))
    document = {
        'manifest': manifest(args),
        'path': result.to_dict(),
        'model': None if fitted is None else fitted.to_dict(),
    }
    _write_json(document, args.out)
    if args.model_out and fitted is not None:
        fitted.save(args.model_out)


def cmd_simbench(args: argparse.Namespace) -> None:
    design = SimDesign.from_scenario(
        args.scenario, n=args.n, p=args.p, nz=args.nz,
        n_reps=args.reps, n_test=args.n_test, seed=args.seed, engine=args.engine,
        covariate_law=args.covariate_law,
    )
    params: Dict[str, Any] = {'seed': args.seed}
    if args.nlambda is not None:
        params['nlambda'] = args.nlambda
    if args.nfolds is not None:
        params['nfolds'] = args.nfolds
    result = run_comparison(design, path_config=PathConfig(**params))

    fmt = args.format
    if fmt is None:
        fmt = FORMAT_CSV if args.out and args.out.lower().endswith('.csv') else FORMAT_TEXT
    _write(emit_table(result.metrics, fmt, result.failures), args.out)
    _write_manifest(args, args.out)


def cmd_predict(args: argparse.Namespace) -> None:
    times = args.times
    if times is not None and len(times) == 1:
        times = times[0]
    scores = PlassoClient().predict(args.model, args.data, times)
    _write(scores.to_csv(index=False, float_format='%.17g', lineterminator='\n'), args.out)
    _write_manifest(args, args.out)


COMMANDS = {
    'fit': cmd_fit,
    'path': cmd_path,
    'cv': cmd_cv,
    'simbench': cmd_simbench,
    'predict': cmd_predict,
}


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI.

    Args:
        argv: Arguments without the program name (sys.argv[1:] when None)

    Returns:
        Exit code: 0 success, 1 runtime error, 2 usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(get_settings().logging)
    if args.quiet:
        set_log_level('ERROR')
    elif args.verbose:
        set_log_level('DEBUG')

    try:
        COMMANDS[args.command](args)
    except Exception as e:
        logger.debug("Command failed", exc_info=True)
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == '__main__':
    main()
