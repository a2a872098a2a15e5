"""
Command-line surface of the bias audit toolkit.

    python cli.py [--config run.yaml] <command> [flags]

Flags override the config file section of the same command, which overrides
BIAS_* environment defaults. Exit codes: 0 success, 2 usage error, 3 data
error, 4 infeasible configuration.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from pydantic import ValidationError

from models.dataset import Dataset
from schemas.dataset import SplitSpec, StratifyOn
from schemas.learner import LearnerSpec
from schemas.repair import AMOUNT_GRID, RepairSpec
from schemas.synth import DEFAULT_SIGMAS, IncidenceMode, SynthConfig
from services import experiment_service, ingest_service, report_service
from services.augment_service import DEFAULT_K_NEIGHBORS, parse_strategy, repair_dataset
from services.dataset_service import split
from services.exceptions import EXIT_INFEASIBLE, BiasToolkitError
from services.learner_service import default_cv_grid, fit, parse_kind, tune_balanced_accuracy
from services.metrics_service import audit
from services.sampling import child_seed
from services.synth_service import generate
from services.tune_service import evaluate_amounts, select_amount
from settings import configure_logging, get_settings, load_config_file

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_USAGE = 2

# Flags each command needs, from the command line or the config file.
# Every stochastic command needs --seed; there is no clock-based default.
REQUIRED = {
    "gen": ("seed", "out"),
    "audit": ("seed", "data"),
    "sweep-noise": ("seed", "out_dir"),
    "sweep-reg": ("seed", "out_dir"),
    "sweep-imbalance": ("seed", "out_dir"),
    "sweep-doubling": ("seed", "strategy", "out_dir"),
    "repair": ("seed", "data", "strategy", "out"),
    "tune": ("seed", "data", "strategy"),
    "compare": ("seed", "out_dir"),
}


# ==== ARGUMENT TYPES ====


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from None


def _name_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return value


# ==== PARSER ====


def _add_common(p: argparse.ArgumentParser, learner: Optional[str] = "logreg") -> None:
    p.add_argument("--seed", type=_seed, default=None, help="master seed (required)")
    if learner is not None:
        p.add_argument("--learner", default=learner, help="logreg | gaussian_nb | knn | decision_tree | neural_net")


def _add_synthetic(p: argparse.ArgumentParser, class_rate: float = 0.3, minority_share: float = 0.3) -> None:
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--class-rate", type=float, default=class_rate)
    p.add_argument("--minority-share", type=float, default=minority_share)
    p.add_argument("--p-minority", type=float, default=0.5)
    p.add_argument("--sat-noise-sd", type=float, default=100.0)
    p.add_argument("--incidence-mode", choices=[m.value for m in IncidenceMode], default=IncidenceMode.minority_share.value)


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="bias-audit", description="Audit and repair underestimation bias")
    parser.add_argument("--config", default=None, help="YAML file with one section per command")
    parser.add_argument("--log-level", default=None)
    parser.add_argument("--n-jobs", type=int, default=settings.n_jobs)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("gen", help="write a synthetic dataset CSV")
    _add_common(p, learner=None)
    _add_synthetic(p)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_gen)

    p = commands.add_parser("audit", help="fit a learner and audit it on a held-out split")
    _add_common(p)
    p.add_argument("--data", default=None)
    p.add_argument("--schema", default=None, help="preset name or YAML file; inferred when omitted")
    p.add_argument("--reg", type=float, default=None, help="fix the regularization knob instead of CV-tuning it")
    p.add_argument("--cv-folds", type=int, default=settings.cv_folds)
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--exclude-sensitive", action="store_true", help="train without S as an input")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_audit)

    p = commands.add_parser("sweep-noise", help="irreducible-error sweep")
    _add_common(p)
    _add_synthetic(p)
    p.add_argument("--sigmas", type=_float_list, default=list(DEFAULT_SIGMAS))
    p.add_argument("--repeats", type=int, default=settings.repeats)
    p.add_argument("--cv-folds", type=int, default=settings.cv_folds)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(handler=cmd_sweep_noise)

    p = commands.add_parser("sweep-reg", help="regularization sweep with the knob held fixed")
    _add_common(p)
    _add_synthetic(
        p,
        class_rate=experiment_service.REGULARIZATION_BASE.class_rate,
        minority_share=experiment_service.REGULARIZATION_BASE.minority_share,
    )
    p.add_argument("--reg-grid", type=_float_list, default=None)
    p.add_argument("--repeats", type=int, default=settings.repeats)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(handler=cmd_sweep_reg)

    p = commands.add_parser("sweep-imbalance", help="class x feature imbalance heatmap")
    _add_common(p)
    p.add_argument("--class-rates", type=_float_list, default=list(experiment_service.DEFAULT_CLASS_RATES))
    p.add_argument("--minority-shares", type=_float_list, default=list(experiment_service.DEFAULT_MINORITY_SHARES))
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--incidence-mode", choices=[m.value for m in IncidenceMode], default=IncidenceMode.minority_share.value)
    p.add_argument("--repeats", type=int, default=settings.repeats)
    p.add_argument("--cv-folds", type=int, default=settings.cv_folds)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(handler=cmd_sweep_imbalance)

    p = commands.add_parser("sweep-doubling", help="untuned counterfactual repair over the imbalance grid")
    _add_common(p, learner="neural_net")
    p.add_argument("--strategy", choices=["cf_f", "cf_l"], default=None)
    p.add_argument("--class-rates", type=_float_list, default=list(experiment_service.DEFAULT_CLASS_RATES))
    p.add_argument("--minority-shares", type=_float_list, default=list(experiment_service.DEFAULT_MINORITY_SHARES))
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--incidence-mode", choices=[m.value for m in IncidenceMode], default=IncidenceMode.minority_share.value)
    p.add_argument("--repeats", type=int, default=settings.repeats)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(handler=cmd_sweep_doubling)

    p = commands.add_parser("repair", help="write an augmented copy of a dataset")
    _add_common(p, learner=None)
    p.add_argument("--data", default=None)
    p.add_argument("--schema", default=None)
    p.add_argument("--strategy", choices=["smote_f", "cf_f", "cf_l"], default=None)
    p.add_argument("--amount", type=float, default=1.0)
    p.add_argument("--k-neighbors", type=int, default=DEFAULT_K_NEIGHBORS)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_repair)

    p = commands.add_parser("tune", help="pick the augmentation amount by cross-validation")
    _add_common(p)
    p.add_argument("--data", default=None)
    p.add_argument("--schema", default=None)
    p.add_argument("--strategy", choices=["smote_f", "cf_f", "cf_l"], default=None)
    p.add_argument("--folds", type=int, default=settings.tune_folds)
    p.add_argument("--amounts", type=_float_list, default=list(AMOUNT_GRID))
    p.add_argument("--out", default=None, help="optional CSV of every candidate's score")
    p.set_defaults(handler=cmd_tune)

    p = commands.add_parser("compare", help="tuned repair strategies against each other")
    _add_common(p, learner="neural_net")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--data", default=None)
    source.add_argument("--synthetic", action="store_true")
    p.add_argument("--schema", default=None)
    _add_synthetic(p, class_rate=0.20, minority_share=0.45)
    p.add_argument("--strategies", type=_name_list, default=["no_repair", "smote_f", "cf_f", "cf_l"])
    p.add_argument("--repeats", type=int, default=settings.repeats)
    p.add_argument("--tune-folds", type=int, default=settings.tune_folds)
    p.add_argument("--amounts", type=_float_list, default=list(AMOUNT_GRID))
    p.add_argument("--out-dir", default=None)
    p.set_defaults(handler=cmd_compare)

    p = commands.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(handler=cmd_serve)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    """Install the config file section of the chosen command as parser defaults"""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, rest = pre.parse_known_args(argv)
    if known.config is None:
        return
    sections = load_config_file(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for name, sub in subparsers.choices.items():
        if name in sections:
            sub.set_defaults(**sections[name])


# ==== HELPERS ====


def _learner(args: argparse.Namespace, reg: Optional[float] = None) -> LearnerSpec:
    return LearnerSpec.default(parse_kind(args.learner), reg)


def _synth_config(args: argparse.Namespace, seed: int = 0) -> SynthConfig:
    return SynthConfig(
        n=args.n,
        class_rate=args.class_rate,
        minority_share=args.minority_share,
        p_minority=args.p_minority,
        sat_noise_sd=args.sat_noise_sd,
        incidence_mode=IncidenceMode(args.incidence_mode),
        seed=seed,
    )


def _load(args: argparse.Namespace) -> Dataset:
    schema = ingest_service.resolve_schema(args.schema, args.data)
    return ingest_service.load_csv(args.data, schema)


def _write_sweep(result, out_dir: str, stem: str, plot: Callable[..., None]) -> None:
    out = Path(out_dir)
    report_service.write_sweep_csv(result, out / f"{stem}.csv")
    for metric in ("us_s", "balanced_accuracy"):
        plot(result, metric, out / f"{stem}_{metric}.svg")
    for cell in result.cells:
        m = cell.medians
        print(f"{cell.coords}  US_S={m.us_s}  DI_S={m.di_s}  BA={m.balanced_accuracy}  defined={m.n_defined}")


# ==== COMMANDS ====


def cmd_gen(args: argparse.Namespace) -> int:
    d = generate(_synth_config(args, seed=args.seed))
    ingest_service.write_dataset_csv(d, args.out)
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    d = _load(args)
    train, test = split(d, SplitSpec(
        train_fraction=args.train_fraction,
        seed=child_seed(args.seed, 0),
        stratify_on=StratifyOn.class_and_group,
    ))
    include_sensitive = not args.exclude_sensitive
    if args.reg is not None:
        spec = _learner(args, args.reg)
    else:
        spec = tune_balanced_accuracy(
            default_cv_grid(_learner(args)), train, args.cv_folds, child_seed(args.seed, 1), include_sensitive,
        )
    model = fit(spec, train, include_sensitive, seed=child_seed(args.seed, 2))
    report = audit(model, test)
    print(f"{spec.label()}: US_S={report.us_s} DI_S={report.di_s} balanced_accuracy={report.balanced_accuracy}")
    if args.out:
        report_service.write_audit_csv(report, args.out)
    return EXIT_OK


def cmd_sweep_noise(args: argparse.Namespace) -> int:
    result = experiment_service.sweep_noise(
        _learner(args), _synth_config(args), sigmas=args.sigmas, repeats=args.repeats,
        seed=args.seed, cv_folds=args.cv_folds, n_jobs=args.n_jobs,
    )
    _write_sweep(result, args.out_dir, "noise", report_service.render_curve)
    return EXIT_OK


def cmd_sweep_reg(args: argparse.Namespace) -> int:
    result = experiment_service.sweep_regularization(
        _learner(args), _synth_config(args), reg_grid=args.reg_grid, repeats=args.repeats,
        seed=args.seed, n_jobs=args.n_jobs,
    )
    _write_sweep(result, args.out_dir, "reg", report_service.render_curve)
    return EXIT_OK


def cmd_sweep_imbalance(args: argparse.Namespace) -> int:
    base = SynthConfig(n=args.n, incidence_mode=IncidenceMode(args.incidence_mode))
    result = experiment_service.sweep_imbalance(
        _learner(args), class_rates=args.class_rates, minority_shares=args.minority_shares,
        repeats=args.repeats, seed=args.seed, base=base, cv_folds=args.cv_folds, n_jobs=args.n_jobs,
    )
    _write_sweep(result, args.out_dir, "imbalance", report_service.render_heatmap)
    infeasible = [c.coords for c in result.cells if c.infeasible]
    if infeasible:
        logger.error(f"{len(infeasible)} infeasible cells: {infeasible}")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep_doubling(args: argparse.Namespace) -> int:
    base = SynthConfig(n=args.n, incidence_mode=IncidenceMode(args.incidence_mode))
    result = experiment_service.sweep_doubling(
        _learner(args), parse_strategy(args.strategy), class_rates=args.class_rates,
        minority_shares=args.minority_shares, repeats=args.repeats, seed=args.seed, base=base, n_jobs=args.n_jobs,
    )
    _write_sweep(result, args.out_dir, f"doubling_{args.strategy}", report_service.render_heatmap)
    infeasible = [c.coords for c in result.cells if c.infeasible]
    if infeasible:
        logger.error(f"{len(infeasible)} infeasible cells: {infeasible}")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_repair(args: argparse.Namespace) -> int:
    d = _load(args)
    spec = RepairSpec(strategy=parse_strategy(args.strategy), amount=args.amount, seed=args.seed)
    repaired = repair_dataset(d, spec, args.k_neighbors)
    print(f"{spec.strategy.value}: {d.n} -> {repaired.n} rows")
    ingest_service.write_dataset_csv(repaired, args.out)
    return EXIT_OK


def cmd_tune(args: argparse.Namespace) -> int:
    d = _load(args)
    strategy = parse_strategy(args.strategy)
    scores = evaluate_amounts(
        d, strategy, _learner(args), k=args.folds, seed=args.seed, amounts=args.amounts, n_jobs=args.n_jobs,
    )
    best = select_amount(scores) if len(scores) > 1 else scores[0]
    if args.out:
        report_service.write_amount_scores_csv(scores, args.out)
    print(repr(best.amount))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    strategies = [parse_strategy(s) for s in args.strategies]
    if args.data is not None:
        result = experiment_service.compare_remediation(
            _learner(args), strategies, repeats=args.repeats, seed=args.seed, data=_load(args),
            tune_folds=args.tune_folds, amounts=args.amounts, n_jobs=args.n_jobs,
        )
    else:
        result = experiment_service.compare_remediation(
            _learner(args), strategies, repeats=args.repeats, seed=args.seed, base=_synth_config(args),
            tune_folds=args.tune_folds, amounts=args.amounts, n_jobs=args.n_jobs,
        )
    out = Path(args.out_dir)
    report_service.write_sweep_csv(result, out / "compare.csv")
    for cell in result.cells:
        m = cell.medians
        print(f"{cell.coords['strategy']:>10}  US_S={m.us_s}  DI_S={m.di_s}  BA={m.balanced_accuracy}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("main:app", host=args.host, port=args.port, log_level=get_settings().log_level.lower())
    return EXIT_OK


# ==== ENTRY POINT ====


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))   # exits with 2
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    missing = [name for name in REQUIRED.get(args.command, ()) if getattr(args, name, None) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        parser.error(f"{args.command}: missing required {flags}")

    try:
        return args.handler(args)
    except BiasToolkitError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return exc.exit_code
    except (ValidationError, ValueError) as exc:
        logger.error(f"usage error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
