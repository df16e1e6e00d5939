"""``respclass`` command-line interface.

Subcommands: ``simulate``, ``train``, ``evaluate``, ``benchmark`` and
``bootstrap``.  Every command writes a ``<output>.cfg`` file echoing its fully
resolved settings as ``key=value`` lines.

Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .bootstrap import bootstrap_ci
from .core import DataError, NumericError, read_dataset, read_ground_truth, write_dataset, \
    write_ground_truth, write_rows
from .evaluation import accuracy_vs_bayes, estimate_losses, policy_value
from .experiments import (DESK_PRESET, ExperimentSpec, run_experiment, summarize, write_aggregate,
                          write_replications)
from .learners import LEARNERS, fit_learner
from .learners.mlp import TrainConfig
from .learners.serialize import load_model, save_model
from .surrogate import balanced_theta
from .synthetic import ScenarioSpec, generate

log = logging.getLogger("respclass")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class ConfigError(ValueError):
    """Invalid flags or configuration file."""


# ---------------------------------------------------------------------------
# key=value configuration files

def parse_config(text: str) -> Dict[str, List[str]]:
    """Flat ``key=value`` lines; repeated keys accumulate into lists, ``#`` starts a comment."""
    out: Dict[str, List[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        out.setdefault(key, []).append(value)
    return out


def format_config(items) -> str:
    lines = []
    for key, value in items:
        for v in value if isinstance(value, (list, tuple)) else [value]:
            lines.append(f"{key}={v}")
    return "\n".join(lines) + "\n"


def write_echo(output, items) -> Path:
    path = Path(str(output) + ".cfg")
    path.write_text(format_config(items), encoding="utf-8")
    return path


def _theta_arg(raw: str):
    if raw == "balanced":
        return raw
    try:
        v = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"theta must be a number in [0, 1] or 'balanced', got {raw!r}")
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"theta must lie in [0, 1], got {raw}")
    return v


def _resolve_theta(mode, ds) -> float:
    return balanced_theta(ds) if mode == "balanced" else float(mode)


def _read(args):
    return read_dataset(args.data, binary01=args.binary_01, propensity=args.propensity)


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    try:
        spec = ScenarioSpec(args.scenario, args.d, args.n, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ds, gt = generate(spec)
    out = Path(args.out)
    truth = Path(args.truth) if args.truth else out.with_name(out.stem + "_truth.csv")
    write_dataset(ds, out)
    write_ground_truth(gt, truth)
    write_echo(out, [("command", "simulate"), ("scenario", spec.kind.value), ("d", spec.d),
                     ("n", spec.n), ("seed", spec.seed), ("out", out), ("truth", truth)])
    log.info("wrote %d rows to %s and %s", spec.n, out, truth)
    return EXIT_OK


def _learner_name(args) -> str:
    name = args.learner.lower()
    if name == "respsvm":
        name = f"respsvm-{args.kernel}"
    elif args.kernel is not None and not name.startswith("respsvm"):
        raise ConfigError("--kernel applies only to respsvm learners")
    if name not in LEARNERS:
        raise ConfigError(f"unknown learner {args.learner!r}; choose from respsvm, {', '.join(LEARNERS)}")
    return name


def _train_config(args) -> TrainConfig:
    try:
        return TrainConfig(epochs=args.epochs, lr=args.lr, batch_size=args.batch_size or None,
                           seed=args.seed, lam=args.lam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_train(args) -> int:
    name = _learner_name(args)
    cfg = _train_config(args)
    if args.cv < 0 or args.cv == 1:
        raise ConfigError("--cv must be 0 (no CV) or at least 2")
    ds = _read(args)
    theta = _resolve_theta(args.theta, ds)
    res = fit_learner(name, ds, theta, cv=args.cv, C=args.C, gamma=args.gamma, cfg=cfg, seed=args.seed)
    out = Path(args.out)
    save_model(res.classifier, out)
    logfile = Path(args.log) if args.log else Path(str(out) + ".log")
    lines = [f"learner {name}", f"n {ds.n}", f"d {ds.d}",
             f"theta {theta!r}" + (" (balanced)" if args.theta == "balanced" else "")]
    for k, v in sorted(res.params.items()):
        lines.append(f"{k} {v!r}")
    if res.cv is not None:
        lines += [f"cv {args.cv}-fold, score L'_theta", res.cv.format_table()]
    if res.train_loss is not None:
        lines.append(f"final training loss {res.train_loss!r}")
    logfile.write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_echo(out, [("command", "train"), ("data", args.data), ("learner", name),
                     ("theta", repr(theta)), ("theta_mode", "balanced" if args.theta == "balanced" else "fixed"),
                     ("cv", args.cv), ("C", res.params.get("C", "")),
                     ("gamma", res.params.get("gamma", "")), ("epochs", cfg.epochs),
                     ("lr", cfg.lr), ("batch_size", cfg.batch_size or 0), ("lam", cfg.lam),
                     ("seed", args.seed), ("out", out), ("log", logfile)])
    for line in lines:
        log.info("%s", line)
    return EXIT_OK


def _scenario_for(args, d: int) -> Optional[ScenarioSpec]:
    """Scenario for Bayes labels: explicit flags, else the simulate echo beside the data."""
    if args.scenario:
        return ScenarioSpec(args.scenario, args.d or d)
    for base in (args.data, args.ground_truth):
        echo = Path(str(base) + ".cfg")
        if echo.exists():
            cfg = parse_config(echo.read_text(encoding="utf-8"))
            if "scenario" in cfg and "d" in cfg:
                return ScenarioSpec(cfg["scenario"][-1], int(cfg["d"][-1]))
    return None


def cmd_evaluate(args) -> int:
    clf = load_model(args.model)
    ds = _read(args)
    if clf.d != ds.d:
        raise DataError(f"model expects {clf.d} features but the dataset has {ds.d}")
    theta = _resolve_theta(args.theta, ds)
    rep = estimate_losses(clf, ds, theta)
    row = rep.as_row()
    row["policy_value"] = policy_value(clf, ds, theta)
    if args.ground_truth:
        gt = read_ground_truth(args.ground_truth)
        if gt.X.shape[1] != ds.d:
            raise DataError(f"ground truth has {gt.X.shape[1]} features but the dataset has {ds.d}")
        spec = _scenario_for(args, ds.d)
        if spec is None:
            raise ConfigError("bayes_accuracy needs --scenario (no simulate config found)")
        if spec.d != ds.d:
            raise DataError(f"scenario dimension {spec.d} does not match the dataset ({ds.d})")
        row["bayes_accuracy"] = accuracy_vs_bayes(clf, gt.X, spec, 0.5)
    write_rows(args.out, list(row), [list(row.values())])
    write_echo(args.out, [("command", "evaluate"), ("model", args.model), ("data", args.data),
                          ("theta", repr(theta)), ("ground_truth", args.ground_truth or ""),
                          ("out", args.out)])
    for k, v in row.items():
        log.info("%s %s", k, v)
    return EXIT_OK


_BENCH_KEYS = {"scenario", "d", "learner", "n", "replications", "seed", "n_test", "theta", "cv",
               "epochs", "lr", "batch_size", "lam"}


def benchmark_spec(cfg: Dict[str, List[str]]) -> ExperimentSpec:
    unknown = set(cfg) - _BENCH_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in ("scenario", "d", "learner", "n", "replications"):
        if key not in cfg:
            raise ConfigError(f"config is missing {key!r}")

    def one(key, conv, default=None):
        if key not in cfg:
            return default
        try:
            return conv(cfg[key][-1])
        except ValueError:
            raise ConfigError(f"bad value for {key!r}: {cfg[key][-1]!r}") from None

    try:
        tcfg = TrainConfig(epochs=one("epochs", int, 100), lr=one("lr", float, 1e-3),
                           batch_size=one("batch_size", int, 32) or None, lam=one("lam", float, 0.0))
        return ExperimentSpec(
            scenario=cfg["scenario"][-1], d=one("d", int), learners=tuple(cfg["learner"]),
            n_grid=tuple(int(v) for v in cfg["n"]), replications=one("replications", int),
            seed=one("seed", int, 0), n_test=one("n_test", int, 10000), theta=one("theta", float, 0.5),
            cv=one("cv", int, 5), cfg=tcfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def spec_items(spec: ExperimentSpec):
    return [("scenario", spec.scenario), ("d", spec.d), ("learner", list(spec.learners)),
            ("n", list(spec.n_grid)), ("replications", spec.replications), ("seed", spec.seed),
            ("n_test", spec.n_test), ("theta", repr(spec.theta)), ("cv", spec.cv),
            ("epochs", spec.cfg.epochs), ("lr", repr(spec.cfg.lr)),
            ("batch_size", spec.cfg.batch_size or 0), ("lam", repr(spec.cfg.lam))]


def cmd_benchmark(args) -> int:
    if args.config:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    elif args.preset == "desk":
        cfg = {k: [str(x) for x in (v if isinstance(v, list) else [v])] for k, v in DESK_PRESET.items()}
    else:
        raise ConfigError("benchmark needs --config or --preset")
    for key in ("replications", "seed", "scenario", "d"):
        if getattr(args, key) is not None:
            cfg[key] = [str(getattr(args, key))]
    spec = benchmark_spec(cfg)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    records = run_experiment(spec, args.workers)
    write_replications(outdir / "replications.csv", records)
    summaries = summarize(records)
    write_aggregate(outdir / "aggregate.csv", summaries)
    (outdir / "config.cfg").write_text(format_config(spec_items(spec)), encoding="utf-8")
    failed = sum(not r.ok for r in records)
    for s in summaries:
        log.info("%-15s n=%-6d mean=%.4f p10=%.4f p90=%.4f failed=%d", s.label["learner"], s.label["n"],
                 s.mean, s.percentile_10, s.percentile_90, s.n_failed)
    if failed:
        log.warning("%d of %d replications failed", failed, len(records))
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    if args.outer < 1:
        raise ConfigError("--outer must be at least 1")
    if args.inner < 2:
        raise ConfigError("Studentization requires inner bootstrap (--inner >= 2)")
    ds = _read(args)
    res = bootstrap_ci(ds, outer_b=args.outer, inner_b=args.inner, level=args.level, seed=args.seed)
    rows = [[c.index, c.name, c.estimate, c.lower, c.upper, c.level, int(c.significant)]
            for c in res.intervals]
    write_rows(args.out, ["index", "coefficient", "estimate", "lower", "upper", "level", "significant"], rows)
    write_echo(args.out, [("command", "bootstrap"), ("data", args.data), ("outer", args.outer),
                          ("inner", args.inner), ("level", repr(args.level)), ("seed", args.seed),
                          ("skipped_outer", res.n_skipped_outer), ("skipped_inner", res.n_skipped_inner),
                          ("out", args.out)])
    for c in res.intervals:
        log.info("%-10s %+.4f [%+.4f, %+.4f]%s", c.name, c.estimate, c.lower, c.upper,
                 " *" if c.significant else "")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _data_flags(p):
    p.add_argument("--data", required=True, help="CSV with x1..xd, t, y and optional e")
    p.add_argument("--binary-01", action="store_true", help="t and y are coded 0/1 instead of -1/+1")
    p.add_argument("--propensity", type=float, default=None,
                   help="constant treatment probability when the file has no e column (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="respclass", description="Responder classification under monotonicity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a synthetic dataset and its ground truth")
    p.add_argument("--scenario", choices=["linear", "spherical"], required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", default=None, help="ground-truth CSV (default <out stem>_truth.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a responder classifier")
    _data_flags(p)
    p.add_argument("--learner", required=True, help=f"respsvm (with --kernel) or one of: {', '.join(LEARNERS)}")
    p.add_argument("--kernel", choices=["linear", "rbf"], default=None)
    p.add_argument("--theta", type=_theta_arg, default=0.5, help="false-positive weight or 'balanced'")
    p.add_argument("--C", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--cv", type=int, default=5)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32, help="0 for full batch")
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--log", default=None, help="training log (default <out>.log)")
    p.set_defaults(func=cmd_train, kernel_default="linear")

    p = sub.add_parser("evaluate", help="estimate losses of a saved model")
    p.add_argument("--model", required=True)
    _data_flags(p)
    p.add_argument("--theta", type=_theta_arg, default=0.5)
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--scenario", choices=["linear", "spherical"], default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--out", required=True, help="metrics CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="replicated synthetic benchmark")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", help="key=value config file")
    g.add_argument("--preset", choices=["desk"])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scenario", choices=["linear", "spherical"], default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--workers", type=int, default=None, help="worker processes (capped by RESPCLASS_THREADS)")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("bootstrap", help="Studentized bootstrap intervals for the linear generative model")
    _data_flags(p)
    p.add_argument("--outer", type=int, default=200)
    p.add_argument("--inner", type=int, default=50)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bootstrap)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.command == "train" and args.kernel is None and args.learner.lower() == "respsvm":
        args.kernel = args.kernel_default
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"respclass {args.command}: {exc}", file=sys.stderr)
        print(f"usage hint: respclass {args.command} --help", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"respclass {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, FloatingPointError) as exc:
        print(f"respclass {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"respclass {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
