"""Command-line front end.

Four workflows: ``fit`` (trimmed or plain penalized fit of a CSV), ``simulate``
(replication study from a config file), ``select-alpha`` (bootstrap choice of
the trimming proportion), and ``cv`` (cross-validated prediction error).  A
fifth utility, ``rerun``, replays any run from its manifest.

Option precedence, lowest to highest: built-in defaults, the TRIMFMR_THREADS
environment variable (threads only), command-line flags, then the config
file.  Exit codes: 0 success, 2 usage or config error, 3 data error, 4
numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .alpha_select import (
    AlphaSelectConfig,
    objective_curve_to_csv,
    report_to_csv,
    select_alpha,
)
from .em import EmControls, fit_penalized_fmr, select_lambda
from .errors import ConfigError, DataError, NumericalError
from .likelihood import penalized_objective
from .manifest import load_manifest, write_manifest
from .methods import DEFAULT_LAMBDA_GRID, METHOD_TAGS, method_from_tag
from .metrics import kfold_cv_error, kfold_partition, mccv_error
from .params import Dataset
from .simulation import StudyConfig, run_study
from .trimming import TrimSpec, fit_trimmed

_CV_STREAM = 2147483647


# ---------------------------------------------------------------------------
# data ingestion


def load_csv_dataset(path, response: str) -> tuple[Dataset, list[str]]:
    """Read a numeric CSV with a header row; returns (dataset, covariate names)."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, a header row is required")
        header = [h.strip() for h in header]
        if response not in header:
            raise DataError(f"{path}: response column {response!r} not found in header {header}")
        y_col = header.index(response)
        covariates = [h for i, h in enumerate(header) if i != y_col]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            vals = []
            for name, cell in zip(header, row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}:{line_no}: non-numeric value {cell!r} in column {name!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    table = np.asarray(rows)
    y = table[:, y_col]
    X = np.delete(table, y_col, axis=1)
    design = np.column_stack([np.ones(len(y)), X])
    return Dataset(responses=y, design=design), covariates


# ---------------------------------------------------------------------------
# config handling


def _read_config_file(path) -> dict:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    try:
        import tomllib  # Python >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        return tomllib.loads(raw.decode())
    except Exception as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from exc


def _default_threads() -> int:
    env = os.environ.get("TRIMFMR_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"TRIMFMR_THREADS={env!r} is not an integer") from None
    return os.cpu_count() or 1


def _resolve(defaults: dict, flags: dict, config: dict) -> dict:
    """defaults < flags < config; flags count only when explicitly given."""
    out = dict(defaults)
    out.update({k: v for k, v in flags.items() if v is not None})
    for key, val in config.items():
        if key not in defaults:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = val
    return out


def _em_controls(options: dict, seed: int) -> EmControls:
    return EmControls(
        max_iter=int(options["em_max_iter"]),
        tol=float(options["em_tol"]),
        n_starts=int(options["em_n_starts"]),
        rng_seed=seed,
    )


def _trim_spec(options: dict, alpha: float) -> TrimSpec:
    return TrimSpec(
        alpha=alpha,
        outer_tol=float(options["trim_outer_tol"]),
        max_outer=int(options["trim_max_outer"]),
        retune_lambda=bool(options["trim_retune_lambda"]),
    )


_FIT_DEFAULTS = {
    "csv": None,
    "response": None,
    "m": 2,
    "penalty": "lasso",
    "a": None,
    "alpha": 0.05,
    "select_alpha": False,
    "lambda_grid": list(DEFAULT_LAMBDA_GRID),
    "seed": 0,
    "threads": None,
    "out_dir": None,
    "em_max_iter": 500,
    "em_tol": 1e-8,
    "em_n_starts": 10,
    "trim_outer_tol": 1e-6,
    "trim_max_outer": 50,
    "trim_retune_lambda": False,
    "select_grid": [round(0.01 * i, 2) for i in range(21)],
    "n_boot": 200,
    "criterion": "max_diagonal",
}


def _parse_lambda_opts(args) -> list | None:
    if getattr(args, "lam", None) is not None and getattr(args, "lambda_grid", None) is not None:
        raise ConfigError("--lambda and --lambda-grid are mutually exclusive")
    if getattr(args, "lam", None) is not None:
        return [args.lam]
    if getattr(args, "lambda_grid", None) is not None:
        return _parse_float_list(args.lambda_grid, "--lambda-grid")
    return None


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigError(f"{what} expects a comma-separated list of numbers, got {text!r}") from None


def _validate_penalty(options: dict) -> None:
    if options["penalty"] not in ("lasso", "scad", "mcp"):
        raise ConfigError(f"penalty must be lasso, scad, or mcp, got {options['penalty']!r}")
    if options["response"] is None:
        raise ConfigError("a response column must be named (--response)")


# ---------------------------------------------------------------------------
# commands


def cmd_fit(options: dict, out_dir: Path) -> int:
    _validate_penalty(options)
    data, covariates = load_csv_dataset(options["csv"], options["response"])
    m = int(options["m"])
    seed = int(options["seed"])
    controls = _em_controls(options, seed)
    grid = [float(x) for x in options["lambda_grid"]]
    a = options["a"]

    alpha = float(options["alpha"])
    chosen_by_bootstrap = None
    if options["select_alpha"]:
        cfg = AlphaSelectConfig(
            grid=tuple(float(x) for x in options["select_grid"]),
            n_boot=int(options["n_boot"]),
            criterion=options["criterion"],
            rng_seed=seed,
            lambda_grid=tuple(grid),
            em=controls,
            trim=_trim_spec(options, 0.0),
            n_jobs=int(options["threads"]),
        )
        report = select_alpha(data, m, options["penalty"], cfg)
        alpha = report.chosen_alpha
        chosen_by_bootstrap = alpha

    trim = _trim_spec(options, alpha)
    if alpha == 0.0:
        specs = select_lambda(data, None, m, options["penalty"], grid, controls, a=a)
        fit = fit_penalized_fmr(data, None, m, specs, controls)
        retained = np.arange(data.n_rows)
        trace = np.asarray([penalized_objective(data, fit.theta, specs, None)])
        theta = fit.theta
    else:
        tfit = fit_trimmed(data, m, options["penalty"], trim, controls, grid, a=a)
        theta, retained, trace = tfit.theta, tfit.retained, tfit.trimmed_objective_trace

    out_dir.mkdir(parents=True, exist_ok=True)
    coef_path = out_dir / "coefficients.csv"
    with open(coef_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["covariate"] + [f"comp{j + 1}" for j in range(m)])
        names = ["intercept"] + covariates
        for k, name in enumerate(names):
            writer.writerow([name] + [repr(float(theta.coefficients[j, k])) for j in range(m)])

    model_path = out_dir / "model.csv"
    with open(model_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component", "proportion", "variance"])
        for j in range(m):
            writer.writerow([j + 1, repr(float(theta.proportions[j])), repr(float(theta.variances[j]))])

    rows_path = out_dir / "rows.csv"
    kept = np.zeros(data.n_rows, dtype=int)
    kept[retained] = 1
    with open(rows_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "retained"])
        for i in range(data.n_rows):
            writer.writerow([i, kept[i]])

    trace_path = out_dir / "objective_trace.csv"
    with open(trace_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "objective"])
        for i, val in enumerate(trace):
            writer.writerow([i, repr(float(val))])

    extra = {"alpha": alpha}
    if chosen_by_bootstrap is not None:
        extra["alpha_selected_by_bootstrap"] = chosen_by_bootstrap
    write_manifest(
        out_dir / "manifest.json",
        command="fit",
        config=options,
        master_seed=seed,
        outputs=[coef_path, model_path, rows_path, trace_path],
        extra=extra,
    )
    return 0


def cmd_select_alpha(options: dict, out_dir: Path) -> int:
    _validate_penalty(options)
    data, _ = load_csv_dataset(options["csv"], options["response"])
    m = int(options["m"])
    seed = int(options["seed"])
    cfg = AlphaSelectConfig(
        grid=tuple(float(x) for x in options["select_grid"]),
        n_boot=int(options["n_boot"]),
        criterion=options["criterion"],
        rng_seed=seed,
        lambda_grid=tuple(float(x) for x in options["lambda_grid"]),
        em=_em_controls(options, seed),
        trim=_trim_spec(options, 0.0),
        n_jobs=int(options["threads"]),
    )
    report = select_alpha(data, m, options["penalty"], cfg)

    out_dir.mkdir(parents=True, exist_ok=True)
    scores_path = out_dir / "alpha_scores.csv"
    report_to_csv(report, scores_path)
    curve_path = out_dir / "objective_curve.csv"
    objective_curve_to_csv(report, curve_path)
    write_manifest(
        out_dir / "manifest.json",
        command="select-alpha",
        config=options,
        master_seed=seed,
        outputs=[scores_path, curve_path],
        extra={"chosen_alpha": report.chosen_alpha, "criterion": report.criterion},
    )
    print(f"chosen alpha: {report.chosen_alpha}")
    return 0


_CV_DEFAULTS = dict(
    _FIT_DEFAULTS,
    methods=["ml", "mtl"],
    kfold=None,
    mccv_d=None,
    mccv_reps=None,
)


def cmd_cv(options: dict, out_dir: Path) -> int:
    _validate_penalty(options)
    if (options["kfold"] is None) == (options["mccv_d"] is None):
        raise ConfigError("exactly one of --kfold or --mccv must be given")
    data, _ = load_csv_dataset(options["csv"], options["response"])
    m = int(options["m"])
    seed = int(options["seed"])
    tags = options["methods"]
    if isinstance(tags, str):
        tags = [t.strip() for t in tags.split(",") if t.strip()]
    for tag in tags:
        if tag not in METHOD_TAGS:
            raise ConfigError(f"unknown method tag {tag!r}, expected one of {sorted(METHOD_TAGS)}")

    controls = _em_controls(options, seed)
    trim = _trim_spec(options, float(options["alpha"]))
    grid = tuple(float(x) for x in options["lambda_grid"])

    results = {}
    split_hashes = {}
    for tag in tags:
        method = method_from_tag(tag, alpha=float(options["alpha"]), lambda_grid=grid, em=controls, trim=trim)
        rng = np.random.default_rng(np.random.SeedSequence([seed, _CV_STREAM]))
        if options["kfold"] is not None:
            k = int(options["kfold"])
            split_hashes[tag] = _partition_hash(kfold_partition(data.n_rows, k, np.random.default_rng(np.random.SeedSequence([seed, _CV_STREAM]))))
            results[tag] = kfold_cv_error(data, m, method, k, rng)
        else:
            d, reps = int(options["mccv_d"]), int(options["mccv_reps"])
            split_hashes[tag] = _mccv_hash(data.n_rows, d, reps, np.random.default_rng(np.random.SeedSequence([seed, _CV_STREAM])))
            results[tag] = mccv_error(data, m, method, d, reps, rng)

    identical = len(set(split_hashes.values())) == 1
    if not identical:
        raise NumericalError("cross-validation splits differ across methods despite a shared seed")

    out_dir.mkdir(parents=True, exist_ok=True)
    mspe_path = out_dir / "mspe.csv"
    with open(mspe_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "mspe"])
        for tag in tags:
            writer.writerow([tag, repr(float(results[tag]))])
    write_manifest(
        out_dir / "manifest.json",
        command="cv",
        config=options,
        master_seed=seed,
        outputs=[mspe_path],
        extra={"split_hashes": split_hashes, "identical_splits": identical},
    )
    return 0


def _partition_hash(folds) -> str:
    import hashlib

    h = hashlib.sha256()
    for fold in folds:
        h.update(np.asarray(fold, dtype=np.int64).tobytes())
        h.update(b"|")
    return h.hexdigest()[:16]


def _mccv_hash(n: int, d: int, reps: int, rng) -> str:
    import hashlib

    h = hashlib.sha256()
    for _ in range(reps):
        test = np.sort(rng.choice(n, size=d, replace=False))
        h.update(test.astype(np.int64).tobytes())
        h.update(b"|")
    return h.hexdigest()[:16]


_STUDY_DEFAULTS = {
    "model_ids": ["Model1"],
    "pi1_values": [0.5],
    "rho_kinds": ["independent"],
    "n_values": [100, 200],
    "contamination_levels": [0.01, 0.03, 0.05],
    "methods": ["ml", "mtl"],
    "m": 2,
    "replications": 200,
    "master_seed": 0,
    "threads": None,
    "trim_alpha": 0.05,
    "lambda_grid": list(DEFAULT_LAMBDA_GRID),
    "em_max_iter": 300,
    "em_tol": 1e-8,
    "em_n_starts": 5,
    "trim_outer_tol": 1e-6,
    "trim_max_outer": 20,
    "trim_retune_lambda": False,
    "a": None,
}


def _flatten_study_config(raw: dict) -> dict:
    """Accept the sectioned config layout and flatten to option keys."""
    flat = {}
    sections = {"study": "", "data": "", "fit": ""}
    for key, val in raw.items():
        if key in sections and isinstance(val, dict):
            for sub, subval in val.items():
                if sub == "em" and isinstance(subval, dict):
                    for k2, v2 in subval.items():
                        flat[f"em_{k2}"] = v2
                elif sub == "trim" and isinstance(subval, dict):
                    for k2, v2 in subval.items():
                        flat[f"trim_{k2}"] = v2
                else:
                    flat[sub] = subval
        else:
            flat[key] = val
    return flat


def _study_config_from_options(options: dict) -> StudyConfig:
    for mid in options["model_ids"]:
        if mid not in ("Model1", "Model2"):
            raise ConfigError(f"invalid model_id {mid!r}: expected 'Model1' or 'Model2'")
    controls = _em_controls(options, 0)
    trim = _trim_spec(options, float(options["trim_alpha"]))
    grid = tuple(float(x) for x in options["lambda_grid"])
    methods = []
    for tag in options["methods"]:
        if tag not in METHOD_TAGS:
            raise ConfigError(f"unknown method tag {tag!r}, expected one of {sorted(METHOD_TAGS)}")
        methods.append(
            method_from_tag(
                tag,
                alpha=float(options["trim_alpha"]),
                lambda_grid=grid,
                em=controls,
                trim=trim,
                a=options["a"],
            )
        )
    threads = options["threads"]
    return StudyConfig(
        methods=tuple(methods),
        model_ids=tuple(options["model_ids"]),
        pi1_values=tuple(float(x) for x in options["pi1_values"]),
        rho_kinds=tuple(options["rho_kinds"]),
        n_values=tuple(int(x) for x in options["n_values"]),
        contamination_levels=tuple(float(x) for x in options["contamination_levels"]),
        m=int(options["m"]),
        replications=int(options["replications"]),
        master_seed=int(options["master_seed"]),
        threads=int(threads),
        out_dir=options.get("out_dir"),
    )


def cmd_simulate(options: dict, out_dir: Path) -> int:
    options = dict(options)
    options["out_dir"] = str(out_dir)
    cfg = _study_config_from_options(options)
    summary = run_study(cfg)
    incomplete = [
        (cell, name)
        for cell, per_method in summary.cells.items()
        for name, agg in per_method.items()
        if agg is None
    ]
    if incomplete:
        print(f"error: {len(incomplete)} study cell/method pairs had no successful replication", file=sys.stderr)
        return 4
    return 0


def _study_config_from_dict(d: dict, out_dir: Path) -> StudyConfig:
    """Rebuild a StudyConfig from its manifest (JSON) form."""
    from .methods import MethodConfig

    methods = tuple(
        MethodConfig(
            name=md["name"],
            family=md["family"],
            trimmed=md["trimmed"],
            alpha=md["alpha"],
            lambda_grid=tuple(md["lambda_grid"]),
            em=EmControls(**md["em"]),
            trim=TrimSpec(**md["trim"]),
            a=md["a"],
            prediction=md["prediction"],
        )
        for md in d["methods"]
    )
    return StudyConfig(
        methods=methods,
        model_ids=tuple(d["model_ids"]),
        pi1_values=tuple(d["pi1_values"]),
        rho_kinds=tuple(d["rho_kinds"]),
        n_values=tuple(d["n_values"]),
        contamination_levels=tuple(d["contamination_levels"]),
        m=int(d["m"]),
        replications=int(d["replications"]),
        master_seed=int(d["master_seed"]),
        threads=int(d["threads"]),
        out_dir=str(out_dir),
    )


def cmd_rerun(manifest_path: str, out_dir: Path | None) -> int:
    manifest = load_manifest(manifest_path)
    command = manifest["command"]
    options = manifest["config"]
    target = Path(out_dir) if out_dir is not None else Path(manifest_path).parent
    if command == "fit":
        return cmd_fit(options, target)
    if command == "select-alpha":
        return cmd_select_alpha(options, target)
    if command == "cv":
        return cmd_cv(options, target)
    if command == "simulate":
        cfg = _study_config_from_dict(options, target)
        summary = run_study(cfg)
        incomplete = [
            (cell, name)
            for cell, per_method in summary.cells.items()
            for name, agg in per_method.items()
            if agg is None
        ]
        return 4 if incomplete else 0
    raise ConfigError(f"manifest has unknown command {command!r}")


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trimfmr", description=__doc__)
    parser.add_argument("--version", action="version", version=f"trimfmr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_data=True):
        if with_data:
            p.add_argument("csv", help="input CSV (UTF-8, comma separated, header row)")
            p.add_argument("--response", help="name of the response column")
            p.add_argument("--m", type=int, help="number of mixture components (default 2)")
            p.add_argument("--penalty", choices=["lasso", "scad", "mcp"], help="penalty family")
            p.add_argument("--lambda", dest="lam", type=float, help="fixed tuning parameter")
            p.add_argument("--lambda-grid", help="comma-separated tuning grid for BIC selection")
            p.add_argument("--a", type=float, help="SCAD/MCP concavity constant")
        p.add_argument("--seed", type=int, help="master RNG seed (default 0)")
        p.add_argument("--threads", type=int, help="parallel workers (default: all cores)")
        p.add_argument("--out-dir", help="output directory (default: ./trimfmr_out)")
        p.add_argument("--config", help="TOML or JSON config file; overrides flags")

    p_fit = sub.add_parser("fit", help="fit a (trimmed) penalized mixture of regressions")
    add_common(p_fit)
    p_fit.add_argument("--alpha", type=float, help="trimming proportion (0 disables trimming)")
    p_fit.add_argument(
        "--select-alpha", action="store_true", default=None, dest="select_alpha",
        help="choose the trimming proportion by bootstrap before fitting",
    )

    p_sim = sub.add_parser("simulate", help="run a replication study from a config file")
    p_sim.add_argument("--config", required=True, help="study config (TOML or JSON)")
    p_sim.add_argument("--seed", type=int, help="override the master seed")
    p_sim.add_argument("--threads", type=int, help="parallel workers")
    p_sim.add_argument("--out-dir", help="output directory")

    p_sel = sub.add_parser("select-alpha", help="bootstrap selection of the trimming proportion")
    add_common(p_sel)
    p_sel.add_argument("--grid", help="comma-separated alpha grid (default 0,0.01,...,0.20)")
    p_sel.add_argument("--n-boot", type=int, dest="n_boot", help="bootstrap replicates per alpha (default 200)")
    p_sel.add_argument(
        "--criterion", choices=["max_diagonal", "max_eigenvalue"], help="dispersion summary to minimize"
    )

    p_cv = sub.add_parser("cv", help="cross-validated prediction error of one or more methods")
    add_common(p_cv)
    p_cv.add_argument("--methods", help="comma-separated method tags (ml, ms, mmcp, mtl, mts, mtmcp)")
    p_cv.add_argument("--alpha", type=float, help="trimming proportion for trimmed methods")
    p_cv.add_argument("--kfold", type=int, help="number of folds")
    p_cv.add_argument("--mccv", nargs=2, type=int, metavar=("D", "REPS"), help="Monte-Carlo CV: holdout size and repetitions")

    p_rerun = sub.add_parser("rerun", help="reproduce a run from its manifest")
    p_rerun.add_argument("manifest", help="path to a manifest.json")
    p_rerun.add_argument("--out-dir", help="where to write the reproduced outputs")

    return parser


def dispatch(args) -> int:
    config = _read_config_file(args.config) if getattr(args, "config", None) else {}

    if args.command == "simulate":
        flat = _flatten_study_config(config)
        flags = {k: getattr(args, a) for k, a in
                 [("master_seed", "seed"), ("threads", "threads")] if getattr(args, a, None) is not None}
        options = _resolve(_STUDY_DEFAULTS, flags, flat)
        if options["threads"] is None:
            options["threads"] = _default_threads()
        out_dir = Path(args.out_dir or flat.get("out_dir") or "trimfmr_out")
        return cmd_simulate(options, out_dir)

    if args.command == "rerun":
        return cmd_rerun(args.manifest, Path(args.out_dir) if args.out_dir else None)

    # fit / select-alpha / cv share the tabular-data option set
    flags = {
        "csv": args.csv,
        "response": args.response,
        "m": args.m,
        "penalty": args.penalty,
        "a": args.a,
        "seed": args.seed,
        "threads": args.threads,
        "out_dir": args.out_dir,
        "lambda_grid": _parse_lambda_opts(args),
    }
    if args.command == "fit":
        flags["alpha"] = args.alpha
        flags["select_alpha"] = args.select_alpha
        defaults = _FIT_DEFAULTS
    elif args.command == "select-alpha":
        flags["select_grid"] = _parse_float_list(args.grid, "--grid") if args.grid else None
        flags["n_boot"] = args.n_boot
        flags["criterion"] = args.criterion
        defaults = _FIT_DEFAULTS
    else:  # cv
        flags["methods"] = args.methods
        flags["alpha"] = args.alpha
        flags["kfold"] = args.kfold
        if args.mccv is not None:
            if args.kfold is not None:
                raise ConfigError("--kfold and --mccv are mutually exclusive")
            flags["mccv_d"], flags["mccv_reps"] = args.mccv
        defaults = _CV_DEFAULTS

    options = _resolve(defaults, flags, config)
    if options["threads"] is None:
        options["threads"] = _default_threads()
    out_dir = Path(options["out_dir"] or "trimfmr_out")

    if args.command == "fit":
        return cmd_fit(options, out_dir)
    if args.command == "select-alpha":
        return cmd_select_alpha(options, out_dir)
    return cmd_cv(options, out_dir)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
