"""Command-line driver.

    glhs run --config c.cfg --method glhs --reps 10 --seed 1 --out results/

Loads a plain-text key-value config (INI sections, one assignment per
line), runs the chosen estimator with seeded repetitions, and writes
report.json, iterations.csv, manifest.json and optional sample dumps.

Repetition protocol: SeedSequence(seed) spawns one stream for the global
stage (domain grid + training draw), one for the Monte Carlo evaluation
set, and one per repetition. The global stage and the evaluation set are
fixed across repetitions; repetitions randomize only the buffer-zone
resampling, the Christoffel draw, and the cross-validation folds. The
evaluation set is generated in 65,536-point chunks with one child stream
per chunk, so estimates do not depend on the degree of parallelism.
"""
import argparse
import configparser
import csv
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .errors import ConfigValidationError, GlhsError
from .estimators import (
    DEFAULT_DRAW_CAP,
    FailureReport,
    failure_fraction,
    iterative_li_pf,
    materialize_mc_points,
    mc_failure_probability,
    non_iterative_pf,
)
from .glhs import GlhsConfig, build_global_stage, run_repetition
from .testcases import LIMIT_STATES, _CASES

log = logging.getLogger(__name__)

METHODS = ("mc", "surrogate", "glhs", "non-iterative", "iterative-li",
           "compare-all")

FAST_MC_CAP = 1_000_000

_GLHS_KEYS = {
    "d": int, "m_K": int, "m_c": int, "c": float, "alpha": float,
    "m_0": int, "n": int, "n_max": int, "m_l": int, "c_r": float,
    "m_d": int, "eps": float, "max_iterations": int, "cv_folds": int,
    "weight_mode": str, "eta_mode": str, "index_rule": str,
}
_ESTIMATOR_KEYS = {
    "budget": int, "group_size": int, "tolerance": float, "draw_cap": int,
}
_RUN_KEYS = {"seed": int, "reps": int}
_EXPERIMENT_KEYS = {"preset": str, "limit_state": str}


@dataclasses.dataclass
class Settings:
    limit_state: object
    config: GlhsConfig
    budget: int | None = None
    group_size: int = 100
    tolerance: float | None = None
    draw_cap: int = DEFAULT_DRAW_CAP
    seed: int = 0
    reps: int = 1


def _parse_sections(path):
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigValidationError([f"cannot read config: {exc}"]) from exc
    except configparser.Error as exc:
        raise ConfigValidationError([f"config parse error: {exc}"]) from exc
    return {name: dict(parser.items(name)) for name in parser.sections()}


def _convert(section, key, raw, caster, errors):
    raw = raw.strip()
    if raw == "":
        return None
    try:
        if caster is int:
            return int(raw)
        if caster is float:
            return float(raw)
        return raw
    except ValueError:
        errors.append(f"[{section}] {key} = {raw!r} is not a valid {caster.__name__}")
        return None


def validate_config(path):
    """Parse and validate a config file into Settings.

    Problems are aggregated and raised together as ConfigValidationError;
    every field the file leaves unset is named in a single warning.
    """
    sections = _parse_sections(path)
    errors = []
    defaulted = []

    known = {
        "experiment": _EXPERIMENT_KEYS,
        "glhs": _GLHS_KEYS,
        "estimators": _ESTIMATOR_KEYS,
        "run": _RUN_KEYS,
    }
    for name, body in sections.items():
        if name not in known:
            errors.append(f"unknown config section [{name}]")
            continue
        for key in body:
            if key not in known[name]:
                errors.append(f"unknown key {key!r} in section [{name}]")

    experiment = sections.get("experiment", {})
    glhs_raw = sections.get("glhs", {})
    estimators_raw = sections.get("estimators", {})
    run_raw = sections.get("run", {})

    preset = experiment.get("preset", "").strip() or None
    preset_ls = None
    preset_values = {}
    if preset is not None:
        if preset not in _CASES:
            errors.append(
                f"unknown preset {preset!r}; available: {sorted(_CASES)}"
            )
        else:
            preset_ls, preset_values = _CASES[preset]

    ls_name = experiment.get("limit_state", "").strip() or preset_ls
    if ls_name is None:
        ls_name = "g1d"
        defaulted.append("experiment.limit_state")
    if ls_name not in LIMIT_STATES:
        errors.append(
            f"unknown limit_state {ls_name!r}; available: {sorted(LIMIT_STATES)}"
        )
        raise ConfigValidationError(errors)
    limit_state = LIMIT_STATES[ls_name]

    glhs_values = dict(preset_values)
    glhs_values.setdefault("d", limit_state.d)
    for key, caster in _GLHS_KEYS.items():
        if key in glhs_raw:
            value = _convert("glhs", key, glhs_raw[key], caster, errors)
            if value is not None:
                glhs_values[key] = value
        elif key not in glhs_values and key not in ("m_l",):
            defaulted.append(f"glhs.{key}")
    if "m_l" not in glhs_values and "m_l" not in glhs_raw:
        defaulted.append("glhs.m_l (sampling-rate rule)")

    config = GlhsConfig(**glhs_values)
    if config.d != limit_state.d:
        errors.append(
            f"d = {config.d} does not match limit state "
            f"{limit_state.name!r} (d = {limit_state.d})"
        )
    cfg_errors, cfg_warnings = config.validate()
    errors.extend(cfg_errors)
    for message in cfg_warnings:
        log.warning("%s", message)

    est_values = {}
    for key, caster in _ESTIMATOR_KEYS.items():
        if key in estimators_raw:
            value = _convert("estimators", key, estimators_raw[key], caster, errors)
            if value is not None:
                est_values[key] = value
        else:
            defaulted.append(f"estimators.{key}")
    if est_values.get("group_size", 100) < 1:
        errors.append("group_size must be >= 1")

    run_values = {}
    for key, caster in _RUN_KEYS.items():
        if key in run_raw:
            value = _convert("run", key, run_raw[key], caster, errors)
            if value is not None:
                run_values[key] = value
        else:
            defaulted.append(f"run.{key}")

    if errors:
        raise ConfigValidationError(errors)
    if defaulted:
        log.warning("config left %d field(s) at their defaults: %s",
                    len(defaulted), ", ".join(defaulted))

    return Settings(
        limit_state=limit_state,
        config=config,
        budget=est_values.get("budget"),
        group_size=est_values.get("group_size", 100),
        tolerance=est_values.get("tolerance"),
        draw_cap=est_values.get("draw_cap", DEFAULT_DRAW_CAP),
        seed=run_values.get("seed", 0),
        reps=run_values.get("reps", 1),
    )


# parent-side artifacts inherited by forked workers; falls back to
# regeneration when the fork start method is unavailable
_SHARED = {}


def _rep_task(args):
    (kind, rep, rep_seed, config, stage, ls_name, budget, mc_seed, m_c,
     eta1_inflate) = args
    g_t = LIMIT_STATES[ls_name].fun
    rng = np.random.default_rng(rep_seed)
    try:
        if kind == "glhs":
            result = run_repetition(g_t, stage, config, rng,
                                    eta1_inflate=eta1_inflate)
            points = _SHARED.get("mc")
            if points is None:
                points = materialize_mc_points(mc_seed, m_c, config.d)
            pf = failure_fraction(result.chain, points)
            iterations = [_diag_dict(diag) for diag in result.iterations]
            samples = [
                (diag.l, diag.points, diag.values, diag.weights)
                for diag in result.iterations
            ]
            return (rep, pf, result.m_T, iterations, result.terminated,
                    samples, None)
        if kind == "non-iterative":
            pf, m_t = non_iterative_pf(
                stage.surrogate, g_t, stage.eta0, config.d, rng,
                budget=budget,
            )
            return (rep, pf, m_t, [], "", [], None)
        raise ValueError(kind)
    except Exception as exc:  # recorded per rep; the run continues
        log.error("rep %d failed: %s", rep, exc)
        return (rep, None, None, [], "", [], repr(exc))


def _diag_dict(diag):
    return dict(
        l=diag.l, eta_prev=diag.eta_prev, zone_size=diag.zone_size,
        order=diag.order, eta_residual=diag.eta_residual,
        eta_next=diag.eta_next, m_T=diag.m_T,
        cv_scores={str(k): v for k, v in diag.cv_scores.items()},
        cv_skipped={str(k): v for k, v in diag.cv_skipped.items()},
    )


def _run_reps(kind, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [_rep_task(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_rep_task, tasks))


def _report_from_reps(method, outcomes, m_c, budget_label=None):
    ok = [o for o in outcomes if o[6] is None]
    failed = [o for o in outcomes if o[6] is not None]
    runs = [o[1] for o in ok]
    m_ts = sorted({o[2] for o in ok})
    report = FailureReport.from_runs(method, runs, m_c=m_c) if runs else \
        FailureReport(method=method, pf=float("nan"), m_c=m_c)
    report.m_T = m_ts[0] if len(m_ts) == 1 else None
    report.extra["m_T_per_run"] = [o[2] for o in outcomes]
    report.extra["errors"] = {o[0]: o[6] for o in failed}
    report.extra["iterations"] = {o[0]: o[3] for o in outcomes if o[3]}
    report.extra["terminated"] = {o[0]: o[4] for o in outcomes if o[4]}
    report.extra["samples"] = {o[0]: o[5] for o in outcomes if o[5]}
    if budget_label is not None:
        report.extra["budget"] = budget_label
    return report


def run_methods(settings, method, reps, seed, jobs=1, slow=False):
    """Execute one method (or the whole comparison) under the repetition
    protocol; returns the list of FailureReports plus shared artifacts."""
    config = settings.config
    g_t = settings.limit_state.fun
    d = config.d
    m_c = config.m_c
    if not slow and m_c > FAST_MC_CAP:
        log.warning(
            "m_c capped at %d for a fast run (pass --slow for the "
            "configured %d)", FAST_MC_CAP, m_c,
        )
        m_c = FAST_MC_CAP

    root = np.random.SeedSequence(seed)
    global_seed, mc_seed, *rep_seeds = root.spawn(2 + reps)

    stage = None
    if method != "mc":
        stage = build_global_stage(g_t, config, np.random.default_rng(global_seed))

    reports = []
    timings = {}

    def timed(label, fn):
        start = time.perf_counter()
        out = fn()
        timings[label] = time.perf_counter() - start
        return out

    def run_mc():
        pf = mc_failure_probability(g_t, d, m_c, mc_seed)
        return FailureReport(method="mc", pf=pf, m_c=m_c, m_T=None,
                             mu=pf, sigma=0.0, runs=[pf])

    def run_surrogate():
        pf = mc_failure_probability(stage.surrogate, d, m_c, mc_seed)
        return FailureReport(method="surrogate", pf=pf, m_c=m_c,
                             m_T=config.m_0, mu=pf, sigma=0.0, runs=[pf])

    def run_glhs_reps(label="glhs", eta1_inflate=False, run_config=None):
        cfg = run_config or config
        _SHARED["mc"] = materialize_mc_points(mc_seed, m_c, d)
        try:
            tasks = [
                ("glhs", r, rep_seeds[r], cfg, stage,
                 settings.limit_state.name, None, mc_seed, m_c, eta1_inflate)
                for r in range(reps)
            ]
            outcomes = _run_reps("glhs", tasks, jobs)
        finally:
            _SHARED.pop("mc", None)
        return _report_from_reps(label, outcomes, m_c)

    def run_non_iterative(budget, label="non-iterative"):
        if budget is None:
            pf, m_t = non_iterative_pf(
                stage.surrogate, g_t, stage.eta0, d, mc_seed, m=m_c,
            )
            return FailureReport(method=label, pf=pf, m_c=m_c, m_T=m_t,
                                 mu=pf, sigma=0.0, runs=[pf])
        tasks = [
            ("non-iterative", r, rep_seeds[r], config, stage,
             settings.limit_state.name, budget, mc_seed, m_c, False)
            for r in range(reps)
        ]
        outcomes = _run_reps("non-iterative", tasks, jobs)
        return _report_from_reps(label, outcomes, m_c, budget_label=budget)

    def run_li():
        points = materialize_mc_points(mc_seed, m_c, d)
        pf, m_t, groups = iterative_li_pf(
            stage.surrogate, g_t, points, settings.group_size,
            tolerance=settings.tolerance,
        )
        report = FailureReport(method="iterative-li", pf=pf, m_c=m_c,
                               m_T=m_t, mu=pf, sigma=0.0, runs=[pf])
        report.extra["groups_used"] = groups
        return report

    if method == "mc":
        reports.append(timed("mc", run_mc))
    elif method == "surrogate":
        reports.append(timed("surrogate", run_surrogate))
    elif method == "glhs":
        reports.append(timed("glhs", run_glhs_reps))
    elif method == "non-iterative":
        reports.append(timed("non-iterative",
                             lambda: run_non_iterative(settings.budget)))
    elif method == "iterative-li":
        reports.append(timed("iterative-li", run_li))
    elif method == "compare-all":
        m_l = config.resolved_m_l()
        second_pass = dataclasses.replace(config, max_iterations=2)
        reports.append(timed("mc", run_mc))
        reports.append(timed("surrogate", run_surrogate))
        reports.append(timed("glhs", run_glhs_reps))
        reports.append(timed("glhs-second-pass", lambda: run_glhs_reps(
            label="glhs-second-pass", eta1_inflate=True,
            run_config=second_pass)))
        reports.append(timed(f"non-iterative-{m_l}", lambda: run_non_iterative(
            m_l, label=f"non-iterative-{m_l}")))
        reports.append(timed(f"non-iterative-{2 * m_l}", lambda: run_non_iterative(
            2 * m_l, label=f"non-iterative-{2 * m_l}")))
    else:
        raise ValueError(f"unknown method {method!r}")

    artifacts = dict(stage=stage, m_c=m_c, timings=timings)
    return reports, artifacts


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _write_iterations_csv(path, reports):
    header = ["method", "rep", "iteration", "eta_prev", "zone_size",
              "order", "eta_residual", "eta_next", "m_T"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for report in reports:
            for rep, iterations in sorted(report.extra.get("iterations", {}).items()):
                for diag in iterations:
                    writer.writerow([
                        report.method, rep, diag["l"],
                        _fmt(diag["eta_prev"]), diag["zone_size"],
                        diag["order"], _fmt(diag["eta_residual"]),
                        _fmt(diag["eta_next"]), diag["m_T"],
                    ])


def _write_sample_dumps(out_dir, settings, reports, artifacts):
    stage = artifacts.get("stage")
    d = settings.config.d
    coords = [f"x{k + 1}" for k in range(d)]
    if stage is not None:
        with open(out_dir / "samples_global.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(coords + ["g"])
            for x, y in zip(stage.x0, stage.y0):
                writer.writerow([_fmt(v) for v in x] + [_fmt(y)])
        values = stage.surrogate(stage.grid)
        in_buffer = np.abs(values) <= stage.eta0
        with open(out_dir / "samples_zone.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(coords + ["g_surrogate", "in_buffer"])
            for x, v, flag in zip(stage.grid, values, in_buffer):
                writer.writerow([_fmt(c) for c in x] + [_fmt(v), int(flag)])
    rows = []
    for report in reports:
        for rep, samples in sorted(report.extra.get("samples", {}).items()):
            for (l, points, values, weights) in samples:
                for x, y, w in zip(points, values, weights):
                    rows.append([report.method, rep, l]
                                + [_fmt(c) for c in x] + [_fmt(y), _fmt(w)])
    if rows:
        with open(out_dir / "samples_local.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["method", "rep", "iteration"] + coords
                            + ["g", "weight"])
            writer.writerows(rows)


def _report_json(report):
    body = dict(
        method=report.method,
        pf=report.pf,
        pf_mean=report.mu,
        pf_std=report.sigma,
        m_c=report.m_c,
        m_T=report.m_T,
        runs=[
            dict(rep=i, pf=pf) for i, pf in enumerate(report.runs)
        ],
    )
    for key in ("m_T_per_run", "errors", "terminated", "budget",
                "groups_used", "iterations"):
        if key in report.extra and report.extra[key] not in ({}, None):
            body[key] = report.extra[key]
    return body


def _settings_snapshot(settings, seed, reps):
    config = dataclasses.asdict(settings.config)
    config.pop("seed")
    return dict(
        experiment=dict(limit_state=settings.limit_state.name),
        glhs=config,
        estimators=dict(
            budget=settings.budget,
            group_size=settings.group_size,
            tolerance=settings.tolerance,
            draw_cap=settings.draw_cap,
        ),
        run=dict(seed=seed, reps=reps),
    )


def write_outputs(out_dir, settings, method, seed, reps, jobs, slow,
                  dump_samples, reports, artifacts, total_s):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    iterations_path = out_dir / "iterations.csv"
    manifest_path = out_dir / "manifest.json"

    report_doc = dict(
        tool="glhs",
        version=__version__,
        method=method,
        seed=seed,
        reps=reps,
        kernel=_kernels.IMPLEMENTATION,
        results=[_report_json(r) for r in reports],
    )
    report_path.write_text(json.dumps(report_doc, indent=2) + "\n")

    _write_iterations_csv(iterations_path, reports)

    outputs = [str(report_path), str(iterations_path)]
    if dump_samples:
        _write_sample_dumps(out_dir, settings, reports, artifacts)
        for name in ("samples_global.csv", "samples_zone.csv",
                     "samples_local.csv"):
            if (out_dir / name).exists():
                outputs.append(str(out_dir / name))

    import scipy

    manifest = dict(
        tool="glhs",
        version=__version__,
        python=sys.version.split()[0],
        numpy=np.__version__,
        scipy=scipy.__version__,
        kernel=_kernels.IMPLEMENTATION,
        method=method,
        seed=seed,
        reps=reps,
        jobs=jobs,
        slow=slow,
        config=_settings_snapshot(settings, seed, reps),
        outputs=outputs + [str(manifest_path)],
        wall_clock_s=dict(total=total_s, per_method=artifacts["timings"]),
    )
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return report_doc


def parse_args(argv):
    parser = argparse.ArgumentParser(prog="glhs")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an estimator on a configured case")
    run.add_argument("--config", required=True, help="config file path")
    run.add_argument("--method", choices=METHODS, default="glhs")
    run.add_argument("--reps", type=int, default=None,
                     help="repetition count (overrides the config)")
    run.add_argument("--seed", type=int, default=None,
                     help="root seed (overrides the config)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--jobs", type=int, default=1,
                     help="concurrent repetitions")
    run.add_argument("--dump-samples", action="store_true",
                     help="write plot-ready sample CSVs")
    run.add_argument("--slow", action="store_true",
                     help="use the full configured m_c instead of the "
                          f"{FAST_MC_CAP} fast cap")
    return parser.parse_args(argv)


def main(argv=None):
    levels = dict(error=logging.ERROR, warn=logging.WARNING,
                  info=logging.INFO, debug=logging.DEBUG)
    level_name = os.environ.get("GLHS_LOG", "warn").lower()
    logging.basicConfig(level=levels.get(level_name, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    if level_name not in levels:
        log.warning("GLHS_LOG=%s not recognized; using warn", level_name)

    args = parse_args(argv)
    try:
        settings = validate_config(args.config)
    except ConfigValidationError as exc:
        for message in exc.messages:
            print(f"config error: {message}", file=sys.stderr)
        return 1

    seed = args.seed if args.seed is not None else settings.seed
    reps = args.reps if args.reps is not None else settings.reps
    if reps < 1:
        print("config error: reps must be >= 1", file=sys.stderr)
        return 1

    start = time.perf_counter()
    reports, artifacts = run_methods(
        settings, args.method, reps, seed, jobs=args.jobs, slow=args.slow,
    )
    total_s = time.perf_counter() - start

    write_outputs(args.out, settings, args.method, seed, reps, args.jobs,
                  args.slow, args.dump_samples, reports, artifacts, total_s)

    failed = False
    for report in reports:
        m_t = report.m_T
        if report.method == "mc":
            m_t_text = "n/a (reference)"
        elif m_t is None and report.extra.get("m_T_per_run"):
            m_t_text = "varies"
        else:
            m_t_text = str(m_t)
        sigma = "-" if report.sigma is None else f"{report.sigma:.3e}"
        print(f"{report.method:<24} mu_Pf={report.pf:.6f} "
              f"sigma_Pf={sigma} m_T={m_t_text}")
        if report.extra.get("errors"):
            failed = True
            for rep, err in sorted(report.extra["errors"].items()):
                print(f"  rep {rep} failed: {err}", file=sys.stderr)
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
