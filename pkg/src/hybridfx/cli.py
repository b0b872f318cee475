"""Command line interface: ``python3 -m hybridfx <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import combine as cmb
from . import evaluate_rank as er
from . import ga_tune, markov_correct as mk, phase_space as ps, pipeline as pl, svm_core
from . import wavelet as wv
from .config import RunConfig, load_config
from .errors import ConfigError, DataError, NumericError
from .series_store import SplitSpec, load_csv

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
DEFAULT_DATA = Path(__file__).parent / "data" / "eurusd_synthetic.csv"


def _int_list(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif "-" in part[1:]:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _config(args) -> RunConfig:
    return load_config(args.config) if getattr(args, "config", None) else RunConfig()


def _frame(args):
    return load_csv(args.data or DEFAULT_DATA)


def _write_rows(rows, out):
    if out:
        with open(out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    else:
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)


def _fit_window(args, frame):
    n = len(frame)
    sample = args.sample or n
    if sample > n:
        raise DataError(f"sample {sample} exceeds series length {n}")
    return np.asarray(frame.series(args.channel).values[n - sample:], dtype=float)


# ---- subcommands --------------------------------------------------------

def cmd_analyze(args) -> int:
    y = _fit_window(args, _frame(args))
    prof = ps.ami(y, args.max_lag, args.bins)
    tau = ps.select_delay(prof)
    f = ps.fnn(y, tau, args.max_dim)
    dim = ps.select_dim(f)
    print("lag,I_bits")
    for l, v in zip(prof.lags, prof.values):
        print(f"{l},{v:.6f}")
    print("dim,false_percent")
    for d, p in zip(f.dims, f.false_percent):
        print(f"{d},{p:.4f}")
    print(f"tau = {tau}\ndim = {dim}")
    return EXIT_OK


def cmd_denoise(args) -> int:
    frame = _frame(args)
    s = frame.series(args.channel)
    spec = wv.WaveletSpec(args.family, args.level, args.rule, args.extension)
    out = wv.denoise(s, spec)
    _write_rows([["date", "value"]] + [[d.isoformat(), repr(float(v))]
                                       for d, v in zip(out.timestamps, out.values)], args.out)
    return EXIT_OK


def _kernel(args, a) -> svm_core.KernelSpec:
    return svm_core.KernelSpec(args.kernel, a)


def cmd_train(args) -> int:
    y = _fit_window(args, _frame(args))
    X, t = ps.supervised_pairs(y, args.tau, args.dim)
    model = svm_core.train(X, t, _kernel(args, args.a), args.gamma)
    svm_core.save_model(model, args.model_out)
    fit = svm_core.predict(model, X)
    print(f"trained on {len(t)} pairs; in-sample RMSE {np.sqrt(np.mean((fit - t) ** 2)):.6g}")
    return EXIT_OK


def cmd_tune(args) -> int:
    cfg = _config(args)
    y = _fit_window(args, _frame(args))
    X, t = ps.supervised_pairs(y, args.tau, args.dim)
    fit_set, cal_set = ga_tune.calibration_split(X, t, cfg.ga.calibration_fraction)
    ga = dataclasses.replace(cfg.ga, rng_seed=args.seed)
    rep = ga_tune.tune(fit_set, cal_set, args.kernel, ga)
    a, gamma = rep.best_params
    print(f"a = {a!r}\ngamma = {gamma!r}\nfitness = {rep.best_fitness!r}")
    print(f"rmse_calibration = {rep.rmse_calibration!r}\nrmse_fitting = {rep.rmse_fitting!r}")
    return EXIT_OK


def cmd_forecast(args) -> int:
    model = svm_core.load_model(args.model)
    y = _fit_window(args, _frame(args))
    out = svm_core.forecast_from_history(model, y, args.tau, args.horizon)
    _write_rows([["step", "forecast"]] + [[i + 1, repr(float(v))] for i, v in enumerate(out)],
                args.out)
    return EXIT_OK


def cmd_correct(args) -> int:
    cfg = _config(args)
    frame = _frame(args)
    split = SplitSpec(args.sample, args.horizon)
    start, origin, stop = split.bounds(len(frame))
    path = pl.correction_path(frame.slice(start, origin), split.horizon, (args.a, args.gamma), cfg,
                              denoise=not args.no_denoise)
    rows = [["date", "svr", "fuzzy", "weighted", "comprehensive"]]
    for i, d in enumerate(frame.timestamps[origin:stop]):
        rows.append([d.isoformat(), *(repr(float(v[i])) for v in
                                      (path.svr, path.fuzzy, path.weighted, path.comprehensive))])
    _write_rows(rows, args.out)
    return EXIT_OK


def cmd_markov_test(args) -> int:
    cfg = _config(args)
    frame = _frame(args)
    n = len(frame)
    sample = args.sample or n
    if sample > n:
        raise DataError(f"sample {sample} exceeds series length {n}")
    cm = pl.fit_close(frame.slice(n - sample, n), (args.a, args.gamma), cfg, denoise=False)
    fitted = cm.fitted()
    first = int(np.flatnonzero(np.isfinite(fitted))[0])
    z = mk.residual_series(cm.raw[first - 1:], np.concatenate([[0.0], fitted[first:]]))
    k = args.k or cfg.markov.state_count
    part = mk.partition(z, k, cfg.markov.partition_rule)
    res = mk.markov_property_test(part.state_of(z), k, args.alpha)
    print(f"chi_square = {res.chi_square:.6f}\ndof = {res.dof}\n"
          f"critical_value = {res.critical_value:.6f}\nalpha = {res.alpha}")
    print("verdict = " + ("markov" if res.is_markov else "not markov"))
    return EXIT_OK


def _read_forecasts(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise DataError(f"{path}: need a header and at least two rows")
    head = rows[0]
    if "actual" not in head:
        raise DataError(f"{path}: missing 'actual' column")
    ai = head.index("actual")
    fcols = [i for i, h in enumerate(head) if i != ai and h != "date"]
    try:
        actual = np.array([float(r[ai]) for r in rows[1:]])
        F = np.array([[float(r[i]) for r in rows[1:]] for i in fcols])
    except (ValueError, IndexError) as exc:
        raise DataError(f"{path}: {exc}") from None
    dates = [r[head.index("date")] for r in rows[1:]] if "date" in head else None
    return dates, cmb.ForecastMatrix(actual, F, tuple(head[i] for i in fcols))


def cmd_combine(args) -> int:
    cfg = _config(args)
    _, fm = _read_forecasts(args.forecasts)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    rho, classes = cfg.combine.identification_coefficient, cfg.combine.rough_set_classes
    rows = [["scheme", *fm.labels]]
    combined = {}
    for m in methods:
        w = cmb.fit_weights(fm, m, rho, classes)
        rows.append([cmb.scheme_label(m, classes), *(f"{x:.4f}" for x in w.weights)])
        combined[cmb.scheme_label(m, classes)] = cmb.combine(fm, w, args.form)
    if args.two_stage:
        model = cmb.fit_two_stage(fm, methods, pl.STAGE2_ORDER, rho, classes)
        inner = [cmb.scheme_label(m, classes) for m in model.stage1_methods]
        rows.append([])
        rows.append(["stage2", *inner])
        for k, w in model.stage2.items():
            lab = "stage2:" + cmb.scheme_label(k, classes)
            rows.append([lab, *(f"{x:.4f}" for x in w.weights)])
        combined.update({"stage2:" + cmb.scheme_label(k, classes): v
                         for k, v in model.apply(fm).items()})
    _write_rows(rows, None)
    if args.out:
        labs = list(combined)
        _write_rows([["t", "actual", *labs]] + [
            [i + 1, repr(float(fm.actual[i])), *(repr(float(combined[l][i])) for l in labs)]
            for i in range(fm.n)], args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    _, fm = _read_forecasts(args.forecasts)
    y0 = args.y0 if args.y0 is not None else float(fm.actual[0])
    rows = [["method", *er.HEADLINE]]
    for lab, f in zip(fm.labels, fm.forecasts):
        rec = er.performance(fm.actual, f, y0, cfg.evaluate.feasibility_threshold, cfg.evaluate.theil)
        rows.append([lab, *(f"{v:.4f}" for v in rec.headline())])
    _write_rows(rows, args.out)
    return EXIT_OK


def cmd_rank(args) -> int:
    cfg = _config(args)
    with open(args.performance, newline="") as fh:
        rows = list(csv.reader(fh))
    head = rows[0]
    try:
        idx = [head.index(h) for h in er.HEADLINE]
        labels = [r[0] for r in rows[1:] if r]
        values = np.array([[float(r[i]) for i in idx] for r in rows[1:] if r])
    except (ValueError, IndexError) as exc:
        raise DataError(f"{args.performance}: {exc}") from None
    weights = ([float(x) for x in args.weights.split(",")] if args.weights
               else cfg.evaluate.subjective_weights)
    rep = er.rank_all(er.DecisionMatrix(tuple(labels), values, np.asarray(weights)),
                      cfg.combine.identification_coefficient)
    out = [head + ["R1", "R2", "R3", "R"]]
    for i, r in enumerate(r for r in rows[1:] if r):
        out.append(r + [rep.r1[i], rep.r2[i], rep.r3[i], rep.comprehensive[i]])
    _write_rows(out, args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    frame = _frame(args)
    methods = _int_list(args.methods)
    rep = pl.run(frame, methods, args.sample, args.horizon, cfg, seed=args.seed,
                 two_stage=not args.no_two_stage)
    files = pl.emit_report(rep, args.out)
    for p in files:
        print(p)
    return EXIT_OK


# ---- parser -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hybridfx", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(sp, sample=True):
        sp.add_argument("--data", type=Path, help="OHLC or date,value CSV (default: bundled series)")
        sp.add_argument("--channel", default="close", choices=("open", "high", "low", "close"))
        if sample:
            sp.add_argument("--sample", type=int, default=None, help="use the last N points")
        sp.add_argument("--config", type=Path)

    def model_args(sp):
        sp.add_argument("--kernel", default="mexican_hat_wavelet", choices=svm_core.KINDS)
        sp.add_argument("--tau", type=int, default=1)
        sp.add_argument("--dim", type=int, default=4)

    sp = sub.add_parser("analyze", help="AMI delay and FNN dimension")
    data_args(sp)
    sp.add_argument("--max-lag", type=int, default=20)
    sp.add_argument("--bins", type=int, default=16)
    sp.add_argument("--max-dim", type=int, default=8)
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("denoise", help="wavelet denoising of one channel")
    data_args(sp, sample=False)
    sp.add_argument("--family", default="coif3")
    sp.add_argument("--level", type=int, default=3)
    sp.add_argument("--rule", default="universal_soft", choices=("universal_soft", "universal_hard"))
    sp.add_argument("--extension", default="symmetric", choices=("symmetric", "periodization"))
    sp.add_argument("--out", type=Path)
    sp.set_defaults(fn=cmd_denoise)

    sp = sub.add_parser("train", help="train an LS-SVM on the delay embedding")
    data_args(sp)
    model_args(sp)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--gamma", type=float, required=True)
    sp.add_argument("--model-out", type=Path, required=True)
    sp.set_defaults(fn=cmd_train)

    sp = sub.add_parser("tune", help="GA search for (a, gamma)")
    data_args(sp)
    model_args(sp)
    sp.add_argument("--seed", type=int, required=True)
    sp.set_defaults(fn=cmd_tune)

    sp = sub.add_parser("forecast", help="recursive forecast from a saved model")
    data_args(sp)
    sp.add_argument("--model", type=Path, required=True)
    sp.add_argument("--tau", type=int, default=1)
    sp.add_argument("--horizon", type=int, required=True)
    sp.add_argument("--out", type=Path)
    sp.set_defaults(fn=cmd_forecast)

    for name, fn, help_ in (("correct", cmd_correct, "Markov-corrected forecast of the last window"),
                            ("markov-test", cmd_markov_test, "chi-square Markov property test")):
        sp = sub.add_parser(name, help=help_)
        data_args(sp, sample=(name == "markov-test"))
        sp.add_argument("--a", type=float, default=0.1245)
        sp.add_argument("--gamma", type=float, default=639.559)
        if name == "correct":
            sp.add_argument("--sample", type=int, default=70)
            sp.add_argument("--horizon", type=int, default=22)
            sp.add_argument("--no-denoise", action="store_true")
            sp.add_argument("--out", type=Path)
        else:
            sp.add_argument("--k", type=int, default=None)
            sp.add_argument("--alpha", type=float, default=0.05)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("combine", help="combination weights for a forecasts CSV")
    sp.add_argument("--forecasts", type=Path, required=True, help="CSV with actual and forecast columns")
    sp.add_argument("--methods", default="rs,gro,grd,lsm,ed")
    sp.add_argument("--form", default="arithmetic", choices=cmb.FORMS)
    sp.add_argument("--two-stage", action="store_true")
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out", type=Path, help="write combined forecasts here")
    sp.set_defaults(fn=cmd_combine)

    sp = sub.add_parser("evaluate", help="performance table for a forecasts CSV")
    sp.add_argument("--forecasts", type=Path, required=True)
    sp.add_argument("--y0", type=float, default=None, help="actual value before the window")
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out", type=Path)
    sp.set_defaults(fn=cmd_evaluate)

    sp = sub.add_parser("rank", help="append R1/R2/R3/R to a performance CSV")
    sp.add_argument("--performance", type=Path, required=True)
    sp.add_argument("--weights", default=None, help="five comma-separated criterion weights")
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out", type=Path)
    sp.set_defaults(fn=cmd_rank)

    sp = sub.add_parser("run", help="methods 1-7 end to end with report files")
    sp.add_argument("--data", type=Path)
    sp.add_argument("--methods", default="1,2,3,4,5,6,7")
    sp.add_argument("--sample", type=int, default=70)
    sp.add_argument("--horizon", type=int, default=22)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--config", type=Path)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--no-two-stage", action="store_true")
    sp.set_defaults(fn=cmd_run)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
