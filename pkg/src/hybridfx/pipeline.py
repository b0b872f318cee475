"""End-to-end forecasting methods 1-7, two-stage combining and report files.

Method table (fixed):

    id  input   wavelet  markov  param sets        combination
    1   ohlc    yes      yes     method1           -
    2   close   yes      yes     method3, method4  avg
    3   close   yes      yes     method3           -
    4   close   no       no      method4           -
    5   close   yes      yes     method3, method4  grd
    6   close   yes      yes     method3, method4  lsm
    7   close   yes      yes     method3, method4  gro

Combination weights for methods 5-7 are fitted on the window that ends
where the test window's fitting window ends (the previous rolling window)
and applied to the test window, so test values never inform the weights.
"""
from __future__ import annotations

import csv
import dataclasses
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import combine as cmb
from . import evaluate_rank as er
from . import ga_tune, markov_correct as mk, phase_space as ps, svm_core, wavelet as wv
from .config import RunConfig
from .errors import DataError, HybridFxError, NumericError
from .series_store import OhlcFrame, SplitSpec


@dataclass(frozen=True)
class MethodSpec:
    id: int
    input_mode: str  # ohlc_vector | close_embedded
    denoise: bool
    markov_correct: bool
    combination: str  # none | avg | grd | lsm | gro
    param_sets: tuple  # names of SvmConfig fields holding (a, gamma)


METHODS = {
    1: MethodSpec(1, "ohlc_vector", True, True, "none", ("method1_params",)),
    2: MethodSpec(2, "close_embedded", True, True, "avg", ("method3_params", "method4_params")),
    3: MethodSpec(3, "close_embedded", True, True, "none", ("method3_params",)),
    4: MethodSpec(4, "close_embedded", False, False, "none", ("method4_params",)),
    5: MethodSpec(5, "close_embedded", True, True, "grd", ("method3_params", "method4_params")),
    6: MethodSpec(6, "close_embedded", True, True, "lsm", ("method3_params", "method4_params")),
    7: MethodSpec(7, "close_embedded", True, True, "gro", ("method3_params", "method4_params")),
}

STAGE2_ORDER = ("rs", "grd", "lsm", "ed", "gro")  # rows of the two-stage table
STAGE2_COLUMNS = ("grd", "lsm", "ed", "rs", "gro")  # weight columns over stage-1 models
STAGE1_COLUMNS = ("rs", "gro", "grd", "lsm", "ed")
# GA streams are keyed by parameter set, so methods sharing a base path share its tuning
PARAM_SEED_OFFSET = {"method1_params": 1, "method3_params": 3, "method4_params": 4}


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except HybridFxError as exc:
        if getattr(exc, "stage", None):
            raise
        err = type(exc)(f"{name}: {exc}")
        err.stage = name
        raise err from exc


# ---- single forecast path ---------------------------------------------

@dataclass(frozen=True)
class PathResult:
    """One LS-SVM parameter set run on one window."""

    svr: np.ndarray
    final: np.ndarray
    params: tuple
    tau: int
    dim: int


def _embedding(values: np.ndarray, cfg: RunConfig) -> tuple[int, int]:
    e = cfg.embedding
    if e.mode == "fixed":
        return e.tau, e.dim
    tau = ps.select_delay(ps.ami(values, min(e.max_lag, len(values) // 4), e.ami_bins), e.delay_rule)
    prof = ps.fnn(values, tau, e.max_dim, e.fnn_threshold_percent, e.fnn_distance_threshold)
    return tau, ps.select_dim(prof)


def _kernel(cfg: RunConfig, a: float) -> svm_core.KernelSpec:
    s = cfg.svm
    return svm_core.KernelSpec(s.kernel_kind, a, s.poly_offset, s.poly_degree, s.sigmoid_scale)


def _tuned(X, t, cfg: RunConfig, params: tuple, seed_offset: int) -> tuple:
    if not cfg.svm.tune:
        return params
    fit_set, cal_set = ga_tune.calibration_split(X, t, cfg.ga.calibration_fraction)
    ga = dataclasses.replace(cfg.ga, rng_seed=cfg.ga.rng_seed + seed_offset)
    rep = ga_tune.tune(fit_set, cal_set, cfg.svm.kernel_kind, ga, _kernel(cfg, 1.0))
    return rep.best_params


def _denoised(x: np.ndarray, cfg: RunConfig) -> np.ndarray:
    w = cfg.wavelet
    return wv.denoise(x, wv.WaveletSpec(w.family, w.level, w.threshold_rule, w.extension))


@dataclass(frozen=True)
class CloseModel:
    """LS-SVM fitted on one close-only window."""

    raw: np.ndarray  # observed closes
    history: np.ndarray  # denoised (or raw) closes fed to the model
    model: svm_core.LsSvmModel
    inputs: np.ndarray
    tau: int
    dim: int

    def fitted(self) -> np.ndarray:
        """In-sample one-step fits aligned to ``raw`` (NaN where no input row exists)."""
        out = np.full(len(self.raw), np.nan)
        out[(self.dim - 1) * self.tau + 1:] = svm_core.predict(self.model, self.inputs)
        return out

    def forecast(self, horizon: int) -> np.ndarray:
        return _stage("svm_core", svm_core.forecast_from_history, self.model, self.history,
                      self.tau, horizon)


def fit_close(fit_frame: OhlcFrame, params: tuple, cfg: RunConfig, *, denoise: bool,
              seed_offset: int = 0) -> CloseModel:
    y = np.asarray(fit_frame.close, dtype=float)
    h = _stage("wavelet", _denoised, y, cfg) if denoise else y
    tau, dim = _stage("phase_space", _embedding, h, cfg)
    X, t = _stage("phase_space", ps.supervised_pairs, h, tau, dim)
    a, gamma = _stage("ga_tune", _tuned, X, t, cfg, params, seed_offset)
    model = _stage("svm_core", svm_core.train, X, t, _kernel(cfg, a), gamma)
    return CloseModel(y, h, model, X, tau, dim)


def correction_path(fit_frame: OhlcFrame, horizon: int, params: tuple, cfg: RunConfig, *,
                    denoise: bool = True) -> mk.CorrectionPath:
    cm = fit_close(fit_frame, params, cfg, denoise=denoise)
    return _stage("markov_correct", markov_path, cm.raw, cm.fitted(), cm.forecast(horizon), cfg)


def forecast_close(fit_frame: OhlcFrame, horizon: int, params: tuple, cfg: RunConfig, *,
                   denoise: bool, markov: bool, seed_offset: int = 0) -> PathResult:
    """Delay-embedded close-only path: [denoise] -> LS-SVM -> recursive forecast -> [Markov]."""
    cm = fit_close(fit_frame, params, cfg, denoise=denoise, seed_offset=seed_offset)
    svr = cm.forecast(horizon)
    final = svr
    if markov:
        final = _stage("markov_correct", markov_path, cm.raw, cm.fitted(), svr, cfg).comprehensive
    k = cm.model.kernel
    return PathResult(svr, final, (float(k.param), float(cm.model.gamma)), cm.tau, cm.dim)


def forecast_ohlc(fit_frame: OhlcFrame, horizon: int, params: tuple, cfg: RunConfig, *,
                  denoise: bool, markov: bool, seed_offset: int = 0) -> PathResult:
    """Same-day (open, high, low, close) rows predict the next close.

    Beyond the first step the unknown open/high/low are placed at the last
    observed offsets from the close.
    """
    M = fit_frame.matrix()  # (N, 4) open, high, low, close
    y = M[:, 3].copy()
    if denoise:
        M = np.column_stack([_stage("wavelet", _denoised, M[:, j], cfg) for j in range(4)])
    X, t = M[:-1], M[1:, 3]
    a, gamma = _stage("ga_tune", _tuned, X, t, cfg, params, seed_offset)
    model = _stage("svm_core", svm_core.train, X, t, _kernel(cfg, a), gamma)
    offsets = M[-1] - M[-1, 3]
    row = M[-1]
    svr = np.empty(horizon)
    for s in range(horizon):
        svr[s] = svm_core.predict(model, row)
        row = offsets + svr[s]
    final = svr
    if markov:
        fitted = np.full(len(y), np.nan)
        fitted[1:] = svm_core.predict(model, X)
        final = _stage("markov_correct", markov_path, y, fitted, svr, cfg).comprehensive
    return PathResult(svr, final, (float(a), float(gamma)), 1, 4)


def markov_path(y: np.ndarray, fitted: np.ndarray, svr: np.ndarray,
                cfg: RunConfig) -> mk.CorrectionPath:
    """Residual chain from the in-sample fits, then recursive correction of ``svr``."""
    first = int(np.flatnonzero(np.isfinite(fitted))[0])
    z = mk.residual_series(y[first - 1:], np.concatenate([[0.0], fitted[first:]]))
    m = cfg.markov
    part = mk.partition(z, m.state_count, m.partition_rule)
    path = mk.correct_recursive(z, part, svr, y[-1], m.max_order, m.midpoint_reading)
    if not np.all(np.isfinite(path.comprehensive)):
        raise NumericError("non-finite corrected forecast")
    return path


def base_paths(frame: OhlcFrame, spec: MethodSpec, split: SplitSpec, cfg: RunConfig) -> list:
    start, origin, _ = split.bounds(len(frame))
    fit = frame.slice(start, origin)
    run = forecast_ohlc if spec.input_mode == "ohlc_vector" else forecast_close
    out = []
    for name in spec.param_sets:
        params = getattr(cfg.svm, name)
        out.append(run(fit, split.horizon, params, cfg, denoise=spec.denoise,
                       markov=spec.markov_correct, seed_offset=PARAM_SEED_OFFSET[name]))
    return out


def previous_split(split: SplitSpec, total: int) -> SplitSpec:
    """The rolling window one horizon earlier; its test window ends at this one's origin."""
    _, origin, _ = split.bounds(total)
    prev = SplitSpec(split.fit_length, split.horizon, origin - split.horizon)
    prev.bounds(total)
    return prev


@dataclass(frozen=True)
class MethodResult:
    id: int
    forecast: np.ndarray
    weights: object  # WeightVector or None
    params: tuple


def run_method(frame: OhlcFrame, spec: MethodSpec, split: SplitSpec, cfg: RunConfig) -> MethodResult:
    paths = base_paths(frame, spec, split, cfg)
    params = tuple(p.params for p in paths)
    if spec.combination == "none":
        return MethodResult(spec.id, paths[0].final, None, params)
    if spec.combination == "avg":
        w = cmb.weights_average(len(paths))
    else:
        prev = _stage("combine", previous_split, split, len(frame))
        earlier = base_paths(frame, spec, prev, cfg)
        _, o, stop = prev.bounds(len(frame))
        fm = cmb.ForecastMatrix(frame.close[o:stop], np.array([p.final for p in earlier]))
        w = _stage("combine", cmb.fit_weights, fm, spec.combination,
                   cfg.combine.identification_coefficient, cfg.combine.rough_set_classes)
    fm = cmb.ForecastMatrix(np.zeros(split.horizon), np.array([p.final for p in paths]))
    return MethodResult(spec.id, cmb.combine_arithmetic(fm, w), w, params)


# ---- two-stage ---------------------------------------------------------

@dataclass(frozen=True)
class TwoStageResult:
    base_ids: tuple
    base_forecasts: np.ndarray  # (2, h) on the test window
    model: cmb.TwoStageModel
    stage1_forecasts: dict  # scheme -> sequence on the test window
    stage2_forecasts: dict


def _method_forecast(frame, mid, split, cfg) -> np.ndarray:
    return run_method(frame, METHODS[mid], split, cfg).forecast


def run_two_stage(frame: OhlcFrame, split: SplitSpec, cfg: RunConfig) -> TwoStageResult:
    base = tuple(cfg.combine.two_stage_base)
    prev = _stage("two_stage", previous_split, split, len(frame))
    _, o_prev, stop_prev = prev.bounds(len(frame))
    rho, classes = cfg.combine.identification_coefficient, cfg.combine.rough_set_classes
    fit_fm = cmb.ForecastMatrix(frame.close[o_prev:stop_prev],
                                np.array([_method_forecast(frame, m, prev, cfg) for m in base]),
                                tuple(str(m) for m in base))
    model = _stage("combine", cmb.fit_two_stage, fit_fm, STAGE1_COLUMNS, STAGE2_ORDER, rho, classes)
    _, origin, stop = split.bounds(len(frame))
    test = np.array([_method_forecast(frame, m, split, cfg) for m in base])
    test_fm = cmb.ForecastMatrix(frame.close[origin:stop], test, fit_fm.labels)
    s1 = {w.method: cmb.combine_arithmetic(test_fm, w) for w in model.stage1}
    s2 = model.apply(test_fm)
    return TwoStageResult(base, test, model, s1, s2)


# ---- full run and report ------------------------------------------------

@dataclass
class RunReport:
    dates: tuple
    actual: np.ndarray
    y0: float
    methods: dict = field(default_factory=dict)  # id -> MethodResult
    performance: dict = field(default_factory=dict)  # row label -> PerformanceRecord
    ranks: dict = field(default_factory=dict)  # group -> RankReport
    two_stage: TwoStageResult | None = None
    config: RunConfig = field(default_factory=RunConfig)
    seed: int = 0
    sample: int = 0
    horizon: int = 0


def _perf(actual, forecast, y0, cfg: RunConfig) -> er.PerformanceRecord:
    e = cfg.evaluate
    return er.performance(actual, forecast, y0, e.feasibility_threshold, e.theil)


def _rank_group(labels, records, cfg: RunConfig):
    if len(labels) < 2:
        return None
    dm = er.DecisionMatrix.from_records(labels, records, cfg.evaluate.subjective_weights)
    try:
        return er.rank_all(dm, cfg.combine.identification_coefficient)
    except DataError:
        return None


def run(frame: OhlcFrame, methods, sample: int, horizon: int, cfg: RunConfig, seed: int = 0,
        two_stage: bool = True) -> RunReport:
    cfg = dataclasses.replace(cfg, ga=dataclasses.replace(cfg.ga, rng_seed=seed))
    split = SplitSpec(sample, horizon)
    _, origin, stop = split.bounds(len(frame))
    actual = np.asarray(frame.close[origin:stop], dtype=float)
    y0 = float(frame.close[origin - 1])
    rep = RunReport(tuple(frame.timestamps[origin:stop]), actual, y0, config=cfg, seed=seed,
                    sample=sample, horizon=horizon)
    for mid in methods:
        if mid not in METHODS:
            raise DataError(f"unknown method id {mid}; choose from 1..7")
        rep.methods[mid] = run_method(frame, METHODS[mid], split, cfg)
        rep.performance[str(mid)] = _perf(actual, rep.methods[mid].forecast, y0, cfg)
    labels = [str(m) for m in rep.methods]
    r = _rank_group(labels, [rep.performance[l] for l in labels], cfg)
    if r is not None:
        rep.ranks["methods"] = r
    if two_stage and methods:
        ts = run_two_stage(frame, split, cfg)
        rep.two_stage = ts
        s1_labels, s2_labels = [], []
        for k in STAGE1_COLUMNS:
            lab = f"stage1:{cmb.scheme_label(k, cfg.combine.rough_set_classes)}"
            rep.performance[lab] = _perf(actual, ts.stage1_forecasts[k], y0, cfg)
            s1_labels.append(lab)
        for k in STAGE2_ORDER:
            lab = f"stage2:{cmb.scheme_label(k, cfg.combine.rough_set_classes)}"
            rep.performance[lab] = _perf(actual, ts.stage2_forecasts[k], y0, cfg)
            s2_labels.append(lab)
        for group, labs in (("stage1", s1_labels), ("stage2", s2_labels)):
            r = _rank_group(labs, [rep.performance[l] for l in labs], cfg)
            if r is not None:
                rep.ranks[group] = r
    return rep


def _fmt(v: float) -> str:
    return f"{float(v):.4f}"


def _write(path: Path, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    path.write_text(buf.getvalue())


def emit_report(rep: RunReport, out_dir) -> list:
    """Write the report files; returns the paths written."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from None
    written = []

    def emit(name, rows):
        p = out / name
        try:
            _write(p, rows)
        except OSError as exc:
            raise DataError(f"cannot write {p}: {exc}") from None
        written.append(p)

    snapshot = (f"# seed = {rep.seed}\n# sample = {rep.sample}\n# horizon = {rep.horizon}\n"
                + rep.config.to_text())
    (out / "config.snapshot").write_text(snapshot)
    written.append(out / "config.snapshot")
    if not rep.methods:
        return written

    ids = list(rep.methods)
    emit("forecasts.csv", [["date", "actual", *(f"method{m}" for m in ids)]] + [
        [d.isoformat(), repr(float(rep.actual[i])),
         *(repr(float(rep.methods[m].forecast[i])) for m in ids)]
        for i, d in enumerate(rep.dates)])

    perf_head = ["method", *er.HEADLINE]
    perf_rows = [[lab, *(_fmt(v) for v in rec.headline())] for lab, rec in rep.performance.items()]
    emit("performance.csv", [perf_head] + perf_rows)
    full = list(dataclasses.asdict(next(iter(rep.performance.values()))).keys())
    emit("performance.raw.csv", [["method", *full]] + [
        [lab, *(repr(float(getattr(rec, k))) for k in full)] for lab, rec in rep.performance.items()])

    def padded(xs, width, fmt):
        return [fmt(x) for x in xs] + [""] * (width - len(xs))

    raw = lambda x: repr(float(x))
    w_rows, w_raw = [["method", "scheme", "w1", "w2", "a1", "gamma1", "a2", "gamma2"]], []
    for m in ids:
        res = rep.methods[m]
        ws = res.weights.weights if res.weights is not None else np.ones(1)
        scheme = res.weights.method if res.weights is not None else "single"
        prm = [v for p in res.params for v in p]
        w_rows.append([m, scheme, *padded(ws, 2, _fmt), *padded(prm, 4, _fmt)])
        w_raw.append([m, scheme, *padded(ws, 2, raw), *padded(prm, 4, raw)])
    if rep.two_stage is not None:
        ts = rep.two_stage
        for w in ts.model.stage1:
            w_rows.append([f"stage1:{w.method}", w.method, *(_fmt(x) for x in w.weights)])
            w_raw.append([f"stage1:{w.method}", w.method, *(repr(float(x)) for x in w.weights)])
        order = [ts.model.stage1_methods.index(c) for c in STAGE2_COLUMNS]
        for k in STAGE2_ORDER:
            wv_ = ts.model.stage2[k].weights[order]
            w_rows.append([f"stage2:{k}", k, *(_fmt(x) for x in wv_)])
            w_raw.append([f"stage2:{k}", k, *(repr(float(x)) for x in wv_)])
    emit("weights.csv", w_rows)
    emit("weights.raw.csv", [w_rows[0]] + w_raw)

    r_rows = [["group", "method", "R1", "R2", "R3", "R"]]
    for group, rr in rep.ranks.items():
        for i, lab in enumerate(rr.alternatives):
            r_rows.append([group, lab, rr.r1[i], rr.r2[i], rr.r3[i], rr.comprehensive[i]])
    emit("ranks.csv", r_rows)

    if rep.two_stage is not None:
        emit("combination.csv", _stage1_table(rep))
        emit("two_stage.csv", _stage2_table(rep))
    return written


def _stage1_table(rep: RunReport) -> list:
    """Single-stage layout: base rows carry their weight under each scheme."""
    ts = rep.two_stage
    cls = rep.config.combine.rough_set_classes
    labels = [cmb.scheme_label(k, cls) for k in STAGE1_COLUMNS]
    rows = [["method", *er.HEADLINE, *labels]]
    by_scheme = {w.method: w.weights for w in ts.model.stage1}
    for j, mid in enumerate(ts.base_ids):
        rec = _perf(rep.actual, ts.base_forecasts[j], rep.y0, rep.config)
        rows.append([mid, *(_fmt(v) for v in rec.headline()),
                     *(_fmt(by_scheme[k][j]) for k in STAGE1_COLUMNS)])
    for k, lab in zip(STAGE1_COLUMNS, labels):
        rec = rep.performance[f"stage1:{lab}"]
        rows.append([lab, *(_fmt(v) for v in rec.headline()), *[""] * len(labels)])
    return rows


def _stage2_table(rep: RunReport) -> list:
    """Two-stage layout: one row per stage-2 scheme, weights over the stage-1 models."""
    ts = rep.two_stage
    cls = rep.config.combine.rough_set_classes
    cols = [cmb.scheme_label(k, cls) for k in STAGE2_COLUMNS]
    order = [ts.model.stage1_methods.index(c) for c in STAGE2_COLUMNS]
    rows = [["method", *er.HEADLINE, *cols]]
    for k in STAGE2_ORDER:
        lab = cmb.scheme_label(k, cls)
        rec = rep.performance[f"stage2:{lab}"]
        rows.append([lab, *(_fmt(v) for v in rec.headline()),
                     *(_fmt(x) for x in ts.model.stage2[k].weights[order])])
    return rows
