"""Least-squares SVM regression.

Training solves the bordered KKT system::

    [ 0   1^T          ] [b    ]   [0]
    [ 1   Omega + I/g  ] [alpha] = [y]

with ``Omega_ij = K(x_i, x_j)``. The Mexican-hat wavelet kernel is the
product over coordinates of ``(1 - u^2) exp(-u^2 / 2)``, ``u = (x_i - x'_i) / a``,
with a single width ``a`` shared by every coordinate.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import DataError, NumericError

KINDS = ("rbf", "polynomial", "sigmoid", "mexican_hat_wavelet")
MERCER_KINDS = ("rbf", "mexican_hat_wavelet")


@dataclass(frozen=True)
class KernelSpec:
    """``param`` is the width (a for the wavelet kernel, sigma for rbf)."""

    kind: str = "mexican_hat_wavelet"
    param: float = 1.0
    offset: float = 1.0  # c: polynomial (x.x' + c)^d, sigmoid tanh(b x.x' - c)
    degree: int = 2
    scale: float = 1.0  # b for sigmoid

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown kernel kind {self.kind!r}")
        if self.kind in MERCER_KINDS and not self.param > 0:
            raise DataError(f"kernel width must be positive, got {self.param}")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise DataError("polynomial degree must be a positive integer")

    def to_text(self) -> str:
        return (f"{self.kind} param={self.param!r} offset={self.offset!r} "
                f"degree={int(self.degree)} scale={self.scale!r}")

    @classmethod
    def from_text(cls, text: str) -> "KernelSpec":
        kind, *pairs = text.split()
        kw = dict(p.split("=", 1) for p in pairs)
        return cls(kind, float(kw["param"]), float(kw["offset"]), int(kw["degree"]),
                   float(kw["scale"]))


@dataclass(frozen=True)
class LsSvmModel:
    support_inputs: np.ndarray
    alphas: np.ndarray
    bias: float
    gamma: float
    kernel: KernelSpec

    @property
    def dim(self) -> int:
        return self.support_inputs.shape[1]


def _as_rows(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def cross_kernel(spec: KernelSpec, X, Z) -> np.ndarray:
    """Matrix ``K[i, j] = K(X_i, Z_j)``."""
    X, Z = _as_rows(X), _as_rows(Z)
    if X.shape[1] != Z.shape[1]:
        raise DataError(f"dimension mismatch: {X.shape[1]} vs {Z.shape[1]}")
    if spec.kind in MERCER_KINDS:
        diff = X[:, None, :] - Z[None, :, :]
        if spec.kind == "rbf":
            return np.exp(-np.sum(diff ** 2, axis=2) / (2.0 * spec.param ** 2))
        u2 = (diff / spec.param) ** 2
        return np.prod((1.0 - u2) * np.exp(-u2 / 2.0), axis=2)
    dot = X @ Z.T
    if spec.kind == "polynomial":
        return (dot + spec.offset) ** int(spec.degree)
    return np.tanh(spec.scale * dot - spec.offset)


def kernel_eval(spec: KernelSpec, x, x2) -> float:
    x, x2 = np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(x2, float))
    if x.shape != x2.shape:
        raise DataError(f"dimension mismatch: {x.shape} vs {x2.shape}")
    return float(cross_kernel(spec, x[None, :], x2[None, :])[0, 0])


def gram(spec: KernelSpec, inputs) -> np.ndarray:
    """Symmetric Gram matrix; the lower triangle mirrors the upper bit-exactly."""
    X = _as_rows(inputs)
    if len(X) == 0:
        raise DataError("gram needs at least one input")
    G = cross_kernel(spec, X, X)
    upper = np.triu(G)
    return upper + np.triu(G, 1).T


def min_gram_eigenvalue(spec: KernelSpec, inputs) -> float:
    if spec.kind not in MERCER_KINDS:
        warnings.warn(f"{spec.kind} kernel is not Mercer in general; PSD check skipped",
                      stacklevel=2)
        return float("nan")
    return float(np.linalg.eigvalsh(gram(spec, inputs))[0])


def kkt_system(data_inputs, targets, spec: KernelSpec, gamma: float):
    X = _as_rows(data_inputs)
    y = np.asarray(targets, dtype=float)
    n = len(X)
    A = np.zeros((n + 1, n + 1))
    A[0, 1:] = 1.0
    A[1:, 0] = 1.0
    A[1:, 1:] = gram(spec, X) + np.eye(n) / gamma
    rhs = np.concatenate([[0.0], y])
    return A, rhs


def train(inputs, targets, spec: KernelSpec, gamma: float, *, tol: float = 1e-8) -> LsSvmModel:
    """Fit by LU with partial pivoting, plus iterative refinement if needed."""
    X = _as_rows(inputs)
    y = np.asarray(targets, dtype=float)
    if not gamma > 0:
        raise DataError(f"gamma must be positive, got {gamma}")
    if len(X) < 1 or len(X) != len(y):
        raise DataError("inputs and targets must be nonempty and aligned")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DataError("non-finite training data")
    A, rhs = kkt_system(X, y, spec, gamma)
    lu, piv, info = lapack.dgetrf(A)
    anorm = np.linalg.norm(A, 1)
    rcond = lapack.dgecon(lu, anorm, norm="1")[0] if info == 0 else 0.0
    if info != 0 or rcond < np.finfo(float).eps:
        raise NumericError(f"KKT system singular or nearly so (rcond estimate {rcond:.3e})")
    sol = sla.lu_solve((lu, piv), rhs)
    scale = max(np.linalg.norm(rhs), np.finfo(float).tiny)
    for _ in range(3):
        r = rhs - A @ sol
        if np.linalg.norm(r) / scale <= tol * 1e-2:
            break
        sol = sol + sla.lu_solve((lu, piv), r)
    res = np.linalg.norm(A @ sol - rhs) / scale
    if not np.isfinite(res) or res > tol:
        raise NumericError(f"KKT residual {res:.3e} exceeds {tol:g} (rcond {rcond:.3e})")
    X = X.copy()
    X.setflags(write=False)
    alphas = sol[1:].copy()
    alphas.setflags(write=False)
    return LsSvmModel(X, alphas, float(sol[0]), float(gamma), spec)


def predict(model: LsSvmModel, x) -> np.ndarray | float:
    """Prediction at one input vector (returns float) or a batch of rows."""
    a = np.asarray(x, dtype=float)
    single = a.ndim == 1 and (model.dim > 1 or a.size == 1)
    rows = a[None, :] if single else _as_rows(a)
    if rows.shape[1] != model.dim:
        raise DataError(f"input dimension {rows.shape[1]} != model dimension {model.dim}")
    out = cross_kernel(model.kernel, rows, model.support_inputs) @ model.alphas + model.bias
    return float(out[0]) if single else out


def forecast_iterated(model: LsSvmModel, seed_window, steps: int) -> np.ndarray:
    """Recursive forecast for unit delay.

    ``seed_window`` is ordered newest first, like an embedded row; each
    prediction enters at position 0 and the oldest value drops out.
    """
    w = np.asarray(seed_window, dtype=float).copy()
    if w.shape != (model.dim,):
        raise DataError(f"seed window must have length {model.dim}")
    out = np.empty(steps)
    for s in range(steps):
        out[s] = predict(model, w)
        w = np.concatenate([[out[s]], w[:-1]])
    return out


def forecast_from_history(model: LsSvmModel, history, tau: int, steps: int) -> np.ndarray:
    """Recursive forecast for any delay: predictions extend the history."""
    h = list(np.asarray(history, dtype=float))
    dim = model.dim
    need = (dim - 1) * tau + 1
    if len(h) < need:
        raise DataError(f"history of length {len(h)} too short; need {need}")
    out = np.empty(steps)
    for s in range(steps):
        window = [h[-1 - j * tau] for j in range(dim)]
        out[s] = predict(model, np.array(window))
        h.append(out[s])
    return out


def save_model(model: LsSvmModel, path) -> None:
    """Plain-text model file; floats use repr so reloading is bit-exact."""
    lines = [
        "# lssvm-model v1",
        f"kernel = {model.kernel.to_text()}",
        f"gamma = {model.gamma!r}",
        f"bias = {model.bias!r}",
        f"dim = {model.dim}",
        "index,alpha",
        *(f"{i},{float(a)!r}" for i, a in enumerate(model.alphas)),
        "index," + ",".join(f"x{j}" for j in range(model.dim)),
        *(f"{i}," + ",".join(repr(float(v)) for v in row)
          for i, row in enumerate(model.support_inputs)),
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> LsSvmModel:
    text = Path(path).read_text().splitlines()
    try:
        head = dict(l.split(" = ", 1) for l in text[1:5])
        kernel = KernelSpec.from_text(head["kernel"])
        dim = int(head["dim"])
        i = text.index("index,alpha") + 1
        j = next(k for k in range(i, len(text)) if text[k].startswith("index,x"))
        alphas = np.array([float(l.split(",")[1]) for l in text[i:j]])
        inputs = np.array([[float(v) for v in l.split(",")[1:]] for l in text[j + 1:] if l])
    except (KeyError, ValueError, StopIteration, IndexError) as exc:
        raise DataError(f"{path}: malformed model file ({exc})") from None
    if inputs.shape != (len(alphas), dim):
        raise DataError(f"{path}: inputs shape {inputs.shape} inconsistent with header")
    inputs.setflags(write=False)
    alphas.setflags(write=False)
    return LsSvmModel(inputs, alphas, float(head["bias"]), float(head["gamma"]), kernel)
