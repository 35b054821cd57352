"""Small dense matrix arithmetic: products, powers, commutators, 2-norms.

Matrices are plain ``numpy.ndarray`` objects of shape ``(d, d)`` and dtype
float64.  ``as_matrix`` is the single validation gate; every public
function here passes its inputs through it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DwellCertError

EXACT_2X2 = "exact2x2"
POWER_ITERATION = "power_iteration"

POWER_ITER_RTOL = 1e-14
POWER_ITER_MAX = 10_000
POWER_ITER_MIN_STEPS = 12
RESTART_SEED = 0xC0FFEE

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class NormValue:
    value: float
    method: str
    relative_error_bound: float

    def __float__(self) -> float:
        return self.value


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a validated square float64 array (copy-free when possible)."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DwellCertError("not-square", f"expected a d x d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DwellCertError("non-finite", "matrix entries must be finite")
    return m


def identity(d: int) -> np.ndarray:
    return np.eye(d)


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DwellCertError("dim-mismatch", f"{a.shape} vs {b.shape}")


def mat_mul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _check_same_dim(a, b)
    return a @ b


def mat_pow(a, k: int) -> np.ndarray:
    """``a`` to the ``k``-th power by repeated left-to-right multiplication."""
    a = as_matrix(a)
    if k < 0:
        raise DwellCertError("negative-power", f"k={k}")
    out = np.eye(a.shape[0])
    for _ in range(k):
        out = out @ a
    return out


def _norm_2x2(a: np.ndarray) -> float:
    # largest root of the characteristic polynomial of a^T a = [[p, r], [r, s]]
    p = a[0, 0] * a[0, 0] + a[1, 0] * a[1, 0]
    s = a[0, 1] * a[0, 1] + a[1, 1] * a[1, 1]
    r = a[0, 0] * a[0, 1] + a[1, 0] * a[1, 1]
    lam = 0.5 * (p + s) + math.hypot(0.5 * (p - s), r)
    return math.sqrt(max(lam, 0.0))


def _power_iteration(gram: np.ndarray, x: np.ndarray):
    """Dominant eigenvalue of the PSD matrix ``gram`` starting from unit ``x``.

    Step ``k`` multiplies by ``gram^(2^k)`` (kept as a running square,
    rescaled to unit max entry), so a spectral gap ratio ``r`` contracts as
    ``r^(2^k)`` instead of ``r^k``.  The estimate is the Rayleigh quotient
    of ``gram`` itself.  Returns ``(eigenvalue, last_relative_change, converged)``.
    """
    g = gram
    mu = 0.0
    change = math.inf
    for it in range(POWER_ITER_MAX):
        y = g @ x
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            # start vector in the null space; caller restarts
            return 0.0, 0.0, False
        x = y / ny
        mu_new = float(x @ (gram @ x))
        change = abs(mu_new - mu)
        if it >= POWER_ITER_MIN_STEPS and change <= POWER_ITER_RTOL * abs(mu_new):
            return mu_new, change / abs(mu_new), True
        mu = mu_new
        g2 = g @ g
        top = float(np.max(np.abs(g2)))
        if top > 0.0:
            g = g2 / top
    return mu, change / max(abs(mu), _EPS), False


def spectral_norm(a) -> NormValue:
    """Largest singular value of ``a``.

    Closed form for ``d <= 2``; symmetric power iteration on ``a^T a`` (with
    repeated squaring, see :func:`_power_iteration`) above that, run once from the normalized all-ones vector and once from a fixed
    pseudo-random vector, keeping the larger converged estimate.
    """
    a = as_matrix(a)
    d = a.shape[0]
    if d == 1:
        return NormValue(abs(float(a[0, 0])), EXACT_2X2, 0.0)
    if d == 2:
        return NormValue(_norm_2x2(a), EXACT_2X2, 8 * _EPS)

    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return NormValue(0.0, POWER_ITERATION, 0.0)
    # unit-scale entries keep a^T a clear of overflow and subnormals
    a = a / scale
    gram = a.T @ a
    starts = [np.ones(d) / math.sqrt(d)]
    v = np.random.default_rng(RESTART_SEED).standard_normal(d)
    starts.append(v / np.linalg.norm(v))

    best = None
    for x0 in starts:
        mu, rel, ok = _power_iteration(gram, x0)
        if ok and (best is None or mu > best[0]):
            best = (mu, rel)
    if best is None:
        raise DwellCertError(
            "norm-no-converge",
            f"power iteration did not converge in {POWER_ITER_MAX} iterations",
        )
    mu, rel = best
    # sigma = sqrt(mu) halves the relative error of the eigenvalue estimate
    return NormValue(scale * math.sqrt(max(mu, 0.0)), POWER_ITERATION, max(0.5 * rel, 4 * _EPS))


def norm2(a) -> float:
    """Shorthand for ``spectral_norm(a).value``."""
    return spectral_norm(a).value


def commutator(a, b, p: int, q: int) -> np.ndarray:
    """``a^p b^q - b^q a^p``."""
    a, b = as_matrix(a), as_matrix(b)
    _check_same_dim(a, b)
    if p < 1 or q < 1:
        raise DwellCertError("bad-power", f"p={p}, q={q} must be positive")
    ap = mat_pow(a, p)
    bq = mat_pow(b, q)
    return ap @ bq - bq @ ap
