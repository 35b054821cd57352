"""Commutator-based GUES certificate for dwell-time constrained switching.

Given a family of Schur matrices ``A_1 .. A_N`` and a minimum dwell time
``delta``, :func:`certify` computes the contraction power ``m`` and bound
``rho``, the scalars ``M, K1, K2, K3``, the commutator bounds
``eps[(p, q)]`` for ``p, q in {1, delta}`` and checks the master inequality::

    rho e^{lam m} + ( K1 K2        eps_dd M^{B+m-2delta}
                    + K1 K3        eps_d1 M^{B+m-delta-1}
                    + (m-K1 delta) K2 eps_1d M^{B+m-delta-1}
                    + (m-K1 delta) K3 eps_11 M^{B+m-2} ) e^{lam (N(m-1)+1)} <= 1

with ``B = (N-1)(m-1)``.  The check is sufficient only; a failed check
never means the switched system is unstable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DwellCertError
from .linalg_core import as_matrix, commutator, norm2

CERTIFIED = "certified"
NOT_CERTIFIED = "not_certified"

AS_PRINTED = "as_printed"
AS_DERIVED = "as_derived"

DEFAULT_M_MAX = 500
LAMBDA_TOL = 1e-9
_TINY_M = 1e-300


@dataclass(frozen=True)
class SubsystemFamily:
    matrices: tuple
    labels: Optional[tuple] = None

    def __init__(self, matrices: Sequence, labels: Optional[Sequence[str]] = None):
        mats = tuple(as_matrix(a).copy() for a in matrices)
        if len(mats) < 2:
            raise DwellCertError("family-too-small", "need at least two subsystem matrices")
        d = mats[0].shape[0]
        for k, a in enumerate(mats):
            if a.shape != (d, d):
                raise DwellCertError("dim-mismatch", f"matrix {k + 1} has shape {a.shape}, expected {(d, d)}")
            a.setflags(write=False)
        if labels is not None and len(labels) != len(mats):
            raise DwellCertError("bad-labels", "one label per matrix required")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "labels", tuple(labels) if labels is not None else None)

    @property
    def d(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def N(self) -> int:
        return len(self.matrices)

    def __getitem__(self, index: int) -> np.ndarray:
        """1-based access, matching the subsystem index set ``{1, .., N}``."""
        if not 1 <= index <= self.N:
            raise DwellCertError("index-out-of-range", f"subsystem {index} not in 1..{self.N}")
        return self.matrices[index - 1]


def _check_delta(delta: int) -> int:
    if int(delta) != delta or delta < 1:
        raise DwellCertError("bad-delta", f"dwell time must be a positive integer, got {delta!r}")
    return int(delta)


@dataclass(frozen=True)
class EpsilonTable:
    """Commutator norm bounds keyed by ``(p, q)`` with ``p, q in {1, delta}``."""

    delta: int
    values: dict

    def __getitem__(self, pq) -> float:
        return self.values[pq]

    @property
    def dd(self) -> float:
        return self.values[(self.delta, self.delta)]

    @property
    def d1(self) -> float:
        return self.values[(self.delta, 1)]

    @property
    def one_d(self) -> float:
        return self.values[(1, self.delta)]

    @property
    def ones(self) -> float:
        return self.values[(1, 1)]

    def as_tuple(self) -> tuple:
        """``(eps_dd, eps_d1, eps_1d, eps_11)``."""
        return (self.dd, self.d1, self.one_d, self.ones)

    @classmethod
    def from_values(cls, delta: int, dd: float, d1: float, one_d: float, ones: float) -> "EpsilonTable":
        delta = _check_delta(delta)
        if delta == 1:
            # all four slots name the same commutator
            vals = {(1, 1): max(dd, d1, one_d, ones)}
        else:
            vals = {(delta, delta): dd, (delta, 1): d1, (1, delta): one_d, (1, 1): ones}
        if any(v < 0 for v in vals.values()):
            raise DwellCertError("negative-eps", "commutator bounds must be nonnegative")
        return cls(delta, vals)


@dataclass
class Certificate:
    delta: int
    verdict: str = NOT_CERTIFIED
    reason: str = ""
    m: Optional[int] = None
    rho: Optional[float] = None
    lam: Optional[float] = None
    M: Optional[float] = None
    K1: Optional[int] = None
    K2: Optional[int] = None
    K3: Optional[int] = None
    eps: Optional[EpsilonTable] = None
    rho_e_lam_m: Optional[float] = None
    theorem_lhs: Optional[float] = None
    corollary_lhs_printed: Optional[float] = None
    corollary_lhs_derived: Optional[float] = None
    c: Optional[float] = None
    provenance: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == CERTIFIED


def schur_screen(fam: SubsystemFamily, m_max: int) -> list:
    """Per matrix: ``True`` if ``||A_i^k|| < 1`` for some ``k <= m_max``.

    ``False`` only means no such ``k`` was found, not that ``A_i`` is unstable.
    """
    if m_max < 1:
        raise DwellCertError("bad-m-max", f"m_max must be >= 1, got {m_max}")
    report = []
    for a in fam.matrices:
        p = np.eye(fam.d)
        found = False
        for _ in range(m_max):
            p = p @ a
            if norm2(p) < 1.0:
                found = True
                break
        report.append(found)
    return report


def find_m(fam: SubsystemFamily, delta: int, m_max: int = DEFAULT_M_MAX) -> tuple:
    """Smallest ``m >= delta`` with ``max_i ||A_i^m|| < 1``; returns ``(m, rho)``."""
    delta = _check_delta(delta)
    powers = [np.eye(fam.d) for _ in fam.matrices]
    for k in range(1, m_max + 1):
        powers = [p @ a for p, a in zip(powers, fam.matrices)]
        if k < delta:
            continue
        rho = max(norm2(p) for p in powers)
        if rho < 1.0:
            return k, rho
    raise DwellCertError("no-contraction-power", f"no m in [{delta}, {m_max}] with max_i ||A_i^m|| < 1")


def compute_k_scalars(N: int, m: int, delta: int) -> tuple:
    """``(K1, K2, K3)`` with ``K1 = floor(m/delta)``."""
    delta = _check_delta(delta)
    if N < 2 or m < delta:
        raise DwellCertError("bad-k-inputs", f"need N >= 2 and m >= delta, got N={N}, m={m}, delta={delta}")
    b = (N - 1) * (m - 1)
    k1 = m // delta
    k2 = b // delta
    k3 = b - k2 * delta
    return k1, k2, k3


def k1_as_printed(m: int, delta: int) -> int:
    """The literal ``floor(delta/m)`` reading of K1, kept for reports only."""
    return delta // m


def epsilon_table(fam: SubsystemFamily, delta: int) -> EpsilonTable:
    """Tightest ``eps[(p, q)]``: max over ordered pairs ``i != j`` of ``||E_ij^{p,q}||``."""
    delta = _check_delta(delta)
    exps = sorted({1, delta})
    vals = {}
    for p in exps:
        for q in exps:
            best = 0.0
            for i, a in enumerate(fam.matrices):
                for j, b in enumerate(fam.matrices):
                    if i != j:
                        best = max(best, norm2(commutator(a, b, p, q)))
            vals[(p, q)] = best
    if delta > 1:
        # the ordered-pair max is symmetric in theory; force it bitwise
        sym = max(vals[(1, delta)], vals[(delta, 1)])
        vals[(1, delta)] = vals[(delta, 1)] = sym
    return EpsilonTable(delta, vals)


def _power(M: float, e: int) -> float:
    if e < 0 and M < _TINY_M:
        raise DwellCertError("degenerate-M", f"M={M} raised to negative exponent {e}")
    return M ** e


def bracket_terms(m: int, M: float, K1: int, K2: int, K3: int, eps: EpsilonTable, N: int) -> tuple:
    """The four commutator contributions of the master inequality, before the
    ``e^{lam (N(m-1)+1)}`` factor, in order ``(dd, d1, 1d, 11)``."""
    delta = eps.delta
    b = (N - 1) * (m - 1)
    single = m - K1 * delta
    parts = (
        (K1 * K2, eps.dd, b + m - 2 * delta),
        (K1 * K3, eps.d1, b + m - delta - 1),
        (single * K2, eps.one_d, b + m - delta - 1),
        (single * K3, eps.ones, b + m - 2),
    )
    out = []
    for count, e, expo in parts:
        # zero-count categories contribute nothing, even where M^expo is undefined
        out.append(0.0 if count == 0 or e == 0 else count * e * _power(M, expo))
    return tuple(out)


def theorem_lhs(m: int, rho: float, lam: float, M: float, K1: int, K2: int, K3: int,
                eps: EpsilonTable, N: int) -> float:
    if lam < 0:
        raise DwellCertError("bad-lambda", f"lambda must be nonnegative, got {lam}")
    bracket = sum(bracket_terms(m, M, K1, K2, K3, eps, N))
    return rho * math.exp(lam * m) + bracket * math.exp(lam * (N * (m - 1) + 1))


def corollary_exponent(N: int, m: int, mode: str = AS_PRINTED) -> int:
    if mode == AS_PRINTED:
        return N * (m - 1) + 1
    if mode == AS_DERIVED:
        return N * (m - 1) - 1
    raise DwellCertError("bad-exponent-mode", mode)


def corollary_lhs(m: int, rho: float, lam: float, M: float, eps: float, N: int,
                  exponent_mode: str = AS_PRINTED) -> float:
    """Arbitrary-switching (``delta = 1``) condition with a single bound ``eps``.

    ``as_printed`` uses ``M^{N(m-1)+1}``; ``as_derived`` uses ``M^{N(m-1)-1}``,
    which is what the ``delta = 1`` specialization of the master inequality
    actually produces.
    """
    e = corollary_exponent(N, m, exponent_mode)
    tail = 0.0 if eps == 0 else m * (N - 1) * (m - 1) * eps * _power(M, e)
    return rho * math.exp(lam * m) + tail * math.exp(lam * (N * (m - 1) + 1))


def _lhs_fn(m, rho, M, K1, K2, K3, eps, N):
    return lambda lam: theorem_lhs(m, rho, lam, M, K1, K2, K3, eps, N)


def check_fixed_lambda(rho: float, m: int, lam: float) -> float:
    """Validate ``lam > 0`` and ``rho e^{lam m} < 1``; returns ``lam``."""
    if not lam > 0:
        raise DwellCertError("bad-lambda", f"lambda must be positive, got {lam}")
    if rho * math.exp(lam * m) >= 1.0:
        raise DwellCertError("lambda-too-large", f"rho*e^(lambda*m) = {rho * math.exp(lam * m):.6g} >= 1")
    return lam


def maximize_lambda(m: int, rho: float, M: float, K1: int, K2: int, K3: int,
                    eps: EpsilonTable, N: int, tol: float = LAMBDA_TOL) -> float:
    """Largest ``lam`` with the master inequality satisfied, by bisection.

    The left-hand side is strictly increasing in ``lam``, so the feasible set
    is an interval ``(0, lam*]`` and bisection on ``(0, -ln(rho)/m)`` finds
    its right end.
    """
    f = _lhs_fn(m, rho, M, K1, K2, K3, eps, N)
    if f(0.0) > 1.0:
        raise DwellCertError("not-certifiable", f"left-hand side at lambda=0+ is {f(0.0):.6g} > 1")
    if rho > 0:
        hi = -math.log(rho) / m
    else:
        hi = 1.0
        while f(hi) <= 1.0 and hi < 1e6:
            hi *= 2.0
    lo = 0.0
    if f(hi) <= 1.0 and rho * math.exp(hi * m) < 1.0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) <= 1.0 and rho * math.exp(mid * m) < 1.0:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise DwellCertError("not-certifiable", "no positive lambda satisfies the inequality")
    return lo


def find_lambda(m: int, rho: float, M: float, K1: int, K2: int, K3: int, eps: EpsilonTable,
                N: int, lam: Optional[float] = None) -> float:
    """Fixed mode when ``lam`` is given, maximize mode when it is ``None``."""
    if rho >= 1.0:
        raise DwellCertError("bad-rho", f"rho must be < 1, got {rho}")
    if lam is not None:
        return check_fixed_lambda(rho, m, lam)
    return maximize_lambda(m, rho, M, K1, K2, K3, eps, N)


def _provenance(delta, m, lam, exponent_mode, eps_override):
    return {
        "K1_rule": "floor(m/delta)",
        "K1_printed_rule": "floor(delta/m)",
        "K1_printed_value": k1_as_printed(m, delta) if m else None,
        "corollary_exponent_mode": exponent_mode,
        "lambda_mode": "fixed" if lam is not None else "maximize",
        "eps_source": "user" if eps_override is not None else "ordered-pair max",
    }


def certify(fam: SubsystemFamily, delta: int, lam: Optional[float] = None,
            m_max: int = DEFAULT_M_MAX, eps_override: Optional[EpsilonTable] = None,
            exponent_mode: str = AS_PRINTED) -> Certificate:
    """Run the whole pipeline and return a :class:`Certificate`.

    Errors from the individual steps are caught and turned into a
    ``not_certified`` verdict whose ``reason`` carries the error code.
    """
    delta = _check_delta(delta)
    cert = Certificate(delta=delta)
    cert.provenance = _provenance(delta, None, lam, exponent_mode, eps_override)
    N = fam.N
    try:
        M = max(norm2(a) for a in fam.matrices)
        cert.M = M
        if M == 0.0:
            # every product vanishes: trivially certified
            cert.m, cert.rho = delta, 0.0
            cert.K1, cert.K2, cert.K3 = compute_k_scalars(N, delta, delta)
            cert.eps = EpsilonTable.from_values(delta, 0.0, 0.0, 0.0, 0.0)
            cert.lam = lam if lam is not None else 1.0
            cert.rho_e_lam_m = 0.0
            cert.theorem_lhs = 0.0
            cert.corollary_lhs_printed = cert.corollary_lhs_derived = 0.0
            cert.verdict = CERTIFIED
            cert.reason = "all subsystem matrices are zero"
            cert.provenance = _provenance(delta, delta, lam, exponent_mode, eps_override)
            return cert

        screen = schur_screen(fam, m_max)
        if not all(screen):
            bad = [k + 1 for k, ok in enumerate(screen) if not ok]
            raise DwellCertError("schur-undetermined", f"no contracting power <= {m_max} for subsystems {bad}")
        m, rho = find_m(fam, delta, m_max)
        cert.m, cert.rho = m, rho
        cert.provenance = _provenance(delta, m, lam, exponent_mode, eps_override)
        cert.K1, cert.K2, cert.K3 = compute_k_scalars(N, m, delta)
        eps = eps_override if eps_override is not None else epsilon_table(fam, delta)
        if eps.delta != delta:
            raise DwellCertError("eps-delta-mismatch", f"epsilon table built for delta={eps.delta}")
        cert.eps = eps

        eps11 = eps.ones
        if lam is None:
            try:
                lam_used = find_lambda(m, rho, M, cert.K1, cert.K2, cert.K3, eps, N)
            except DwellCertError as exc:
                if exc.code != "not-certifiable":
                    raise
                # report the inequality at a vanishing rate
                cert.lam = 0.0
                cert.rho_e_lam_m = rho
                cert.theorem_lhs = theorem_lhs(m, rho, 0.0, M, cert.K1, cert.K2, cert.K3, eps, N)
                cert.corollary_lhs_printed = corollary_lhs(m, rho, 0.0, M, eps11, N, AS_PRINTED)
                cert.corollary_lhs_derived = corollary_lhs(m, rho, 0.0, M, eps11, N, AS_DERIVED)
                cert.reason = f"{exc.code}: {exc.message}"
                return cert
        else:
            lam_used = find_lambda(m, rho, M, cert.K1, cert.K2, cert.K3, eps, N, lam)
        cert.lam = lam_used
        cert.rho_e_lam_m = rho * math.exp(lam_used * m)
        cert.theorem_lhs = theorem_lhs(m, rho, lam_used, M, cert.K1, cert.K2, cert.K3, eps, N)
        cert.corollary_lhs_printed = corollary_lhs(m, rho, lam_used, M, eps11, N, AS_PRINTED)
        cert.corollary_lhs_derived = corollary_lhs(m, rho, lam_used, M, eps11, N, AS_DERIVED)
        if cert.theorem_lhs <= 1.0:
            cert.verdict = CERTIFIED
            cert.reason = "master inequality holds"
        else:
            cert.reason = f"master inequality fails: left-hand side {cert.theorem_lhs:.6g} > 1"
    except DwellCertError as exc:
        cert.verdict = NOT_CERTIFIED
        cert.reason = f"{exc.code}: {exc.message}"
    return cert
