"""Dwell-time switching signals, trajectories and brute-force bound checks.

Exhaustive checks walk every admissible initial segment of a switching
signal, i.e. every index sequence whose runs (in time order) all last at
least ``delta`` steps except the most recent one.
"""
from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .certificate import SubsystemFamily
from .errors import DwellCertError
from .linalg_core import norm2
from .word_rewriter import BlockWord, validate_dwell

DEFAULT_ENUM_GUARD = 10_000_000
ENUM_GUARD_ENV = "DWELLCERT_ENUM_GUARD"
DEFAULT_MAX_EXTRA = 3
PASS_RTOL = 1e-12


def enum_guard() -> int:
    raw = os.environ.get(ENUM_GUARD_ENV)
    return int(raw) if raw else DEFAULT_ENUM_GUARD


@dataclass(frozen=True)
class SwitchingSignal:
    indices: tuple
    delta: int
    seed: Optional[int] = None

    @property
    def switching_instants(self) -> list:
        """``tau_0 = 0`` followed by every step at which the index changes."""
        return [0] + [t for t in range(1, len(self.indices)) if self.indices[t] != self.indices[t - 1]]

    def runs(self) -> list:
        """Runs ``(index, length)`` in time order."""
        out: list = []
        for i in self.indices:
            if out and out[-1][0] == i:
                out[-1] = (i, out[-1][1] + 1)
            else:
                out.append((i, 1))
        return out

    def word(self, t: Optional[int] = None) -> BlockWord:
        """Initial segment ``A_{s(t-1)} ... A_{s(0)}`` as a block word."""
        t = len(self.indices) if t is None else t
        return BlockWord.from_letters(list(reversed(self.indices[:t])))

    def __len__(self) -> int:
        return len(self.indices)


@dataclass
class TrajectoryRecord:
    trial_id: int
    x0: np.ndarray
    norms: np.ndarray
    signal_seed: Optional[int] = None


@dataclass
class GuesBoundReport:
    c: float
    lam: float
    max_violation: float
    words_checked: int
    worst_word: Optional[BlockWord] = None
    max_relative_violation: float = -math.inf

    @property
    def passed(self) -> bool:
        # relative to each word's own bound; an absolute slack of 1e-12*c
        # hides real violations once c is large
        return self.max_relative_violation <= PASS_RTOL and self.max_violation <= PASS_RTOL * self.c


def generate_signal(N: int, delta: int, horizon: int, seed: int,
                    max_extra: int = DEFAULT_MAX_EXTRA) -> SwitchingSignal:
    """Random admissible signal of length ``horizon``.

    Run lengths are uniform on ``{delta, .., delta + max_extra}``; each new
    run picks uniformly among the indices other than the current one.  The
    final run is cut at the horizon.
    """
    if N < 1 or horizon < 1 or max_extra < 0 or delta < 1:
        raise DwellCertError("bad-signal-args", f"N={N}, delta={delta}, horizon={horizon}, max_extra={max_extra}")
    rng = np.random.default_rng(seed)
    cur = int(rng.integers(1, N + 1))
    out: list = []
    while len(out) < horizon:
        length = int(rng.integers(delta, delta + max_extra + 1))
        out.extend([cur] * length)
        if N > 1:
            nxt = int(rng.integers(1, N))
            cur = nxt if nxt < cur else nxt + 1
    return SwitchingSignal(tuple(out[:horizon]), delta, seed)


def simulate(fam: SubsystemFamily, signal: SwitchingSignal, x0, T: Optional[int] = None,
             trial_id: int = 0) -> TrajectoryRecord:
    """Iterate ``x(t+1) = A_{s(t)} x(t)`` for ``t < T`` recording ``||x(t)||``."""
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.shape[0] != fam.d:
        raise DwellCertError("dim-mismatch", f"x0 has dimension {x.shape[0]}, family has {fam.d}")
    T = len(signal) if T is None else T
    if T > len(signal):
        raise DwellCertError("signal-too-short", f"T={T} exceeds signal length {len(signal)}")
    norms = np.empty(T + 1)
    norms[0] = np.linalg.norm(x)
    x0_copy = x.copy()
    for t in range(T):
        x = fam[signal.indices[t]] @ x
        norms[t + 1] = np.linalg.norm(x)
    return TrajectoryRecord(trial_id, x0_copy, norms, signal.seed)


def count_admissible_words(N: int, delta: int, max_len: int) -> int:
    """Number of admissible initial segments of length ``1..max_len``."""
    if N < 1 or delta < 1:
        raise DwellCertError("bad-enum-args", f"N={N}, delta={delta}")
    # state: (current run length capped at delta) -> number of sequences
    total = 0
    layer = {1: N}
    for _ in range(max_len):
        total += sum(layer.values())
        nxt: dict = {}
        for run, cnt in layer.items():
            stay = min(run + 1, delta)
            nxt[stay] = nxt.get(stay, 0) + cnt
            if run >= delta and N > 1:
                nxt[1] = nxt.get(1, 0) + cnt * (N - 1)
        layer = nxt
    return total


def _check_guard(N: int, delta: int, max_len: int) -> int:
    if max_len < 1:
        raise DwellCertError("bad-enum-args", f"max_len must be >= 1, got {max_len}")
    n = count_admissible_words(N, delta, max_len)
    guard = enum_guard()
    if n > guard:
        raise DwellCertError("enumeration-too-large", f"{n} words exceed the guard of {guard} (set {ENUM_GUARD_ENV})")
    return n


def enumerate_admissible_words(N: int, delta: int, max_len: int) -> Iterator[BlockWord]:
    """All admissible initial segments, shortest first, lexicographic within a length.

    Words are in product order (latest factor leftmost), so the leftmost
    run is the only one allowed to be shorter than ``delta``.
    """
    _check_guard(N, delta, max_len)

    def extend(prefix: list, run: int, remaining: int):
        if remaining == 0:
            # the rightmost run began at time 0 and is complete unless it is the only run
            if run >= delta or len(prefix) == run:
                yield prefix
            return
        last = prefix[-1]
        for i in range(1, N + 1):
            if i == last:
                yield from extend(prefix + [i], run + 1, remaining - 1)
            elif (run >= delta or len(prefix) == run) and remaining >= delta:
                yield from extend(prefix + [i], 1, remaining - 1)

    for length in range(1, max_len + 1):
        for first in range(1, N + 1):
            for letters in extend([first], 1, length - 1):
                yield BlockWord.from_letters(letters)


def _walk_products(fam: SubsystemFamily, delta: int, max_len: int):
    """Depth-first over admissible segments in time order.

    Yields ``(length, product, indices)`` where ``product`` is
    ``A_{s(t-1)} ... A_{s(0)}``; extending by one step left-multiplies.
    """
    stack = [(1, i, 1, fam[i], (i,)) for i in range(fam.N, 0, -1)]
    while stack:
        length, cur, run, prod, idx = stack.pop()
        yield length, prod, idx
        if length == max_len:
            continue
        for i in range(fam.N, 0, -1):
            if i == cur:
                stack.append((length + 1, i, run + 1, fam[i] @ prod, idx + (i,)))
            elif run >= delta:
                stack.append((length + 1, i, 1, fam[i] @ prod, idx + (i,)))


def compute_basis_c(fam: SubsystemFamily, delta: int, lam: float, m: int) -> float:
    """Smallest admissible ``c >= 1`` for segments of length ``<= N(m-1)+1``."""
    max_len = fam.N * (m - 1) + 1
    _check_guard(fam.N, delta, max_len)
    c = 1.0
    for length, prod, _ in _walk_products(fam, delta, max_len):
        c = max(c, norm2(prod) * math.exp(lam * length))
    return c


def brute_force_bound_check(fam: SubsystemFamily, delta: int, lam: float, c: float,
                            max_len: int) -> GuesBoundReport:
    """Check ``||W|| <= c e^{-lam |W|}`` on every admissible segment up to ``max_len``."""
    _check_guard(fam.N, delta, max_len)
    worst = worst_rel = -math.inf
    worst_idx = None
    n = 0
    for length, prod, idx in _walk_products(fam, delta, max_len):
        n += 1
        bound = c * math.exp(-lam * length)
        nrm = norm2(prod)
        worst = max(worst, nrm - bound)
        rel = (nrm - bound) / bound if bound > 0 else (math.inf if nrm > 0 else -1.0)
        if rel > worst_rel:
            worst_rel, worst_idx = rel, idx
    worst_word = BlockWord.from_letters(list(reversed(worst_idx))) if worst_idx else None
    return GuesBoundReport(c=c, lam=lam, max_violation=worst, words_checked=n, worst_word=worst_word,
                           max_relative_violation=worst_rel)


@dataclass
class MonteCarloSummary:
    trials: int
    horizon: int
    c: float
    lam: float
    max_ratio: np.ndarray
    bound: np.ndarray
    violations: int
    all_pass: bool
    records: list = field(default_factory=list, repr=False)


def monte_carlo(fam: SubsystemFamily, delta: int, trials: int, horizon: int, seed: int,
                x0_box: tuple = (-100.0, 100.0), c: float = 1.0, lam: float = 0.0,
                max_extra: int = DEFAULT_MAX_EXTRA, x0: Optional[Sequence[float]] = None) -> MonteCarloSummary:
    """Simulate ``trials`` random (signal, x0) draws and check ``||x(t)|| <= c e^{-lam t} ||x0||``.

    Trial ``k`` uses seed ``seed + k`` for its signal; its initial state is
    drawn uniformly from the box ``x0_box`` (per coordinate) from the stream
    ``(seed + k, 1)``, unless a fixed ``x0`` is given.
    """
    if trials < 1:
        raise DwellCertError("bad-trials", f"trials must be >= 1, got {trials}")
    lo, hi = x0_box
    t = np.arange(horizon + 1)
    bound = c * np.exp(-lam * t)
    max_ratio = np.zeros(horizon + 1)
    violations = 0
    records = []
    for k in range(trials):
        s = seed + k
        sig = generate_signal(fam.N, delta, horizon, s, max_extra)
        if x0 is None:
            start = np.random.default_rng((s, 1)).uniform(lo, hi, fam.d)
        else:
            start = np.asarray(x0, dtype=float)
        rec = simulate(fam, sig, start, horizon, trial_id=k)
        records.append(rec)
        n0 = rec.norms[0]
        if n0 > 0:
            ratio = rec.norms / n0
            max_ratio = np.maximum(max_ratio, ratio)
            violations += int(np.count_nonzero(ratio > bound * (1 + PASS_RTOL)))
        elif np.any(rec.norms > 0):
            violations += 1
    return MonteCarloSummary(trials, horizon, c, lam, max_ratio, bound, violations, violations == 0, records)


def write_trajectory_csv(records: Sequence[TrajectoryRecord], path) -> None:
    """Write ``trial,t,norm`` rows atomically (temp file + rename)."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".traj-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write("trial,t,norm\n")
            for rec in records:
                for t, v in enumerate(rec.norms):
                    fh.write(f"{rec.trial_id},{t},{v:.17g}\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def signal_is_admissible(signal: SwitchingSignal) -> bool:
    return validate_dwell(signal.runs(), signal.delta)
