"""Rewriting a dwell-structured matrix word as ``A_t^m L1`` plus commutator terms.

Words are written latest-factor-leftmost, as in ``A_{s(t-1)} ... A_{s(0)}``.
A word is stored as runs ``(index, power)``; ``"3^2 2^2 1^3"`` is
``A_3^2 A_2^2 A_1^3``.

:func:`decompose` brings ``m`` copies of a target matrix to the front by
adjacent swaps.  Each swap of a moving unit ``X^p`` across a chunk ``Y^q``
uses ``Y^q X^p = X^p Y^q - E_XY^{p,q}`` and emits one commutator term; the
word then continues with the swapped order.  Emitted terms are never
rewritten again, so the result is an exact algebraic identity which
:func:`evaluate_decomposition` checks numerically.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .certificate import SubsystemFamily, compute_k_scalars
from .errors import DwellCertError
from .linalg_core import commutator, norm2

CATEGORIES = ("dd", "d1", "1d", "11")


@dataclass(frozen=True)
class BlockWord:
    runs: tuple = ()

    def __post_init__(self):
        runs = tuple((int(i), int(p)) for i, p in self.runs)
        for i, p in runs:
            if i < 1 or p < 1:
                raise DwellCertError("bad-run", f"run ({i}, {p}) needs index >= 1 and power >= 1")
        for (i, _), (j, _) in zip(runs, runs[1:]):
            if i == j:
                raise DwellCertError("adjacent-equal-runs", f"adjacent runs share index {i}")
        object.__setattr__(self, "runs", runs)

    @classmethod
    def from_runs(cls, runs: Sequence) -> "BlockWord":
        """Build from runs, merging neighbours with equal index."""
        merged: list = []
        for i, p in runs:
            if p == 0:
                continue
            if merged and merged[-1][0] == i:
                merged[-1] = (i, merged[-1][1] + p)
            else:
                merged.append((i, p))
        return cls(tuple(merged))

    @classmethod
    def from_letters(cls, letters: Sequence[int]) -> "BlockWord":
        return cls.from_runs([(i, 1) for i in letters])

    @property
    def total_length(self) -> int:
        return sum(p for _, p in self.runs)

    def __len__(self) -> int:
        return self.total_length

    def letters(self) -> list:
        return [i for i, p in self.runs for _ in range(p)]

    def is_empty(self) -> bool:
        return not self.runs

    def product(self, fam: SubsystemFamily) -> np.ndarray:
        out = np.eye(fam.d)
        for i, p in self.runs:
            a = fam[i]
            for _ in range(p):
                out = out @ a
        return out

    def __str__(self) -> str:
        return " ".join(f"A{i}" if p == 1 else f"A{i}^{p}" for i, p in self.runs)


_TOKEN = re.compile(r"(\d+)(?:\^(\d+))?$")


def parse_word(text: str) -> BlockWord:
    """Parse ``"idx^pow idx^pow ..."``; a bare ``idx`` means power 1.

    Parse errors carry the 1-based column of the offending token.
    """
    runs = []
    for match in re.finditer(r"\S+", text):
        tok = match.group(0)
        m = _TOKEN.match(tok)
        col = match.start() + 1
        if m is None:
            raise DwellCertError("word-parse", f"column {col}: cannot parse token {tok!r}")
        idx = int(m.group(1))
        pw = int(m.group(2)) if m.group(2) is not None else 1
        if idx < 1 or pw < 1:
            raise DwellCertError("word-parse", f"column {col}: index and power must be >= 1 in {tok!r}")
        runs.append((idx, pw))
    if not runs:
        raise DwellCertError("word-parse", "column 1: empty word")
    return BlockWord.from_runs(runs)


def validate_dwell(word, delta: int) -> bool:
    """True iff every run except the last listed one has power ``>= delta``."""
    runs = word.runs if isinstance(word, BlockWord) else tuple(word)
    return all(p >= delta for _, p in runs[:-1])


def choose_target(word: BlockWord, m: int) -> int:
    """Smallest subsystem index occurring at least ``m`` times in ``word``."""
    counts = Counter()
    for i, p in word.runs:
        counts[i] += p
    hits = sorted(i for i, c in counts.items() if c >= m)
    if not hits:
        raise DwellCertError("no-dominant-index", f"no index occurs {m} times in {word}")
    return hits[0]


@dataclass(frozen=True)
class CommutatorMarker:
    """Stands for ``E_ij^{p,q} = A_i^p A_j^q - A_j^q A_i^p``."""

    i: int
    j: int
    p: int
    q: int

    def matrix(self, fam: SubsystemFamily) -> np.ndarray:
        return commutator(fam[self.i], fam[self.j], self.p, self.q)

    def __str__(self) -> str:
        return f"E{self.i}{self.j}^{{{self.p},{self.q}}}"


@dataclass(frozen=True)
class DecompositionTerm:
    sign: int
    prefix: BlockWord
    commutator: Optional[CommutatorMarker] = None
    suffix: BlockWord = BlockWord()

    def evaluate(self, fam: SubsystemFamily) -> np.ndarray:
        out = self.prefix.product(fam)
        if self.commutator is not None:
            out = out @ self.commutator.matrix(fam) @ self.suffix.product(fam)
        return self.sign * out

    def __str__(self) -> str:
        parts = [str(self.prefix)] if not self.prefix.is_empty() else []
        if self.commutator is not None:
            parts.append(str(self.commutator))
            if not self.suffix.is_empty():
                parts.append(str(self.suffix))
        body = " ".join(parts)
        return ("-" if self.sign < 0 else "+") + body


def category(p: int, q: int, delta: int) -> str:
    """Category key of a commutator ``E^{p,q}``: ``d`` marks a power equal to delta."""
    return ("d" if p == delta else "1") + ("d" if q == delta else "1")


@dataclass(frozen=True)
class Decomposition:
    word: BlockWord
    target: int
    m: int
    delta: int
    terms: tuple

    @property
    def leading(self) -> DecompositionTerm:
        return self.terms[0]

    @property
    def commutator_terms(self) -> tuple:
        return self.terms[1:]

    @property
    def counts(self) -> dict:
        out = dict.fromkeys(CATEGORIES, 0)
        for t in self.commutator_terms:
            out[category(t.commutator.p, t.commutator.q, self.delta)] += 1
        return out

    def __str__(self) -> str:
        lines = [f"{self.word} ="]
        lines += [f"  {t}" for t in self.terms]
        return "\n".join(lines)


@dataclass
class _Piece:
    index: int
    power: int
    moving: bool = False


def _chunk_run(index: int, power: int, delta: int) -> list:
    # laid out left to right: singles, then delta-blocks; a unit arriving from
    # the right crosses the blocks first
    singles, blocks = power % delta, power // delta
    return [_Piece(index, 1) for _ in range(singles)] + [_Piece(index, delta) for _ in range(blocks)]


def _units_for_target(groups: list, m: int, delta: int) -> list:
    """Split the selected target letters into moving units.

    ``groups`` lists the number of selected letters in each maximal target
    stretch, left to right.  Up to ``floor(m/delta)`` delta-blocks are
    allocated starting from the rightmost stretch; the rest are singles.
    Within a stretch the singles sit left of the blocks.
    """
    budget = m // delta
    n_blocks = [0] * len(groups)
    for g in range(len(groups) - 1, -1, -1):
        take = min(groups[g] // delta, budget)
        n_blocks[g] = take
        budget -= take
    out = []
    for size, nb in zip(groups, n_blocks):
        out.append([1] * (size - nb * delta) + [delta] * nb)
    return out


def _as_word(pieces: list) -> BlockWord:
    return BlockWord.from_runs([(pc.index, pc.power) for pc in pieces])


def decompose(word: BlockWord, target: int, m: int, delta: int) -> Decomposition:
    """Rewrite ``word`` as ``A_target^m L1`` minus single-commutator terms.

    The leftmost ``m`` occurrences of ``target`` are split into moving units
    (delta-blocks and singles, see :func:`_units_for_target`); non-target
    runs are chunked per run into singles and delta-blocks.  Units move to
    the front left to right, one adjacent swap at a time.

    Returned terms: the leading term first, then commutator terms from the
    last swap performed back to the first one.
    """
    if delta < 1 or m < 1:
        raise DwellCertError("bad-decompose-inputs", f"m={m}, delta={delta}")
    letters = word.letters()
    if letters.count(target) < m:
        raise DwellCertError("no-dominant-index", f"A{target} occurs fewer than {m} times in {word}")

    # mark the leftmost m target letters
    selected = []
    seen = 0
    for ch in letters:
        take = ch == target and seen < m
        selected.append(take)
        seen += take

    # split into segments of equal (letter, selected) and build pieces
    segments: list = []
    for ch, sel in zip(letters, selected):
        if segments and segments[-1][0] == ch and segments[-1][1] == sel:
            segments[-1][2] += 1
        else:
            segments.append([ch, sel, 1])
    groups = [n for ch, sel, n in segments if sel]
    unit_sizes = iter(_units_for_target(groups, m, delta))
    pieces: list = []
    for ch, sel, n in segments:
        if sel:
            pieces += [_Piece(ch, p, moving=True) for p in next(unit_sizes)]
        elif ch == target:
            pieces.append(_Piece(ch, n))
        else:
            pieces += _chunk_run(ch, n, delta)

    generated = []
    front = 0
    for k in range(len(pieces)):
        if not pieces[k].moving:
            continue
        pos = k
        unit = pieces[pos]
        while pos > front:
            other = pieces[pos - 1]
            marker = CommutatorMarker(target, other.index, unit.power, other.power)
            generated.append(DecompositionTerm(
                -1, _as_word(pieces[:pos - 1]), marker, _as_word(pieces[pos + 1:])))
            pieces[pos - 1], pieces[pos] = unit, other
            pos -= 1
        front += 1

    lead = DecompositionTerm(1, _as_word(pieces))
    return Decomposition(word, target, m, delta, (lead, *reversed(generated)))


def evaluate_decomposition(dec: Decomposition, fam: SubsystemFamily) -> tuple:
    """Numerically compare the word with the signed sum of its terms.

    Returns ``(lhs, rhs, residual_norm)``.
    """
    lhs = dec.word.product(fam)
    rhs = np.zeros_like(lhs)
    for t in dec.terms:
        rhs = rhs + t.evaluate(fam)
    return lhs, rhs, norm2(lhs - rhs)


def max_term_magnitude(dec: Decomposition, fam: SubsystemFamily) -> float:
    return max([norm2(dec.word.product(fam))] + [norm2(t.evaluate(fam)) for t in dec.terms])


@dataclass(frozen=True)
class CountAudit:
    actual: dict
    bound: dict
    within: dict
    applicable: bool
    total_actual: int
    total_bound: int

    @property
    def all_within(self) -> bool:
        return all(self.within.values())


def audit_counts(dec: Decomposition, N: int, m: int, delta: int) -> CountAudit:
    """Per-category term counts against ``(K1K2, K1K3, (m-K1 delta)K2, (m-K1 delta)K3)``.

    ``applicable`` is False when the word violates the dwell constraint; the
    comparison is still reported but carries no guarantee then.
    """
    k1, k2, k3 = compute_k_scalars(N, m, delta)
    single = m - k1 * delta
    bound = dict(zip(CATEGORIES, (k1 * k2, k1 * k3, single * k2, single * k3)))
    actual = dec.counts
    within = {c: actual[c] <= bound[c] for c in CATEGORIES}
    return CountAudit(
        actual=actual,
        bound=bound,
        within=within,
        applicable=validate_dwell(dec.word, delta),
        total_actual=sum(actual.values()),
        total_bound=sum(bound.values()),
    )
