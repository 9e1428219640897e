"""Generators for the programs the toolkit studies.

* a universal exact read-once program of width 2^n for any Boolean function,
* width-2 rotation blocks deciding divisibility of the count of ones by a
  prime, their "good" multiplier sets, and the parallel composition that
  yields a one-sided-error divisibility program of width O(log p),
* an embedding of classical permutation branching programs.

Randomized good-set selection uses numpy's PCG64 generator so every draw is
reproducible from its seed; seeds are part of the experiment record.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .program import QbProgram, QuantumTransformation, TruthTable

GOOD_COS2_SLACK = 1e-12


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")


def mod_truth_table(p: int, n: int) -> TruthTable:
    """MOD_p: 1 iff the number of ones in the input is divisible by p."""
    _require_prime(p)
    values = np.arange(1 << n, dtype=np.int64)
    counts = np.zeros(1 << n, dtype=np.int64)
    for _ in range(n):
        counts += values & 1
        values >>= 1
    return TruthTable(n, counts % p == 0)


# -- universal exact program ---------------------------------------------------

MAX_UNIVERSAL_VARS = 20


@lru_cache(maxsize=32)
def _cyclic_shift(dim: int, shift: int) -> np.ndarray:
    """Permutation matrix moving position j to position j + shift (mod dim)."""
    m = np.zeros((dim, dim), dtype=np.complex128)
    src = np.arange(dim)
    m[(src + shift) % dim, src] = 1.0
    m.flags.writeable = False
    return m


@lru_cache(maxsize=32)
def _universal_transformations(n: int) -> tuple[QuantumTransformation, ...]:
    width = 1 << n
    ident = linalg.identity(width)
    return tuple(
        QuantumTransformation(i, ident, _cyclic_shift(width, 1 << (n - i)))
        for i in range(1, n + 1)
    )


def universal_exact_qbp(f: TruthTable) -> QbProgram:
    """Read-once program of width 2^n that exactly computes ``f``.

    The single 1-amplitude starts at position 1 and, when x_i is 1, moves
    2^(n-i) positions to the right (cyclically); the final position is
    therefore 1 plus the input value, distinct for distinct inputs.  The
    accepting set marks the positions of the inputs mapped to 1; it is
    empty for the constant-0 function.  Memory scales as n * 4^n.
    """
    n = f.n_vars
    if n > MAX_UNIVERSAL_VARS:
        raise ValueError(f"universal construction limited to n <= {MAX_UNIVERSAL_VARS}, got {n}")
    width = 1 << n
    initial = np.zeros(width, dtype=np.complex128)
    initial[0] = 1.0
    accepting = frozenset(int(v) + 1 for v in np.nonzero(f.bits)[0])
    return QbProgram(n, width, _universal_transformations(n), initial, accepting)


# -- rotation blocks -------------------------------------------------------------

@dataclass(frozen=True)
class ModBlockSpec:
    """Width-2 rotation block: multiplier k for prime modulus p on n variables."""

    p: int
    k: int
    n: int

    def __post_init__(self):
        _require_prime(self.p)
        if not 1 <= self.k <= self.p - 1:
            raise ValueError(f"multiplier k must be in [1, {self.p - 1}], got {self.k}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")

    @property
    def angle(self) -> float:
        return 2.0 * math.pi * self.k / self.p


def mod_block(spec: ModBlockSpec) -> QbProgram:
    """Stable read-once (2, n) program: reading a one rotates the plane by
    2*pi*k/p, reading a zero does nothing; accepting state is the first axis.
    """
    u0 = linalg.identity(2)
    u1 = linalg.rotation_matrix(spec.angle)
    tfs = tuple(QuantumTransformation(i, u0, u1) for i in range(1, spec.n + 1))
    return QbProgram(spec.n, 2, tfs, np.array([1.0, 0.0]), frozenset({1}))


def block_final_amplitudes(spec: ModBlockSpec, ones_count: int) -> tuple[float, float]:
    """Closed form for the block's final configuration on any input with
    ``ones_count`` ones: (cos, sin) of 2*pi*ones_count*k/p."""
    if ones_count < 0:
        raise ValueError(f"ones_count must be >= 0, got {ones_count}")
    theta = 2.0 * math.pi * ones_count * spec.k / spec.p
    return (math.cos(theta), math.sin(theta))


# -- good multiplier sets ---------------------------------------------------------

def good_multipliers(p: int, l: int) -> frozenset[int]:
    """Multipliers k whose block rejects inputs with l ones (mod p) with
    probability at least 1/2, i.e. cos^2(2*pi*l*k/p) <= 1/2.

    For every odd prime at least (p-1)/2 multipliers qualify; p = 2 is
    degenerate (the single rotation by pi accepts everything) and yields the
    empty set.
    """
    _require_prime(p)
    if not 1 <= l <= p - 1:
        raise ValueError(
            f"residue l must be in [1, {p - 1}]; multiples of p are accepted "
            f"with probability 1 by every block"
        )
    ks = np.arange(1, p)
    cos2 = np.cos(2.0 * np.pi * l * ks / p) ** 2
    return frozenset(int(k) for k in ks[cos2 <= 0.5 + GOOD_COS2_SLACK])


def _good_table(p: int) -> np.ndarray:
    """Boolean table[l-1, k-1]: is multiplier k good for residue l."""
    ls = np.arange(1, p).reshape(-1, 1)
    ks = np.arange(1, p).reshape(1, -1)
    cos2 = np.cos(2.0 * np.pi * ls * ks / p) ** 2
    return cos2 <= 0.5 + GOOD_COS2_SLACK


def failing_residues(p: int, multipliers: Sequence[int]) -> tuple[int, ...]:
    """Residues whose good fraction within ``multipliers`` falls below 1/4."""
    _require_prime(p)
    ms = np.asarray(list(multipliers), dtype=np.int64)
    if ms.size == 0:
        raise ValueError("multiplier multiset must be nonempty")
    if np.any((ms < 1) | (ms > p - 1)):
        raise ValueError(f"multipliers must lie in [1, {p - 1}]")
    table = _good_table(p)
    counts = table[:, ms - 1].sum(axis=1)
    bad = np.nonzero(4 * counts < ms.size)[0]
    return tuple(int(l) + 1 for l in bad)


class GoodSetError(ValueError):
    def __init__(self, p: int, failing: tuple[int, ...], message: str):
        self.p = p
        self.failing_residues = failing
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class GoodSet:
    """Multiset of multipliers certified so that every nonzero residue has a
    good fraction of at least 1/4; verified exhaustively at construction."""

    p: int
    multipliers: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "multipliers", tuple(int(k) for k in self.multipliers))
        failing = failing_residues(self.p, self.multipliers)
        if failing:
            raise GoodSetError(
                self.p, failing,
                f"multiset is not good for residues {failing} of modulus {self.p}",
            )

    @property
    def t(self) -> int:
        return len(self.multipliers)

    def good_fraction(self, l: int) -> float:
        good = good_multipliers(self.p, l)
        return sum(1 for k in self.multipliers if k in good) / self.t


def target_set_size(p: int) -> int:
    """Size used by randomized selection: ceil(16 ln p)."""
    return math.ceil(16.0 * math.log(p))


def sample_good_set(p: int, seed: int, max_attempts: int = 64) -> GoodSet:
    """Draw ceil(16 ln p) multipliers i.i.d. uniformly from [1, p-1] with a
    PCG64 generator seeded by ``seed`` and certify the result exhaustively
    over residues; on failure retry with seed+1, up to ``max_attempts``.
    """
    _require_prime(p)
    if p < 3:
        raise ValueError(f"randomized selection needs p >= 3, got {p}")
    t = target_set_size(p)
    failing: tuple[int, ...] = ()
    for attempt in range(max_attempts):
        rng = np.random.default_rng(seed + attempt)
        ks = tuple(int(k) for k in rng.integers(1, p, size=t))
        failing = failing_residues(p, ks)
        if not failing:
            return GoodSet(p, ks)
    raise GoodSetError(
        p, failing,
        f"no certified draw after {max_attempts} attempts from seed {seed}; "
        f"last failing residues {failing}",
    )


def greedy_good_set(p: int) -> GoodSet:
    """Deterministic small multiset: repeatedly add the multiplier that is
    good for the most currently deficient residues (ties to the smallest k).

    If the greedy loop has not certified by size p-1 it falls back to one
    copy of every multiplier, which is always good."""
    _require_prime(p)
    if p < 3:
        raise ValueError(f"good-set construction needs p >= 3, got {p}")
    table = _good_table(p)
    chosen: list[int] = []
    counts = np.zeros(p - 1, dtype=np.int64)
    while len(chosen) < p - 1:
        if chosen and np.all(4 * counts >= len(chosen)):
            return GoodSet(p, tuple(chosen))
        deficient = (4 * counts < len(chosen) + 1) if chosen else np.ones(p - 1, dtype=bool)
        scores = table[deficient, :].sum(axis=0)
        k = int(np.argmax(scores)) + 1
        chosen.append(k)
        counts += table[:, k - 1]
    if np.all(4 * counts >= len(chosen)):
        return GoodSet(p, tuple(chosen))
    return GoodSet(p, tuple(range(1, p)))


# -- parallel composition -----------------------------------------------------------

def compose_parallel(blocks: Sequence[QbProgram], weights: Sequence[float] | None = None) -> QbProgram:
    """Block-diagonal composition of programs over the same variable sequence.

    The initial configuration concatenates the blocks' initial vectors scaled
    by sqrt(weight); acceptance of the composite is then the weighted sum of
    the blocks' acceptances.
    """
    if not blocks:
        raise ValueError("need at least one block")
    if weights is None:
        weights = [1.0 / len(blocks)] * len(blocks)
    if len(weights) != len(blocks):
        raise ValueError(f"{len(blocks)} blocks but {len(weights)} weights")
    weights = [float(w) for w in weights]
    if any(w < 0 for w in weights):
        raise ValueError("weights must be nonnegative")
    if abs(sum(weights) - 1.0) > 1e-12:
        raise ValueError(f"weights sum to {sum(weights)!r}, expected 1 within 1e-12")
    first = blocks[0]
    for b in blocks[1:]:
        if b.n_vars != first.n_vars:
            raise ValueError("blocks disagree on n_vars")
        if b.var_sequence != first.var_sequence:
            raise ValueError("blocks disagree on their variable sequences")
    width = sum(b.width for b in blocks)
    offsets = np.cumsum([0] + [b.width for b in blocks])

    tfs = []
    for level in range(first.length):
        u0 = np.zeros((width, width), dtype=np.complex128)
        u1 = np.zeros((width, width), dtype=np.complex128)
        for b, off in zip(blocks, offsets):
            sl = slice(off, off + b.width)
            u0[sl, sl] = b.transformations[level].u0
            u1[sl, sl] = b.transformations[level].u1
        tfs.append(QuantumTransformation(first.transformations[level].var_index, u0, u1))

    initial = np.concatenate([math.sqrt(w) * b.initial for b, w in zip(blocks, weights)])
    accepting = frozenset(
        int(off) + s for b, off in zip(blocks, offsets) for s in b.accepting
    )
    return QbProgram(first.n_vars, width, tuple(tfs), initial, accepting)


def build_mod_program(p: int, n: int, strategy: str = "greedy", seed: int = 0) -> QbProgram:
    """Divisibility program: one rotation block per multiplier in a certified
    good set, composed in parallel with uniform weights.

    Accepts inputs whose count of ones is divisible by p with probability 1
    and rejects the rest with probability at least 1/8.  Width is twice the
    good-set size.  The usual regime is p <= n/2; outside it a warning is
    emitted but the construction still goes through.
    """
    _require_prime(p)
    if strategy == "greedy":
        good = greedy_good_set(p)
    elif strategy == "sampled":
        good = sample_good_set(p, seed)
    else:
        raise ValueError(f"unknown strategy {strategy!r}; use 'greedy' or 'sampled'")
    if p > n / 2:
        warnings.warn(
            f"modulus {p} exceeds n/2 = {n / 2}; counts of ones cover fewer residues",
            stacklevel=2,
        )
    blocks = [mod_block(ModBlockSpec(p, k, n)) for k in good.multipliers]
    return compose_parallel(blocks)


def amplify(
    p: QbProgram,
    copies: int,
    resample: Callable[[int], QbProgram] | None = None,
) -> QbProgram:
    """Parallel composition of ``copies`` programs with uniform weights.

    By default every copy is ``p`` itself, which preserves probability-1
    acceptance and keeps the rejection floor (the composite acceptance is the
    average of the copies').  Pass ``resample`` to supply independently
    constructed copies, e.g. divisibility programs from fresh seeds; copy i
    is then ``resample(i)``.
    """
    if copies < 1:
        raise ValueError(f"copies must be >= 1, got {copies}")
    if resample is None:
        if copies == 1:
            return p
        progs = [p] * copies
    else:
        progs = [resample(i) for i in range(copies)]
    return compose_parallel(progs)


# -- permutation branching programs ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class PermutationBp:
    """Classical leveled permutation branching program.

    Each level holds (var_index, perm0, perm1); ``perm[s-1]`` is the 1-based
    successor of state s when the read bit selects that permutation.
    """

    width: int
    levels: tuple[tuple[int, tuple[int, ...], tuple[int, ...]], ...]
    start: int
    accepting: frozenset[int]

    def __post_init__(self):
        levels = tuple(
            (int(var), tuple(int(x) for x in p0), tuple(int(x) for x in p1))
            for var, p0, p1 in self.levels
        )
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "accepting", frozenset(int(s) for s in self.accepting))
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if not 1 <= self.start <= self.width:
            raise ValueError(f"start state {self.start} outside [1, {self.width}]")
        for s in self.accepting:
            if not 1 <= s <= self.width:
                raise ValueError(f"accepting state {s} outside [1, {self.width}]")
        for i, (var, p0, p1) in enumerate(levels, start=1):
            if var < 1:
                raise ValueError(f"level {i} reads variable {var} < 1")
            for name, perm in (("perm0", p0), ("perm1", p1)):
                if sorted(perm) != list(range(1, self.width + 1)):
                    raise ValueError(f"level {i} {name} is not a permutation of 1..{self.width}")


def _permutation_matrix(perm: Sequence[int]) -> np.ndarray:
    w = len(perm)
    m = np.zeros((w, w), dtype=np.complex128)
    for src, dst in enumerate(perm):
        m[dst - 1, src] = 1.0
    return m


def permutation_bp_to_qbp(b: PermutationBp, n_vars: int | None = None) -> QbProgram:
    """Exact quantum embedding: permutation matrices keep the configuration a
    standard basis vector, so acceptance is 0 or 1 and equals the classical
    decision."""
    if n_vars is None:
        n_vars = max(var for var, _, _ in b.levels) if b.levels else 1
    tfs = tuple(
        QuantumTransformation(var, _permutation_matrix(p0), _permutation_matrix(p1))
        for var, p0, p1 in b.levels
    )
    initial = np.zeros(b.width, dtype=np.complex128)
    initial[b.start - 1] = 1.0
    return QbProgram(n_vars, b.width, tfs, initial, b.accepting)
