"""Configuration-space analysis of read-once programs.

The reachable configurations per level form a deterministic automaton whose
transitions preserve Euclidean distance (they are restrictions of the
program's unitaries).  Partitioning each level's configurations into
theta-components (transitive closure of steps of length at most theta) and
tracking where components go yields a deterministic OBDD that classifies
inputs exactly like the program does at a given margin, with width bounded
by a sphere-packing count of (1 + 2/theta)^(2d).

Also here: the measured accept/reject separation of a program, the two
closed-form separation lower bounds, a brute-force minimal OBDD width
oracle (distinct-subfunction counting), and integer width lower bounds
derived from the packing inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .program import (
    QbProgram,
    TruthTable,
    _as_bits,
    accept_probability,
    bits_of_value,
    evaluate_all,
    final_configuration,
    is_read_once,
)

MAX_REACHABLE_LEVELS = 20
MAX_SEPARATION_VARS = 16
MAX_WIDTH_VARS = 24

CONFIG_DEDUP_TOL = 1e-9
CHAIN_SLACK = 1e-12


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))
        self.rank = [1] * size

    def find(self, u: int) -> int:
        while self.parent[u] != u:
            self.parent[u] = self.parent[self.parent[u]]
            u = self.parent[u]
        return u

    def union(self, u: int, v: int) -> None:
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return
        if self.rank[ru] < self.rank[rv]:
            ru, rv = rv, ru
        self.parent[rv] = ru
        if self.rank[ru] == self.rank[rv]:
            self.rank[ru] += 1


def _pairwise_sq_distances(mat: np.ndarray) -> np.ndarray:
    sq = np.einsum("ij,ij->i", mat, mat.conj()).real
    gram = (mat @ mat.conj().T).real
    d2 = sq[:, None] + sq[None, :] - 2.0 * gram
    return np.maximum(d2, 0.0)


def _dedup(vectors: Sequence[np.ndarray], tol: float) -> tuple[list[np.ndarray], list[int]]:
    """Collapse vectors within ``tol`` of an earlier one; returns the kept
    vectors and, for every candidate, the index it mapped to."""
    dim = vectors[0].shape[0]
    buf = np.empty((len(vectors), dim), dtype=np.complex128)
    count = 0
    index: list[int] = []
    tol2 = tol * tol
    for v in vectors:
        if count:
            d2 = np.sum(np.abs(buf[:count] - v) ** 2, axis=1)
            j = int(np.argmin(d2))
            if d2[j] <= tol2:
                index.append(j)
                continue
        buf[count] = v
        index.append(count)
        count += 1
    kept = []
    for i in range(count):
        arr = buf[i].copy()
        arr.flags.writeable = False
        kept.append(arr)
    return kept, index


@dataclass(frozen=True, eq=False)
class LevelConfigurations:
    """Distinct configurations reachable at one level.

    ``prefix_map[v]`` is the configuration index reached by the length-j
    read-bit prefix with value v (first bit most significant).
    ``prev_transitions[i, b]`` is the index at this level reached from
    configuration i of the previous level on bit b (empty at level 0).
    """

    level: int
    configs: tuple[np.ndarray, ...]
    prefix_map: np.ndarray
    prev_transitions: np.ndarray


def reachable_configurations(p: QbProgram) -> list[LevelConfigurations]:
    """Enumerate distinct configurations per level, deduplicated at 1e-9.

    Requires a read-once program (each level branches on a fresh variable,
    so length-j prefixes are exactly the 2^j read-bit sequences).
    """
    if not is_read_once(p):
        raise ValueError("reachable-configuration enumeration requires a read-once program")
    if p.length > MAX_REACHABLE_LEVELS:
        raise ValueError(
            f"level budget exceeded: {p.length} levels, limit {MAX_REACHABLE_LEVELS}"
        )
    configs: list[np.ndarray] = [p.initial]
    prefix = np.zeros(1, dtype=np.int64)
    levels = [
        LevelConfigurations(0, (p.initial,), prefix, np.empty((0, 2), dtype=np.int64))
    ]
    for tf in p.transformations:
        candidates: list[np.ndarray] = []
        for c in configs:
            candidates.append(tf.apply_to(0, c))
            candidates.append(tf.apply_to(1, c))
        kept, index = _dedup(candidates, CONFIG_DEDUP_TOL)
        for c in kept:
            if abs(float(np.linalg.norm(c)) - 1.0) > 1e-9:
                raise RuntimeError("reachable configuration drifted off unit norm")
        trans = np.array(index, dtype=np.int64).reshape(-1, 2)
        trans.flags.writeable = False
        nxt_prefix = np.empty(2 * prefix.shape[0], dtype=np.int64)
        nxt_prefix[0::2] = trans[prefix, 0]
        nxt_prefix[1::2] = trans[prefix, 1]
        nxt_prefix.flags.writeable = False
        levels.append(
            LevelConfigurations(len(levels), tuple(kept), nxt_prefix, trans)
        )
        configs = kept
        prefix = nxt_prefix
    return levels


@dataclass(frozen=True, eq=False)
class ThetaPartition:
    """Partition of a configuration list into theta-components (union-find
    over pairs at distance <= theta, with a 1e-12 slack)."""

    level: int
    theta: float
    component_of: dict[int, int]
    count: int


def theta_components(configs: Sequence[np.ndarray], theta: float, level: int = 0) -> ThetaPartition:
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    m = len(configs)
    if m == 0:
        return ThetaPartition(level, theta, {}, 0)
    mat = np.array([np.asarray(c, dtype=np.complex128) for c in configs])
    d2 = _pairwise_sq_distances(mat)
    thresh = (theta + CHAIN_SLACK) ** 2
    uf = _UnionFind(m)
    ii, jj = np.nonzero(np.triu(d2 <= thresh, k=1))
    for i, j in zip(ii, jj):
        uf.union(int(i), int(j))
    ids: dict[int, int] = {}
    component_of: dict[int, int] = {}
    for i in range(m):
        root = uf.find(i)
        if root not in ids:
            ids[root] = len(ids)
        component_of[i] = ids[root]
    return ThetaPartition(level, theta, component_of, len(ids))


# -- separation bounds -----------------------------------------------------------

@dataclass(frozen=True)
class SeparationReport:
    """Closed-form separation bounds for a margin and width, plus the
    measured minimum accept/reject distance when available.

    theta1 = epsilon / sqrt(d).  theta2 = sqrt(1 + 2 eps - 4 sqrt(1/2 - eps))
    when the radicand is positive (roughly eps > 0.33), else 0; the radicand
    is reported so callers can see its sign.
    """

    epsilon: float
    d: int
    theta1: float
    theta2: float
    theta2_radicand: float
    measured: float | None = None


def theta_bounds(epsilon: float, d: int) -> SeparationReport:
    if not 0.0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must be in (0, 1/2], got {epsilon}")
    if d < 1:
        raise ValueError(f"width must be >= 1, got {d}")
    theta1 = epsilon / math.sqrt(d)
    radicand = 1.0 + 2.0 * epsilon - 4.0 * math.sqrt(0.5 - epsilon)
    theta2 = math.sqrt(radicand) if radicand > 0 else 0.0
    return SeparationReport(epsilon, d, theta1, theta2, radicand)


def _classified_final_configs(
    p: QbProgram, f: TruthTable, epsilon: float
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Distinct final configurations split into accepting and rejecting at
    margin ``epsilon``; verifies first that the program computes ``f``.

    The verification allows 1e-12 of slack so a margin equal to the measured
    one (up to rounding) is accepted."""
    n = p.n_vars
    if n > MAX_SEPARATION_VARS:
        raise ValueError(f"separation scan limited to n <= {MAX_SEPARATION_VARS}, got {n}")
    if p.n_vars != f.n_vars:
        raise ValueError(f"program has n_vars {p.n_vars}, truth table has {f.n_vars}")
    if not 0.0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must be in (0, 1/2], got {epsilon}")
    probs = evaluate_all(p)
    ok = np.where(
        f.bits, probs >= 0.5 + epsilon - 1e-12, probs <= 0.5 - epsilon + 1e-12
    )
    bad = np.nonzero(~ok)[0]
    if bad.size:
        v = int(bad[0])
        raise ValueError(
            f"program does not compute the table with margin {epsilon}: input "
            f"{''.join(map(str, bits_of_value(v, n)))} has acceptance {probs[v]!r}"
        )
    if is_read_once(p):
        configs = list(reachable_configurations(p)[-1].configs)
    else:
        finals = [final_configuration(p, bits_of_value(v, n)) for v in range(1 << n)]
        configs, _ = _dedup(finals, CONFIG_DEDUP_TOL)
    accepting: list[np.ndarray] = []
    rejecting: list[np.ndarray] = []
    for c in configs:
        prob = accept_probability(c, p.accepting)
        if prob >= 0.5 + epsilon - 1e-12:
            accepting.append(c)
        elif prob <= 0.5 - epsilon + 1e-12:
            rejecting.append(c)
        else:
            raise RuntimeError(
                f"final configuration with acceptance {prob!r} is inside the margin band"
            )
    return accepting, rejecting


def _min_cross_distance(
    a: Sequence[np.ndarray], b: Sequence[np.ndarray]
) -> float:
    if not a or not b:
        return math.inf
    ma = np.array(a)
    mb = np.array(b)
    sa = np.einsum("ij,ij->i", ma, ma.conj()).real
    sb = np.einsum("ij,ij->i", mb, mb.conj()).real
    gram = (ma @ mb.conj().T).real
    d2 = np.maximum(sa[:, None] + sb[None, :] - 2.0 * gram, 0.0)
    return float(math.sqrt(float(d2.min())))


def measured_separation(p: QbProgram, f: TruthTable, epsilon: float) -> float:
    """Minimum distance between a final configuration accepted at margin
    epsilon and one rejected at that margin, over all inputs.

    Returns ``math.inf`` when one of the two classes is empty (for example a
    program accepting every input).  Raises if the program does not compute
    ``f`` with the given margin.
    """
    accepting, rejecting = _classified_final_configs(p, f, epsilon)
    return _min_cross_distance(accepting, rejecting)


def separation_report(p: QbProgram, f: TruthTable, epsilon: float) -> SeparationReport:
    rep = theta_bounds(epsilon, p.width)
    return replace(rep, measured=measured_separation(p, f, epsilon))


# -- derived deterministic OBDD ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DerivedObdd:
    """Deterministic OBDD over theta-components of reachable configurations.

    ``transitions[j][c, b]`` is the component at level j+1 reached from
    component c of level j on bit b.  The initial component has index 0.
    """

    n_vars: int
    var_sequence: tuple[int, ...]
    level_counts: tuple[int, ...]
    transitions: tuple[np.ndarray, ...]
    accepting: frozenset[int]
    theta: float
    qbp_width: int
    initial_component: int = 0

    @property
    def max_width(self) -> int:
        return max(self.level_counts)

    def classify(self, input_bits) -> bool:
        bits = _as_bits(input_bits, self.n_vars)
        comp = self.initial_component
        for table, j in zip(self.transitions, self.var_sequence):
            comp = int(table[comp, bits[j - 1]])
        return comp in self.accepting

    def classify_all(self) -> np.ndarray:
        """Boolean decision for every input value, vectorized."""
        values = np.arange(1 << self.n_vars, dtype=np.int64)
        comp = np.full(values.shape, self.initial_component, dtype=np.int64)
        for table, j in zip(self.transitions, self.var_sequence):
            bits = (values >> (self.n_vars - j)) & 1
            comp = table[comp, bits]
        mask = np.zeros(self.level_counts[-1], dtype=bool)
        for c in self.accepting:
            mask[c] = True
        return mask[comp]


def packing_width_bound(theta: float, d: int) -> float:
    """Sphere-packing bound (1 + 2/theta)^(2d) on the number of
    theta-components of unit-norm configurations in width d."""
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    if d < 1:
        raise ValueError(f"width must be >= 1, got {d}")
    return (1.0 + 2.0 / theta) ** (2 * d)


def derive_deterministic_obdd(
    p: QbProgram, f: TruthTable, theta: float, epsilon: float
) -> DerivedObdd:
    """Build the component OBDD for a program that computes ``f`` with margin
    ``epsilon``, under the hypothesis theta <= measured separation.

    Components are chained strictly inside ``theta`` (threshold theta - 1e-9)
    so that accept/reject pairs at exactly the measured separation stay in
    distinct components; ``theta`` itself is what the packing bound is
    quoted against.  A transition mapping one component to two would
    contradict distance preservation and raises RuntimeError.
    """
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    accepting_cfgs, rejecting_cfgs = _classified_final_configs(p, f, epsilon)
    sep = _min_cross_distance(accepting_cfgs, rejecting_cfgs)
    if theta > sep + 1e-12:
        raise ValueError(
            f"theta {theta} exceeds the measured accept/reject separation {sep}; "
            f"an accepting and a rejecting configuration lie at distance {sep}"
        )
    levels = reachable_configurations(p)
    chain_theta = theta - 1e-9 if theta > 2e-9 else theta / 2
    parts = [theta_components(lv.configs, chain_theta, level=lv.level) for lv in levels]

    tables: list[np.ndarray] = []
    for j in range(1, len(levels)):
        prev_part, cur_part = parts[j - 1], parts[j]
        trans = levels[j].prev_transitions
        table = np.full((prev_part.count, 2), -1, dtype=np.int64)
        for i in range(len(levels[j - 1].configs)):
            c = prev_part.component_of[i]
            for b in (0, 1):
                tgt = cur_part.component_of[int(trans[i, b])]
                if table[c, b] == -1:
                    table[c, b] = tgt
                elif table[c, b] != tgt:
                    raise RuntimeError(
                        f"transition ambiguity at level {j} on bit {b}: component {c} "
                        f"maps to components {int(table[c, b])} and {tgt}; "
                        f"distance preservation was violated"
                    )
        table.flags.writeable = False
        tables.append(table)

    final_part = parts[-1]
    comp_class: dict[int, bool] = {}
    for i, cfg in enumerate(levels[-1].configs):
        prob = accept_probability(cfg, p.accepting)
        is_acc = prob >= 0.5 + epsilon - 1e-12
        is_rej = prob <= 0.5 - epsilon + 1e-12
        if is_acc == is_rej:
            raise RuntimeError(f"final configuration acceptance {prob!r} is unclassifiable")
        c = final_part.component_of[i]
        if c in comp_class and comp_class[c] != is_acc:
            raise RuntimeError(
                f"final component {c} mixes accepting and rejecting configurations"
            )
        comp_class[c] = is_acc
    accepting = frozenset(c for c, v in comp_class.items() if v)
    return DerivedObdd(
        n_vars=p.n_vars,
        var_sequence=p.var_sequence,
        level_counts=tuple(pt.count for pt in parts),
        transitions=tuple(tables),
        accepting=accepting,
        theta=theta,
        qbp_width=p.width,
    )


# -- minimal OBDD width oracle ---------------------------------------------------------

@dataclass(frozen=True)
class ObddWidths:
    order: tuple[int, ...]
    level_widths: tuple[int, ...]
    max_width: int


def min_obdd_width(f: TruthTable, order: Sequence[int] | None = None) -> ObddWidths:
    """Level widths of the minimal (quasi-reduced) deterministic OBDD for a
    fixed variable order: the width at level j is the number of distinct
    subfunctions after fixing the first j variables of the order."""
    n = f.n_vars
    if n > MAX_WIDTH_VARS:
        raise ValueError(f"width oracle limited to n <= {MAX_WIDTH_VARS}, got {n}")
    if order is None:
        order = tuple(range(1, n + 1))
    else:
        order = tuple(int(v) for v in order)
        if sorted(order) != list(range(1, n + 1)):
            raise ValueError(f"order must be a permutation of 1..{n}, got {order}")
    arr = f.bits.reshape((2,) * n)
    arr = np.transpose(arr, [v - 1 for v in order])
    widths = []
    for j in range(n + 1):
        rows = np.ascontiguousarray(arr.reshape(1 << j, -1))
        packed = np.ascontiguousarray(np.packbits(rows, axis=1))
        view = packed.view(np.dtype((np.void, packed.shape[1])))
        widths.append(int(np.unique(view).size))
    return ObddWidths(order, tuple(widths), max(widths))


def lower_bound_width(t: int, epsilon: float, mode: str = "general") -> int:
    """Smallest program width consistent with a minimal OBDD width of ``t``.

    mode "general": smallest d with (1 + 2 sqrt(d)/epsilon)^(2d) >= t, the
    packing inequality at separation epsilon/sqrt(d).  mode "margin": uses
    the d-free separation theta2 and returns
    ceil(log2 t / (2 log2(1 + 1/theta2))); requires a positive radicand.
    """
    if t < 2:
        raise ValueError(f"need a minimal OBDD width of at least 2, got {t}")
    if not 0.0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must be in (0, 1/2], got {epsilon}")
    if mode == "general":
        log_t = math.log(t)
        d = 1
        while 2.0 * d * math.log1p(2.0 * math.sqrt(d) / epsilon) < log_t:
            d += 1
        return d
    if mode == "margin":
        rep = theta_bounds(epsilon, 1)
        if rep.theta2_radicand <= 0:
            raise ValueError(
                f"margin mode needs a positive radicand; epsilon {epsilon} "
                f"gives {rep.theta2_radicand}"
            )
        return max(1, math.ceil(math.log2(t) / (2.0 * math.log2(1.0 + 1.0 / rep.theta2))))
    raise ValueError(f"unknown mode {mode!r}; use 'general' or 'margin'")
