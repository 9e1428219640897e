"""Leveled quantum branching programs and their exact semantics.

A program of width d applies, at each level, one of two d x d unitaries
depending on the value of one input variable, then measures the final
configuration against a set of accepting basis states.  Bit i of an input
string is the value of variable x_{i+1}; the transformation at a level
reads ``input[var_index - 1]``.

Also included: the classical stable probabilistic OBDD model (a fixed pair
of row-stochastic matrices driven over a distribution row vector), and the
JSON file format used by the command line tools.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from . import linalg

MAX_EXHAUSTIVE_VARS = 24

Bits = Sequence[int] | str


class Classification(enum.Enum):
    ACCEPTS = "accepts"
    REJECTS = "rejects"
    UNDETERMINED = "undetermined"


def _as_bits(input_bits: Bits, n_vars: int) -> tuple[int, ...]:
    if isinstance(input_bits, str):
        try:
            bits = tuple(int(c) for c in input_bits)
        except ValueError:
            raise ValueError(f"input string {input_bits!r} contains non-bit characters")
    else:
        bits = tuple(int(b) for b in input_bits)
    if len(bits) != n_vars:
        raise ValueError(f"input length {len(bits)} does not match n_vars {n_vars}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"input {input_bits!r} contains values other than 0 and 1")
    return bits


def bits_of_value(value: int, n_vars: int) -> tuple[int, ...]:
    """Bits of an input value, most significant bit = x_1."""
    return tuple((value >> (n_vars - 1 - i)) & 1 for i in range(n_vars))


def value_of_bits(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | int(b)
    return v


def _phase_permutation(u: np.ndarray):
    """Decompose ``u`` as (perm, phases) when it has exactly one nonzero per
    row and column; used as an exact O(d) application path.  All remaining
    entries must be exact zeros, so the gather reproduces the dense product
    bit for bit.  Returns None for matrices without this structure."""
    nz = u != 0
    if not (nz.sum(axis=1) == 1).all() or not (nz.sum(axis=0) == 1).all():
        return None
    perm = nz.argmax(axis=1)
    phases = u[np.arange(u.shape[0]), perm]
    return perm, phases


@dataclass(frozen=True, eq=False)
class QuantumTransformation:
    """One program level: variable index plus the unitary applied per bit."""

    var_index: int
    u0: np.ndarray
    u1: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u0", linalg.as_cmatrix(self.u0))
        object.__setattr__(self, "u1", linalg.as_cmatrix(self.u1))
        if self.var_index < 1:
            raise ValueError(f"var_index must be >= 1, got {self.var_index}")
        if self.u0.shape != self.u1.shape:
            raise ValueError(
                f"u0 dimension {self.u0.shape[0]} does not match u1 dimension {self.u1.shape[0]}"
            )

    @property
    def dim(self) -> int:
        return self.u0.shape[0]

    @cached_property
    def _structure(self):
        return (_phase_permutation(self.u0), _phase_permutation(self.u1))

    def matrix(self, bit: int) -> np.ndarray:
        return self.u1 if bit else self.u0

    def _unitary_within(self, tol: float) -> bool:
        for u, struct in zip((self.u0, self.u1), self._structure):
            if struct is not None:
                if float(np.max(np.abs(np.abs(struct[1]) - 1.0))) <= tol:
                    continue
            if not linalg.is_unitary(u, tol):
                return False
        return True

    def apply_to(self, bit: int, psi: np.ndarray) -> np.ndarray:
        struct = self._structure[1 if bit else 0]
        if struct is not None:
            perm, phases = struct
            return phases * psi[perm]
        return self.matrix(bit) @ psi

    def apply_to_columns(self, bit: int, cols: np.ndarray) -> np.ndarray:
        struct = self._structure[1 if bit else 0]
        if struct is not None:
            perm, phases = struct
            return phases[:, None] * cols[perm, :]
        return self.matrix(bit) @ cols


@dataclass(frozen=True, eq=False)
class QbProgram:
    """Transformation sequence, initial configuration, accepting state set.

    State indices are 1-based.  ``accepting`` may be empty (the degenerate
    constant-0 case); the acceptance probability is then identically zero.
    """

    n_vars: int
    width: int
    transformations: tuple[QuantumTransformation, ...]
    initial: np.ndarray
    accepting: frozenset[int]
    unitary_tol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "transformations", tuple(self.transformations))
        object.__setattr__(self, "initial", linalg.as_cvector(self.initial))
        object.__setattr__(self, "accepting", frozenset(int(s) for s in self.accepting))
        if self.n_vars < 1:
            raise ValueError(f"n_vars must be >= 1, got {self.n_vars}")
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if self.initial.shape[0] != self.width:
            raise ValueError(
                f"initial vector dimension {self.initial.shape[0]} does not match width {self.width}"
            )
        if abs(linalg.norm(self.initial) - 1.0) > 1e-10:
            raise ValueError("initial configuration must have unit norm within 1e-10")
        for s in self.accepting:
            if not 1 <= s <= self.width:
                raise ValueError(f"accepting state {s} outside [1, {self.width}]")
        for level, tf in enumerate(self.transformations, start=1):
            if tf.dim != self.width:
                raise ValueError(
                    f"transformation at level {level} has dimension {tf.dim}, expected {self.width}"
                )
            if not 1 <= tf.var_index <= self.n_vars:
                raise ValueError(
                    f"transformation at level {level} reads x_{tf.var_index}, "
                    f"outside [1, {self.n_vars}]"
                )
            if not tf._unitary_within(self.unitary_tol):
                raise ValueError(
                    f"transformation at level {level} is not unitary within {self.unitary_tol}"
                )

    @property
    def length(self) -> int:
        return len(self.transformations)

    @property
    def var_sequence(self) -> tuple[int, ...]:
        return tuple(tf.var_index for tf in self.transformations)


def _accept_indices(accepting: frozenset[int]) -> np.ndarray:
    return np.array(sorted(accepting), dtype=np.intp) - 1


def accept_probability(psi: np.ndarray, accepting: frozenset[int]) -> float:
    """Squared norm of the projection of ``psi`` onto the accepting states."""
    if not accepting:
        return 0.0
    p = float(np.sum(np.abs(psi[_accept_indices(accepting)]) ** 2))
    return min(max(p, 0.0), 1.0)


def final_configuration(p: QbProgram, input_bits: Bits) -> np.ndarray:
    """Pre-measurement configuration after applying every level to the input."""
    bits = _as_bits(input_bits, p.n_vars)
    psi = p.initial
    for tf in p.transformations:
        psi = tf.apply_to(bits[tf.var_index - 1], psi)
    return psi


def evaluate(p: QbProgram, input_bits: Bits) -> float:
    """Acceptance probability of the program on one input, clamped to [0, 1]."""
    return accept_probability(final_configuration(p, input_bits), p.accepting)


def classify_probability(prob: float, epsilon: float) -> Classification:
    """Threshold an acceptance probability at margin ``epsilon``.

    Exactly 1/2 with epsilon 0 resolves to REJECTS (acceptance requires
    strictly more than 1/2 in the unbounded-error reading).
    """
    if not 0.0 <= epsilon <= 0.5:
        raise ValueError(f"epsilon must be in [0, 1/2], got {epsilon}")
    if prob <= 0.5 - epsilon:
        return Classification.REJECTS
    if prob >= 0.5 + epsilon:
        return Classification.ACCEPTS
    return Classification.UNDETERMINED


def classify(p: QbProgram, input_bits: Bits, epsilon: float) -> Classification:
    return classify_probability(evaluate(p, input_bits), epsilon)


def is_read_once(p: QbProgram) -> bool:
    """True iff no variable is read by more than one level."""
    seq = p.var_sequence
    return len(set(seq)) == len(seq)


def is_stable(p: QbProgram, tol: float = 1e-12) -> bool:
    """True iff every level applies the same (u0, u1) pair, entrywise within tol."""
    if p.length <= 1:
        return True
    first = p.transformations[0]
    for tf in p.transformations[1:]:
        if float(np.max(np.abs(tf.u0 - first.u0))) > tol:
            return False
        if float(np.max(np.abs(tf.u1 - first.u1))) > tol:
            return False
    return True


# -- exhaustive evaluation ---------------------------------------------------

def _leaf_matrix(p: QbProgram) -> np.ndarray:
    """Final configurations over all 2^l read-bit sequences, one per column.

    Column index is the bit sequence in read order, first bit most
    significant.  Requires a read-once program so each level branches on a
    fresh variable.
    """
    cols = p.initial.reshape(-1, 1)
    for tf in p.transformations:
        a0 = tf.apply_to_columns(0, cols)
        a1 = tf.apply_to_columns(1, cols)
        nxt = np.empty((p.width, 2 * cols.shape[1]), dtype=np.complex128)
        nxt[:, 0::2] = a0
        nxt[:, 1::2] = a1
        cols = nxt
    return cols


def _column_accept_probs(cols: np.ndarray, accepting: frozenset[int]) -> np.ndarray:
    if not accepting:
        return np.zeros(cols.shape[1])
    probs = np.sum(np.abs(cols[_accept_indices(accepting), :]) ** 2, axis=0)
    return np.clip(probs, 0.0, 1.0)


def _leaf_indices(var_sequence: Sequence[int], n_vars: int) -> np.ndarray:
    """For every input value, the leaf column index of its read-bit sequence."""
    values = np.arange(1 << n_vars, dtype=np.int64)
    idx = np.zeros(1 << n_vars, dtype=np.int64)
    for j in var_sequence:
        bit = (values >> (n_vars - j)) & 1
        idx = (idx << 1) | bit
    return idx


def evaluate_all(p: QbProgram) -> np.ndarray:
    """Acceptance probabilities for all 2^n inputs, indexed by input value.

    Read-once programs share work across inputs with a common prefix in
    read order; other programs fall back to per-input evaluation.
    """
    n = p.n_vars
    if n > MAX_EXHAUSTIVE_VARS:
        raise ValueError(f"exhaustive evaluation limited to n <= {MAX_EXHAUSTIVE_VARS}, got {n}")
    if is_read_once(p):
        probs = _column_accept_probs(_leaf_matrix(p), p.accepting)
        seq = p.var_sequence
        if seq == tuple(range(1, n + 1)):
            return probs
        return probs[_leaf_indices(seq, n)]
    return np.array([evaluate(p, bits_of_value(v, n)) for v in range(1 << n)])


# -- truth tables and computation checking -----------------------------------

@dataclass(frozen=True, eq=False)
class TruthTable:
    """Explicit Boolean function: bit v is the value on the input with
    binary encoding v (x_1 most significant)."""

    n_vars: int
    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=bool)
        if arr.ndim != 1 or arr.shape[0] != 1 << self.n_vars:
            raise ValueError(
                f"truth table needs {1 << self.n_vars} bits for n_vars {self.n_vars}, "
                f"got shape {arr.shape}"
            )
        if arr.flags.writeable:
            arr = arr.copy()
            arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    def value(self, input_bits: Bits | int) -> bool:
        if isinstance(input_bits, (int, np.integer)):
            return bool(self.bits[int(input_bits)])
        return bool(self.bits[value_of_bits(_as_bits(input_bits, self.n_vars))])

    @classmethod
    def from_function(cls, n_vars: int, fn: Callable[[tuple[int, ...]], object]) -> "TruthTable":
        bits = [bool(fn(bits_of_value(v, n_vars))) for v in range(1 << n_vars)]
        return cls(n_vars, np.array(bits))

    @classmethod
    def constant(cls, n_vars: int, value: bool) -> "TruthTable":
        return cls(n_vars, np.full(1 << n_vars, bool(value)))

    @classmethod
    def random(cls, n_vars: int, rng: np.random.Generator) -> "TruthTable":
        return cls(n_vars, rng.integers(0, 2, size=1 << n_vars).astype(bool))


@dataclass(frozen=True)
class Margin:
    """Symmetric criterion: 1-inputs accept with probability >= 1/2 + epsilon,
    0-inputs with probability <= 1/2 - epsilon."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 0.5:
            raise ValueError(f"epsilon must be in [0, 1/2], got {self.epsilon}")


@dataclass(frozen=True)
class OneSided:
    """One-sided criterion: 1-inputs accept with probability 1 within tol,
    0-inputs are rejected with probability >= reject_min - tol."""

    reject_min: float = 0.125
    tol: float = 1e-9


Criterion = Margin | OneSided


@dataclass(frozen=True)
class CheckReport:
    holds: bool
    counterexamples: tuple[tuple[int, ...], ...]
    min_margin: float
    checked: int


def _criterion_mask(probs: np.ndarray, fbits: np.ndarray, criterion: Criterion) -> np.ndarray:
    if isinstance(criterion, Margin):
        eps = criterion.epsilon
        rejects = probs <= 0.5 - eps
        accepts = (probs >= 0.5 + eps) & ~rejects
        return np.where(fbits, accepts, rejects)
    if isinstance(criterion, OneSided):
        ok1 = np.abs(probs - 1.0) <= criterion.tol
        ok0 = (1.0 - probs) >= criterion.reject_min - criterion.tol
        return np.where(fbits, ok1, ok0)
    raise TypeError(f"unknown criterion {criterion!r}")


def computes(p: QbProgram, f: TruthTable, criterion: Criterion) -> CheckReport:
    """Exhaustively check the program against a truth table.

    Counterexamples are listed in increasing input-value order.
    """
    if p.n_vars != f.n_vars:
        raise ValueError(f"program has n_vars {p.n_vars}, truth table has {f.n_vars}")
    probs = evaluate_all(p)
    ok = _criterion_mask(probs, f.bits, criterion)
    bad = np.nonzero(~ok)[0]
    return CheckReport(
        holds=bad.size == 0,
        counterexamples=tuple(bits_of_value(int(v), p.n_vars) for v in bad),
        min_margin=float(np.min(np.abs(probs - 0.5))),
        checked=int(probs.size),
    )


@dataclass(frozen=True)
class SampledReport:
    violations: int
    checked: int
    min_margin: float
    counterexamples: tuple[tuple[int, ...], ...]


def computes_sampled(
    p: QbProgram,
    f: TruthTable | Callable[[tuple[int, ...]], object],
    criterion: Criterion,
    samples: int,
    seed: int,
    max_recorded: int = 16,
) -> SampledReport:
    """Sampling-mode check for inputs too numerous to enumerate.

    Reports a violation count over uniformly random inputs; no "holds"
    verdict is produced.
    """
    rng = np.random.default_rng(seed)
    value = f.value if isinstance(f, TruthTable) else f
    violations = 0
    recorded: list[tuple[int, ...]] = []
    min_margin = 0.5
    for _ in range(samples):
        bits = tuple(int(b) for b in rng.integers(0, 2, size=p.n_vars))
        prob = evaluate(p, bits)
        min_margin = min(min_margin, abs(prob - 0.5))
        fb = np.array([bool(value(bits))])
        if not bool(_criterion_mask(np.array([prob]), fb, criterion)[0]):
            violations += 1
            if len(recorded) < max_recorded:
                recorded.append(bits)
    return SampledReport(violations, samples, min_margin, tuple(recorded))


# -- stable probabilistic OBDDs ----------------------------------------------

def _as_stochastic(data, what: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {arr.shape}")
    if np.any(arr < 0):
        row = int(np.nonzero((arr < 0).any(axis=1))[0][0])
        raise ValueError(f"{what} row {row + 1} has a negative entry")
    sums = arr.sum(axis=1)
    bad = np.nonzero(np.abs(sums - 1.0) > 1e-10)[0]
    if bad.size:
        raise ValueError(
            f"{what} row {int(bad[0]) + 1} sums to {sums[bad[0]]!r}, expected 1 within 1e-10"
        )
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class StableProbObdd:
    """Level-independent probabilistic OBDD: one stochastic matrix per bit
    value, iterated over a distribution row vector in variable order."""

    width: int
    a0: np.ndarray
    a1: np.ndarray
    initial_dist: np.ndarray
    accepting: frozenset[int]
    var_order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a0", _as_stochastic(self.a0, "a0"))
        object.__setattr__(self, "a1", _as_stochastic(self.a1, "a1"))
        object.__setattr__(self, "accepting", frozenset(int(s) for s in self.accepting))
        object.__setattr__(self, "var_order", tuple(int(v) for v in self.var_order))
        mu = np.asarray(self.initial_dist, dtype=np.float64)
        if mu.ndim != 1 or mu.shape[0] != self.width:
            raise ValueError(f"initial distribution must have length {self.width}")
        if np.any(mu < 0) or abs(float(mu.sum()) - 1.0) > 1e-10:
            raise ValueError("initial distribution must be nonnegative and sum to 1 within 1e-10")
        mu = mu.copy()
        mu.flags.writeable = False
        object.__setattr__(self, "initial_dist", mu)
        if self.a0.shape[0] != self.width or self.a1.shape[0] != self.width:
            raise ValueError("stochastic matrices must match the declared width")
        n = len(self.var_order)
        if sorted(self.var_order) != list(range(1, n + 1)):
            raise ValueError(f"var_order must be a permutation of 1..{n}")
        for s in self.accepting:
            if not 1 <= s <= self.width:
                raise ValueError(f"accepting state {s} outside [1, {self.width}]")


def state_distributions(m: StableProbObdd, input_bits: Bits) -> list[np.ndarray]:
    """Distribution row vector after every step, starting with the initial one."""
    bits = _as_bits(input_bits, len(m.var_order))
    mu = m.initial_dist
    out = [mu]
    for j in m.var_order:
        mu = mu @ (m.a1 if bits[j - 1] else m.a0)
        out.append(mu)
    return out


def evaluate_stable_prob_obdd(m: StableProbObdd, input_bits: Bits) -> float:
    """Acceptance probability: final distribution mass on accepting states."""
    mu = state_distributions(m, input_bits)[-1]
    if not m.accepting:
        return 0.0
    p = float(mu[_accept_indices(m.accepting)].sum())
    return min(max(p, 0.0), 1.0)


# -- program file format -------------------------------------------------------

class ProgramFormatError(ValueError):
    """Malformed program document; ``where`` locates the first error."""

    def __init__(self, where: str, problem: str):
        self.where = where
        self.problem = problem
        super().__init__(f"{where}: {problem}")


def _expect(obj, typ, where: str, what: str):
    if not isinstance(obj, typ):
        raise ProgramFormatError(where, f"expected {what}, got {type(obj).__name__}")
    return obj


def _complex_pair(obj, where: str) -> complex:
    pair = _expect(obj, list, where, "a [re, im] pair")
    if len(pair) != 2 or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair):
        raise ProgramFormatError(where, "expected a pair of two numbers")
    return complex(pair[0], pair[1])


def _complex_matrix(obj, where: str) -> np.ndarray:
    rows = _expect(obj, list, where, "a matrix (list of rows)")
    if not rows:
        raise ProgramFormatError(where, "matrix must be nonempty")
    out = []
    for i, row in enumerate(rows):
        cells = _expect(row, list, f"{where}[{i}]", "a row (list of pairs)")
        if len(cells) != len(rows):
            raise ProgramFormatError(f"{where}[{i}]", f"row length {len(cells)} in a {len(rows)}-row matrix")
        out.append([_complex_pair(c, f"{where}[{i}][{j}]") for j, c in enumerate(cells)])
    return np.array(out, dtype=np.complex128)


def program_to_obj(p: QbProgram) -> dict:
    def pairs_vec(v):
        return [[float(z.real), float(z.imag)] for z in v]

    def pairs_mat(m):
        return [pairs_vec(row) for row in m]

    return {
        "n_vars": p.n_vars,
        "width": p.width,
        "initial": pairs_vec(p.initial),
        "accepting": sorted(p.accepting),
        "transformations": [
            {"var": tf.var_index, "u0": pairs_mat(tf.u0), "u1": pairs_mat(tf.u1)}
            for tf in p.transformations
        ],
    }


def program_from_obj(obj) -> QbProgram:
    top = _expect(obj, dict, "$", "an object")
    for key in ("n_vars", "width", "initial", "accepting", "transformations"):
        if key not in top:
            raise ProgramFormatError("$", f"missing field {key!r}")
    n_vars = _expect(top["n_vars"], int, "$.n_vars", "an integer")
    width = _expect(top["width"], int, "$.width", "an integer")
    initial_obj = _expect(top["initial"], list, "$.initial", "a list of pairs")
    initial = np.array(
        [_complex_pair(c, f"$.initial[{i}]") for i, c in enumerate(initial_obj)],
        dtype=np.complex128,
    )
    accepting_obj = _expect(top["accepting"], list, "$.accepting", "a list of integers")
    accepting = set()
    for i, s in enumerate(accepting_obj):
        accepting.add(_expect(s, int, f"$.accepting[{i}]", "an integer"))
    tfs = []
    tf_list = _expect(top["transformations"], list, "$.transformations", "a list")
    for i, t in enumerate(tf_list):
        where = f"$.transformations[{i}]"
        t = _expect(t, dict, where, "an object")
        for key in ("var", "u0", "u1"):
            if key not in t:
                raise ProgramFormatError(where, f"missing field {key!r}")
        var = _expect(t["var"], int, f"{where}.var", "an integer")
        u0 = _complex_matrix(t["u0"], f"{where}.u0")
        u1 = _complex_matrix(t["u1"], f"{where}.u1")
        try:
            tfs.append(QuantumTransformation(var, u0, u1))
        except ValueError as e:
            raise ProgramFormatError(where, str(e)) from e
    try:
        return QbProgram(n_vars, width, tuple(tfs), initial, frozenset(accepting))
    except ValueError as e:
        raise ProgramFormatError("$", str(e)) from e


def save_program(p: QbProgram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(program_to_obj(p), fh)
        fh.write("\n")


def load_program(path) -> QbProgram:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise ProgramFormatError(f"line {e.lineno} column {e.colno}", e.msg) from e
    return program_from_obj(obj)


def program_digest(p: QbProgram) -> str:
    """Stable hex digest of the canonical serialization."""
    blob = json.dumps(program_to_obj(p), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]
