"""Exact statevector simulation of small qubit registers.

A :class:`QubitStore` tracks qubits by globally unique ids and keeps each
group of entangled qubits in its own minimal :class:`StateRegister`, so a
protocol run over thousands of Bell pairs never touches more than a handful
of amplitudes at a time. Registers are merged lazily, only when a joint
measurement spans two of them; merging caps at 12 qubits and anything larger
fails loudly. Measured qubits are retired from the store for good.

Bit-ordering convention, used everywhere: the first qubit listed in a
register is the most significant bit of the basis index. Bell states follow
|psi+-> = (|00> +- |11>)/sqrt(2) and |phi+-> = (|01> +- |10>)/sqrt(2).

Randomness is never ambient: every sampling operation takes a numpy
Generator, and identical seeds reproduce identical outcome sequences and
final stores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import TYPE_CHECKING, Sequence

import numpy as np

if TYPE_CHECKING:
    from .pauli import GroupElement

NORM_TOL = 1e-10
MAX_REGISTER_QUBITS = 12

_INV_SQRT2 = math.sqrt(0.5)


class UnknownQubitError(KeyError):
    """Raised when an operation names a qubit the store does not track."""


class RegisterCapacityError(RuntimeError):
    """Raised when an operation would merge registers past the 12-qubit cap."""


class BellOutcome(IntEnum):
    PSI_PLUS = 0
    PSI_MINUS = 1
    PHI_PLUS = 2
    PHI_MINUS = 3

    @property
    def label(self) -> str:
        return _BELL_LABELS[self]

    @property
    def x_bit(self) -> int:
        """1 iff the state carries a bit flip (phi family)."""
        return int(self) >> 1

    @property
    def z_bit(self) -> int:
        """1 iff the state carries a phase flip (minus sign)."""
        return int(self) & 1


_BELL_LABELS = {
    BellOutcome.PSI_PLUS: "psi+",
    BellOutcome.PSI_MINUS: "psi-",
    BellOutcome.PHI_PLUS: "phi+",
    BellOutcome.PHI_MINUS: "phi-",
}

# Rows indexed by BellOutcome; columns over |00>, |01>, |10>, |11>.
BELL_VECTORS = np.array(
    [
        [_INV_SQRT2, 0.0, 0.0, _INV_SQRT2],
        [_INV_SQRT2, 0.0, 0.0, -_INV_SQRT2],
        [0.0, _INV_SQRT2, _INV_SQRT2, 0.0],
        [0.0, _INV_SQRT2, -_INV_SQRT2, 0.0],
    ],
    dtype=complex,
)


class FourQubitState(Enum):
    OMEGA = "omega"
    CLUSTER = "cluster"


def four_qubit_vector(which: FourQubitState) -> np.ndarray:
    """Amplitudes of the named 4-qubit resource state, ±1/2 on four kets."""
    vec = np.zeros(16, dtype=complex)
    if which is FourQubitState.OMEGA:
        terms = {0b0000: 0.5, 0b0110: 0.5, 0b1001: 0.5, 0b1111: -0.5}
    else:
        terms = {0b0000: 0.5, 0b0011: 0.5, 0b1100: 0.5, 0b1111: -0.5}
    for idx, amp in terms.items():
        vec[idx] = amp
    return vec


@dataclass
class StateRegister:
    """Ordered qubits plus their joint amplitude vector (first qubit = MSB)."""

    qubits: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.qubits = tuple(self.qubits)
        k = len(self.qubits)
        if not 1 <= k <= MAX_REGISTER_QUBITS:
            raise RegisterCapacityError(f"register size {k} outside 1..{MAX_REGISTER_QUBITS}")
        if len(set(self.qubits)) != k:
            raise ValueError("duplicate qubit in register")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.shape != (2**k,):
            raise ValueError("amplitude vector length must be 2^k")
        norm_sq = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"register norm^2 {norm_sq} deviates from 1")

    @property
    def size(self) -> int:
        return len(self.qubits)

    def position(self, qubit: int) -> int:
        try:
            return self.qubits.index(qubit)
        except ValueError:
            raise UnknownQubitError(qubit) from None

    def copy(self) -> "StateRegister":
        return StateRegister(self.qubits, self.amplitudes.copy())

    def apply_matrix(self, pos: int, mat: np.ndarray) -> None:
        """Apply a single-qubit operator in place at the given position."""
        k = self.size
        if k == 1:
            self.amplitudes = mat @ self.amplitudes
        elif k == 2:
            arr = self.amplitudes.reshape(2, 2)
            self.amplitudes = (mat @ arr if pos == 0 else arr @ mat.T).reshape(-1)
        else:
            arr = self.amplitudes.reshape([2] * k)
            arr = np.tensordot(mat, arr, axes=([1], [pos]))
            self.amplitudes = np.moveaxis(arr, 0, pos).reshape(-1)

    def reordered(self, new_order: Sequence[int]) -> "StateRegister":
        """Same state with qubits listed in ``new_order``."""
        if sorted(new_order) != sorted(self.qubits):
            raise ValueError("new order must be a permutation of the register's qubits")
        perm = [self.position(q) for q in new_order]
        arr = self.amplitudes.reshape([2] * self.size)
        return StateRegister(tuple(new_order), np.transpose(arr, perm).reshape(-1))


def inner_product(a: StateRegister, b: StateRegister) -> complex:
    """Hermitian inner product <a|b> of two same-sized registers."""
    if a.size != b.size:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_element(
    register: StateRegister, element: "GroupElement", targets: Sequence[int]
) -> StateRegister:
    """Return a copy of ``register`` with a Pauli word applied to target qubits."""
    if element.arity != len(targets):
        raise ValueError("element arity must equal the number of targets")
    out = register.copy()
    for letter, qubit in zip(element.letters, targets):
        out.apply_matrix(out.position(qubit), letter.matrix)
    return out


def _sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Born-rule draw; zero-probability outcomes are never selected."""
    total = float(probs.sum())
    u = rng.random() * total
    acc = 0.0
    last = 0
    for i, p in enumerate(probs):
        if p <= 0.0:
            continue
        acc += float(p)
        last = i
        if u < acc:
            return i
    return last  # float roundoff pushed u past the final bin


class QubitStore:
    """Registry of live qubits; owns allocation, Pauli action and measurement.

    Confined to one protocol run: ids are never reused, and a measured qubit
    disappears permanently.
    """

    def __init__(self):
        self._registers: dict[int, StateRegister] = {}
        self._next_id = 0

    # -- allocation ----------------------------------------------------

    def _fresh_ids(self, count: int) -> tuple[int, ...]:
        ids = tuple(range(self._next_id, self._next_id + count))
        self._next_id += count
        return ids

    def _install(self, register: StateRegister) -> None:
        for q in register.qubits:
            self._registers[q] = register

    def new_bell(self, kind: BellOutcome) -> tuple[int, int]:
        """Allocate a fresh pair prepared in the named Bell state."""
        a, b = self._fresh_ids(2)
        self._install(StateRegister((a, b), BELL_VECTORS[kind].copy()))
        return a, b

    def new_four_qubit(self, which: FourQubitState) -> tuple[int, int, int, int]:
        """Allocate four fresh qubits in the named 4-qubit resource state."""
        ids = self._fresh_ids(4)
        self._install(StateRegister(ids, four_qubit_vector(which)))
        return ids

    def new_computational(self, bit: int) -> int:
        """Allocate one fresh qubit in |0> or |1>."""
        (q,) = self._fresh_ids(1)
        vec = np.zeros(2, dtype=complex)
        vec[int(bit)] = 1.0
        self._install(StateRegister((q,), vec))
        return q

    # -- introspection ---------------------------------------------------

    def tracked(self, qubit: int) -> bool:
        return qubit in self._registers

    def live_qubits(self) -> list[int]:
        return sorted(self._registers)

    def register_of(self, qubit: int) -> StateRegister:
        try:
            return self._registers[qubit]
        except KeyError:
            raise UnknownQubitError(qubit) from None

    # -- unitaries -------------------------------------------------------

    def apply_pauli(self, element: "GroupElement", targets: Sequence[int]) -> None:
        """Apply a Pauli word letter-by-letter; no merging is ever needed."""
        if element.arity != len(targets):
            raise ValueError(
                f"arity mismatch: element has {element.arity} letters, {len(targets)} targets"
            )
        for letter, qubit in zip(element.letters, targets):
            reg = self.register_of(qubit)
            reg.apply_matrix(reg.position(qubit), letter.matrix)

    # -- measurement -----------------------------------------------------

    def _joint_register(self, qubits: Sequence[int]) -> StateRegister:
        """Register containing all the qubits, merging lazily if needed."""
        regs: list[StateRegister] = []
        for q in qubits:
            reg = self.register_of(q)
            if all(reg is not seen for seen in regs):
                regs.append(reg)
        if len(regs) == 1:
            return regs[0]
        total = sum(r.size for r in regs)
        if total > MAX_REGISTER_QUBITS:
            raise RegisterCapacityError(
                f"merge of {total} qubits exceeds the {MAX_REGISTER_QUBITS}-qubit cap"
            )
        amps = regs[0].amplitudes
        joined: tuple[int, ...] = regs[0].qubits
        for reg in regs[1:]:
            amps = np.kron(amps, reg.amplitudes)
            joined = joined + reg.qubits
        merged = StateRegister(joined, amps)
        self._install(merged)
        return merged

    def _collapse(
        self,
        register: StateRegister,
        measured: Sequence[int],
        branch_amplitudes: np.ndarray,
        probability: float,
    ) -> None:
        """Retire measured qubits; renormalize whatever remains."""
        for q in measured:
            del self._registers[q]
        remaining = tuple(q for q in register.qubits if q not in measured)
        if remaining:
            post = branch_amplitudes / math.sqrt(probability)
            self._install(StateRegister(remaining, post))

    def measure_bell(self, a: int, b: int, rng: np.random.Generator) -> BellOutcome:
        """Projective Bell-basis measurement of qubits (a, b).

        Qubits living in different registers are merged first, so measuring
        across two entangled pairs performs entanglement swapping on the
        partners left behind. Both measured qubits are retired.
        """
        if a == b:
            raise ValueError("cannot Bell-measure a qubit against itself")
        reg = self._joint_register((a, b))
        pa, pb = reg.position(a), reg.position(b)
        if reg.size == 2:
            vec = reg.amplitudes if pa == 0 else reg.amplitudes[[0, 2, 1, 3]]
            amps = BELL_VECTORS.conj() @ vec
            probs = np.abs(amps) ** 2
            outcome = _sample_index(probs, rng)
            self._collapse(reg, (a, b), np.empty(0), float(probs[outcome]))
        else:
            arr = reg.amplitudes.reshape([2] * reg.size)
            arr = np.moveaxis(arr, (pa, pb), (0, 1)).reshape(4, -1)
            branches = BELL_VECTORS.conj() @ arr  # (4, 2^(k-2))
            probs = np.einsum("ij,ij->i", branches, branches.conj()).real
            outcome = _sample_index(probs, rng)
            self._collapse(reg, (a, b), branches[outcome], float(probs[outcome]))
        return BellOutcome(outcome)

    def measure_z(self, qubit: int, rng: np.random.Generator) -> int:
        """Computational-basis measurement; the qubit is retired."""
        reg = self.register_of(qubit)
        pos = reg.position(qubit)
        if reg.size == 1:
            probs = np.abs(reg.amplitudes) ** 2
            outcome = _sample_index(probs, rng)
            self._collapse(reg, (qubit,), np.empty(0), float(probs[outcome]))
        else:
            arr = reg.amplitudes.reshape([2] * reg.size)
            arr = np.moveaxis(arr, pos, 0).reshape(2, -1)
            probs = np.einsum("ij,ij->i", arr, arr.conj()).real
            outcome = _sample_index(probs, rng)
            self._collapse(reg, (qubit,), arr[outcome], float(probs[outcome]))
        return int(outcome)

    def measure_in_basis(
        self,
        qubits: Sequence[int],
        basis: np.ndarray,
        rng: np.random.Generator,
    ) -> int:
        """Projective measurement of ``qubits`` in an orthonormal basis.

        ``basis`` is a (d, 2^m) array of bra rows over the listed qubit
        order; it must resolve (within tolerance) all probability mass of
        the state. Returns the sampled row index; measured qubits retire.
        """
        if len(set(qubits)) != len(qubits):
            raise ValueError("measured qubits must be distinct")
        reg = self._joint_register(qubits)
        m = len(qubits)
        basis = np.asarray(basis, dtype=complex)
        if basis.shape[1] != 2**m:
            raise ValueError("basis row length must be 2^(number of measured qubits)")
        positions = [reg.position(q) for q in qubits]
        arr = reg.amplitudes.reshape([2] * reg.size)
        arr = np.moveaxis(arr, positions, range(m)).reshape(2**m, -1)
        branches = basis.conj() @ arr
        probs = np.einsum("ij,ij->i", branches, branches.conj()).real
        if abs(float(probs.sum()) - 1.0) > 1e-9:
            raise ValueError("basis does not resolve the state's probability mass")
        outcome = _sample_index(probs, rng)
        self._collapse(reg, tuple(qubits), branches[outcome], float(probs[outcome]))
        return int(outcome)
