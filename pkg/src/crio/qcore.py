"""Dense statevector engine for small registers of labeled qubits.

Index convention is big-endian: the label at position 0 is the most
significant bit of the amplitude index, so a printed bitstring reads in
label order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ATOL_ALGEBRA = 1e-12   # single algebraic identities
ATOL_PIPELINE = 1e-10  # accumulated multi-gate pipelines

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

_KET_PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
_KET_MINUS = np.array([1, -1], dtype=complex) / math.sqrt(2)
_KET_0 = np.array([1, 0], dtype=complex)
_KET_1 = np.array([0, 1], dtype=complex)


@dataclass(frozen=True)
class PauliAxis:
    """Unit axis vector n; induces the axis Pauli sigma_n = n . (sx, sy, sz)."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if abs(self.norm() - 1.0) > ATOL_ALGEBRA:
            raise ValueError(f"axis vector must have unit norm, got {self.norm()}")

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @staticmethod
    def unit(x: float, y: float, z: float) -> "PauliAxis":
        """Build an axis from any nonzero vector by normalizing it."""
        n = math.sqrt(x * x + y * y + z * z)
        if n < 1e-15:
            raise ValueError("cannot normalize a zero axis vector")
        return PauliAxis(x / n, y / n, z / n)


X_AXIS = PauliAxis(1.0, 0.0, 0.0)
Y_AXIS = PauliAxis(0.0, 1.0, 0.0)
Z_AXIS = PauliAxis(0.0, 0.0, 1.0)


def random_axis(rng: np.random.Generator) -> PauliAxis:
    """Uniformly random unit axis."""
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-6:
            return PauliAxis(*(v / n))


def pauli_axis_matrix(axis: PauliAxis) -> np.ndarray:
    """sigma_n = x*sx + y*sy + z*sz; Hermitian, involutive, traceless."""
    return axis.x * PAULI_X + axis.y * PAULI_Y + axis.z * PAULI_Z


def rotation(axis: PauliAxis, alpha: float) -> np.ndarray:
    """exp(i*alpha*sigma_n) = cos(alpha) I + i sin(alpha) sigma_n."""
    return math.cos(alpha) * IDENTITY_2 + 1j * math.sin(alpha) * pauli_axis_matrix(axis)


@dataclass(frozen=True)
class MeasurementRecord:
    qubit: str
    basis: str          # "Z" or "X"
    outcome: int        # 0 -> |0>/|+>, 1 -> |1>/|->
    probability: float  # of the realized outcome, before renormalization


class QuantumState:
    """Pure state on named qubits stored as a dense complex amplitude vector."""

    __slots__ = ("labels", "amplitudes")

    def __init__(self, labels: Iterable[str], amplitudes, copy: bool = True):
        labels = tuple(str(l) for l in labels)
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate qubit labels")
        amps = np.array(amplitudes, dtype=complex, copy=copy).reshape(-1)
        if amps.shape != (2 ** len(labels),):
            raise ValueError(
                f"expected {2 ** len(labels)} amplitudes for {len(labels)} qubits, got {amps.shape[0]}"
            )
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"state is not normalized: norm = {nrm}")
        self.labels = labels
        self.amplitudes = amps

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    def axis_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown qubit label {label!r}") from None

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape([2] * self.num_qubits)

    def amplitude(self, bits) -> complex:
        bits = _bit_string(bits, self.num_qubits)
        return complex(self.amplitudes[int(bits, 2)])

    def copy(self) -> "QuantumState":
        return QuantumState(self.labels, self.amplitudes, copy=True)

    def reordered(self, new_labels: Sequence[str]) -> "QuantumState":
        """Permute qubits into the given label order (must be the same set)."""
        new_labels = tuple(new_labels)
        if set(new_labels) != set(self.labels) or len(new_labels) != len(self.labels):
            raise ValueError("reordering requires the same label set")
        perm = [self.axis_of(l) for l in new_labels]
        t = self.tensor_view().transpose(perm)
        return QuantumState(new_labels, t.reshape(-1), copy=True)

    def __repr__(self) -> str:
        return f"QuantumState(labels={self.labels}, dim={len(self.amplitudes)})"


def _bit_string(bits, length: int) -> str:
    if isinstance(bits, str):
        s = bits
    else:
        s = "".join(str(int(b)) for b in bits)
    if len(s) != length or any(c not in "01" for c in s):
        raise ValueError(f"expected a bitstring of length {length}, got {bits!r}")
    return s


def plus_state(labels: Iterable[str]) -> QuantumState:
    labels = tuple(labels)
    n = len(labels)
    return QuantumState(labels, np.full(2 ** n, 2 ** (-n / 2), dtype=complex), copy=False)


def basis_state(labels: Iterable[str], bits) -> QuantumState:
    labels = tuple(labels)
    bits = _bit_string(bits, len(labels))
    amps = np.zeros(2 ** len(labels), dtype=complex)
    amps[int(bits, 2)] = 1.0
    return QuantumState(labels, amps, copy=False)


def product_state(labels: Iterable[str], qubit_vectors: Sequence) -> QuantumState:
    """Tensor product of normalized single-qubit kets, one per label."""
    labels = tuple(labels)
    if len(qubit_vectors) != len(labels):
        raise ValueError("one qubit vector per label required")
    amps = np.array([1.0], dtype=complex)
    for v in qubit_vectors:
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape != (2,):
            raise ValueError("qubit vectors must have length 2")
        amps = np.kron(amps, v)
    return QuantumState(labels, amps, copy=False)


def tensor(a: QuantumState, b: QuantumState) -> QuantumState:
    if set(a.labels) & set(b.labels):
        raise ValueError("tensor factors share qubit labels")
    return QuantumState(a.labels + b.labels, np.kron(a.amplitudes, b.amplitudes), copy=False)


def _check_unitary(matrix, dim: int) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix")
    if np.max(np.abs(m @ m.conj().T - np.eye(dim))) > 1e-10:
        raise ValueError("matrix is not unitary within 1e-10")
    return m


def apply_1q(state: QuantumState, matrix, qubit: str) -> QuantumState:
    m = _check_unitary(matrix, 2)
    ax = state.axis_of(qubit)
    t = np.moveaxis(state.tensor_view(), ax, -1) @ m.T
    return QuantumState(state.labels, np.moveaxis(t, -1, ax).reshape(-1), copy=False)


def apply_2q_cz(state: QuantumState, q1: str, q2: str) -> QuantumState:
    a1, a2 = state.axis_of(q1), state.axis_of(q2)
    if a1 == a2:
        raise ValueError("CZ requires two distinct qubits")
    new = state.amplitudes.copy().reshape([2] * state.num_qubits)
    idx = [slice(None)] * state.num_qubits
    idx[a1] = 1
    idx[a2] = 1
    new[tuple(idx)] *= -1
    return QuantumState(state.labels, new.reshape(-1), copy=False)


def apply_controlled_op(state: QuantumState, control: str, target: str, matrix) -> QuantumState:
    """|0><0| (x) I + |1><1| (x) U between two labeled qubits."""
    m = _check_unitary(matrix, 2)
    ac, at = state.axis_of(control), state.axis_of(target)
    if ac == at:
        raise ValueError("control and target must differ")
    new = state.amplitudes.copy().reshape([2] * state.num_qubits)
    idx = [slice(None)] * state.num_qubits
    idx[ac] = 1
    sub = new[tuple(idx)]
    sub_t = at - 1 if at > ac else at
    moved = np.moveaxis(sub, sub_t, -1) @ m.T
    new[tuple(idx)] = np.moveaxis(moved, -1, sub_t)
    return QuantumState(state.labels, new.reshape(-1), copy=False)


def _basis_kets(basis: str):
    basis = basis.upper()
    if basis == "Z":
        return _KET_0, _KET_1
    if basis == "X":
        return _KET_PLUS, _KET_MINUS
    raise ValueError("basis must be 'Z' or 'X'")


def _components(state: QuantumState, qubit: str, basis: str):
    """Unnormalized rest-of-register components along the two basis kets."""
    ax = state.axis_of(qubit)
    t = np.moveaxis(state.tensor_view(), ax, 0).reshape(2, -1)
    k0, k1 = _basis_kets(basis)
    return k0.conj() @ t, k1.conj() @ t


def measurement_probabilities(state: QuantumState, qubit: str, basis: str):
    c0, c1 = _components(state, qubit, basis)
    return float(np.vdot(c0, c0).real), float(np.vdot(c1, c1).real)


def measure(
    state: QuantumState,
    qubit: str,
    basis: str,
    forced_outcome: int | None = None,
    rng: np.random.Generator | None = None,
    remove: bool = False,
):
    """Projective measurement of one qubit in the Z or X basis.

    Returns (MeasurementRecord, post_state). With remove=True the measured
    qubit is dropped from the register. When forced_outcome is None the
    outcome is drawn from rng (a fresh generator if not supplied).
    """
    c0, c1 = _components(state, qubit, basis)
    probs = (float(np.vdot(c0, c0).real), float(np.vdot(c1, c1).real))
    if forced_outcome is not None:
        outcome = int(forced_outcome)
        if outcome not in (0, 1):
            raise ValueError("outcome must be 0 or 1")
        if probs[outcome] <= 1e-12:
            raise ValueError(
                f"forcing a zero-probability outcome ({qubit}, basis {basis}, outcome {outcome})"
            )
    else:
        if rng is None:
            rng = np.random.default_rng()
        outcome = 0 if rng.random() < probs[0] else 1
    comp = (c0, c1)[outcome] / math.sqrt(probs[outcome])
    record = MeasurementRecord(qubit, basis.upper(), outcome, probs[outcome])

    ax = state.axis_of(qubit)
    rest_labels = state.labels[:ax] + state.labels[ax + 1 :]
    if remove:
        return record, QuantumState(rest_labels, comp, copy=False)
    ket = _basis_kets(basis)[outcome]
    full = ket[:, None] * comp[None, :]
    full = np.moveaxis(full.reshape([2] * state.num_qubits), 0, ax)
    return record, QuantumState(state.labels, full.reshape(-1), copy=False)


def project_qubit(state: QuantumState, qubit: str, ket, remove: bool = True):
    """Project one qubit onto an arbitrary normalized ket.

    Returns (probability, post_state); post_state is None when the
    projection annihilates the state.
    """
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    if ket.shape != (2,):
        raise ValueError("projection ket must have length 2")
    ax = state.axis_of(qubit)
    t = np.moveaxis(state.tensor_view(), ax, 0).reshape(2, -1)
    comp = ket.conj() @ t
    p = float(np.vdot(comp, comp).real)
    if p < 1e-15:
        return 0.0, None
    comp = comp / math.sqrt(p)
    rest_labels = state.labels[:ax] + state.labels[ax + 1 :]
    if remove:
        return p, QuantumState(rest_labels, comp, copy=False)
    full = ket[:, None] * comp[None, :]
    full = np.moveaxis(full.reshape([2] * state.num_qubits), 0, ax)
    return p, QuantumState(state.labels, full.reshape(-1), copy=False)


def fidelity_up_to_phase(s1: QuantumState, s2: QuantumState) -> float:
    """|<s1|s2>|; equals 1 iff the states agree up to a global phase."""
    if len(s1.amplitudes) != len(s2.amplitudes):
        raise ValueError("dimension mismatch")
    if s1.labels != s2.labels:
        s2 = s2.reordered(s1.labels)
    return float(abs(np.vdot(s1.amplitudes, s2.amplitudes)))


def reduced_density(state: QuantumState, keep_labels: Sequence[str]) -> np.ndarray:
    """Density matrix of the listed qubits with everything else traced out."""
    keep = [state.axis_of(l) for l in keep_labels]
    rest = [i for i in range(state.num_qubits) if i not in keep]
    t = state.tensor_view().transpose(keep + rest).reshape(2 ** len(keep), -1)
    return t @ t.conj().T


def purity(rho: np.ndarray) -> float:
    return float(np.trace(rho @ rho).real)
