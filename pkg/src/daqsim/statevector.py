"""Dense state vectors, gate application, reduced states, sampling and the
dense-exponential propagator used as the exact reference.

Qubit 0 is the least significant bit of the basis index. Bitstrings are
printed with qubit 0 rightmost, so basis index 1 on two qubits is ``"01"``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels

MAX_QUBITS = 24
MAX_DENSE_QUBITS = 10
UNITARY_ATOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


def rx(theta):
    """``exp(-i theta X / 2)``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    """``exp(-i theta Z / 2)``."""
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes, got shape {self.amplitudes.shape}")

    def copy(self):
        return StateVector(self.n_qubits, self.amplitudes.copy())

    @property
    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def norm(self):
        return float(np.sqrt(np.sum(self.probabilities)))

    def _rows(self):
        return self.amplitudes.reshape(1, -1)


def _check_qubit(n_qubits, q):
    if not 0 <= q < n_qubits:
        raise IndexError(f"qubit {q} out of range for {n_qubits} qubits")


def new_basis_state(n_qubits, basis_index=0):
    if not 0 < n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
    if not 0 <= basis_index < (1 << n_qubits):
        raise IndexError(f"basis index {basis_index} out of range")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[basis_index] = 1.0
    return StateVector(n_qubits, amps)


def from_bitstring(bits):
    return new_basis_state(len(bits), int(bits, 2))


def is_unitary(u, atol=UNITARY_ATOL):
    u = np.asarray(u)
    return np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=atol, rtol=0)


def apply_1q(state, qubit, u):
    _check_qubit(state.n_qubits, qubit)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or not is_unitary(u):
        raise ValueError("u must be a 2x2 unitary")
    out = state.copy()
    kernels.apply_1q(out._rows(), qubit, u)
    return out


def apply_cnot(state, control, target):
    _check_qubit(state.n_qubits, control)
    _check_qubit(state.n_qubits, target)
    if control == target:
        raise ValueError("control and target must differ")
    out = state.copy()
    kernels.apply_cnot(out._rows(), control, target)
    return out


def z_signs(n_qubits, qubit):
    """+1 where ``qubit`` is 0, -1 where it is 1, over all basis indices."""
    k = np.arange(1 << n_qubits)
    return 1 - 2 * ((k >> qubit) & 1)


def zz_diagonal(n_qubits, terms):
    """``sum theta_ij z_i z_j`` for every basis index."""
    diag = np.zeros(1 << n_qubits)
    for i, j, theta in terms:
        if i == j:
            raise ValueError(f"ZZ term needs two distinct qubits, got ({i}, {j})")
        _check_qubit(n_qubits, i)
        _check_qubit(n_qubits, j)
        diag += theta * z_signs(n_qubits, i) * z_signs(n_qubits, j)
    return diag


def apply_zz_phase(state, terms):
    """Multiply each amplitude by ``exp(-i sum theta_ij z_i z_j)``, z = +1 for bit 0."""
    phase = zz_diagonal(state.n_qubits, terms)
    return StateVector(state.n_qubits, state.amplitudes * np.exp(-1j * phase))


def partial_trace_single(state, qubit):
    """Reduced 2x2 density matrix of one qubit of a pure state."""
    _check_qubit(state.n_qubits, qubit)
    n = state.n_qubits
    a = state.amplitudes.reshape(1 << (n - 1 - qubit), 2, 1 << qubit)
    rho = np.einsum("aib,ajb->ij", a, a.conj())
    return rho / np.trace(rho).real


def reduced_density_batch(states, qubit):
    """Mean single-qubit reduced density matrix over a batch of states (rows)."""
    b, n_amp = states.shape
    a = states.reshape(b, n_amp // (2 << qubit), 2, 1 << qubit)
    rho = np.einsum("raib,rajb->ij", a, a.conj()) / b
    return rho / np.trace(rho).real


def is_density_matrix(rho, atol=1e-10):
    rho = np.asarray(rho)
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        return False
    if abs(np.trace(rho) - 1) > atol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -atol)


def sample_indices(probs, n_runs, rng):
    """Inverse-CDF sampling of basis indices; ``probs`` may be unnormalized."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    cdf = np.cumsum(probs)
    u = rng.random(n_runs) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def format_bitstrings(indices, n_qubits):
    return [format(int(k), f"0{n_qubits}b") for k in indices]


def sample_bitstrings(state, n_runs, rng):
    return format_bitstrings(sample_indices(state.probabilities, n_runs, rng), state.n_qubits)


def pauli_operator(n_qubits, paulis):
    """Dense operator for ``{qubit: 'X'|'Y'|'Z'}`` (little-endian kron order)."""
    op = np.ones((1, 1), dtype=complex)
    for q in reversed(range(n_qubits)):
        op = np.kron(op, PAULI[paulis.get(q, "I")])
    return op


def hamiltonian_matrix(terms, n_qubits):
    """Dense matrix of ``sum coeff * P`` for terms ``(coeff, {qubit: pauli})``."""
    if n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"dense matrices limited to {MAX_DENSE_QUBITS} qubits")
    dim = 1 << n_qubits
    h = np.zeros((dim, dim), dtype=complex)
    for coeff, paulis in terms:
        for q in paulis:
            _check_qubit(n_qubits, q)
        h += coeff * pauli_operator(n_qubits, paulis)
    return h


def exact_propagator(terms, t, n_qubits):
    """``exp(-i H t)`` by Hermitian eigendecomposition."""
    h = hamiltonian_matrix(terms, n_qubits)
    w, v = scipy.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def phase_distance(u, v):
    """Operator distance up to global phase.

    ``min_phi ||u - e^{i phi} v||_F / sqrt(d)``; the optimal phase is
    ``arg tr(v^+ u)`` and the norm is taken directly to avoid cancellation.
    """
    u = np.asarray(u)
    v = np.asarray(v)
    ov = np.vdot(v, u)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v) / np.sqrt(u.shape[0]))


def state_distance(a, b):
    """``min_phi || a - e^{i phi} b ||`` for normalized vectors."""
    a = getattr(a, "amplitudes", a)
    b = getattr(b, "amplitudes", b)
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))
