"""Observables and figures of merit: excitation number with standard error,
magnetization, half-difference, l1 and Fourier comparisons of series,
classical and quantum distances, and the closed-form trace distance of a
target qubit dephased by two ZZ-coupled neighbours.
"""
import math
from dataclasses import dataclass

import numpy as np

BELL_STATES = ("phi+", "phi-", "psi+", "psi-")


@dataclass
class ObservableSeries:
    t_phys_us: np.ndarray
    t_mapped: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    label: str = ""

    def __post_init__(self):
        for name in ("t_phys_us", "t_mapped", "values", "stderr"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.values)
        if not (len(self.t_phys_us) == len(self.t_mapped) == len(self.stderr) == n):
            raise ValueError("series arrays must have equal lengths")
        if np.any(self.stderr < 0):
            raise ValueError("standard errors must be non-negative")


def _bits(sample, n_qubits):
    """0/1 matrix ``(n_runs, n_qubits)`` from bitstrings (qubit 0 rightmost) or an array."""
    if isinstance(sample, np.ndarray) and sample.ndim == 2:
        bits = sample.astype(np.int64)
    else:
        sample = list(sample)
        if sample and not isinstance(sample[0], str):
            idx = np.asarray(sample, dtype=np.int64)
            return (idx[:, None] >> np.arange(n_qubits)) & 1
        for s in sample:
            if len(s) != n_qubits:
                raise ValueError(f"bitstring {s!r} does not have {n_qubits} bits")
        bits = np.array([[int(c) for c in reversed(s)] for s in sample], dtype=np.int64)
        bits = bits.reshape(len(sample), n_qubits)
    if len(bits) == 0:
        raise ValueError("empty sample")
    return bits


def mean_excitation(sample, n_qubits, qubits=None, normalized=True):
    """Mean excitation number over runs and its standard error.

    Each run contributes ``n_i = sum_j s_j`` over ``qubits`` (divided by their
    count unless ``normalized=False``);
    ``SE = sqrt(sum (n_i - mean)^2 / (N (N - 1)))``.
    """
    bits = _bits(sample, n_qubits)
    cols = list(range(n_qubits)) if qubits is None else list(qubits)
    n_i = bits[:, cols].sum(axis=1).astype(float)
    if normalized:
        n_i /= len(cols)
    runs = len(n_i)
    mean = float(n_i.mean())
    if runs < 2:
        return mean, float("nan")
    se = math.sqrt(float(np.sum((n_i - mean) ** 2)) / (runs * (runs - 1)))
    return mean, se


def excitation_from_probabilities(probs, n_qubits, qubits=None, normalized=True):
    """Exact mean excitation of a basis-state distribution."""
    probs = np.asarray(probs, dtype=float)
    k = np.arange(len(probs))
    cols = list(range(n_qubits)) if qubits is None else list(qubits)
    n_k = sum(((k >> q) & 1) for q in cols).astype(float)
    if normalized:
        n_k /= len(cols)
    return float(np.dot(probs, n_k) / probs.sum())


def magnetization_pattern(sample, n_qubits):
    """``m_j = 2 <n_j> - 1`` per qubit."""
    return 2.0 * _bits(sample, n_qubits).mean(axis=0) - 1.0


def magnetization_from_probabilities(probs, n_qubits):
    probs = np.asarray(probs, dtype=float) / np.sum(probs)
    k = np.arange(len(probs))
    return np.array([2.0 * np.dot(probs, (k >> q) & 1) - 1.0 for q in range(n_qubits)])


def half_difference(m, up_set, down_set):
    """Mean magnetization of the initially-up spins minus that of the initially-down ones."""
    up, down = set(up_set), set(down_set)
    if not up or not down:
        raise ValueError("up and down sets must be non-empty")
    if up & down:
        raise ValueError("up and down sets overlap")
    m = np.asarray(m, dtype=float)
    return float(np.mean(m[sorted(up)]) - np.mean(m[sorted(down)]))


def _values(series):
    return series.values if isinstance(series, ObservableSeries) else np.asarray(series, float)


def l1_metric(series_a, series_b):
    """Pointwise ``|a - b|`` on a shared time grid."""
    if isinstance(series_a, ObservableSeries) and isinstance(series_b, ObservableSeries):
        if not np.array_equal(series_a.t_phys_us, series_b.t_phys_us):
            raise ValueError("series are on different time grids")
    a, b = _values(series_a), _values(series_b)
    if a.shape != b.shape:
        raise ValueError("series lengths differ")
    return np.abs(a - b)


def fourier_components(series, times=None):
    """Discrete Fourier sum of the series normalized by its maximum.

    Component ``k`` is ``sum_m n~(t_m) exp(-2 pi i m k / n)``.
    """
    if times is None and isinstance(series, ObservableSeries):
        times = series.t_phys_us
    v = _values(series)
    if len(v) < 2:
        raise ValueError("need at least two points")
    if times is not None:
        steps = np.diff(np.asarray(times, dtype=float))
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("time grid is not uniform")
    peak = np.max(v)
    if peak == 0:
        raise ValueError("series maximum is zero")
    return np.fft.fft(v / peak)


def _distribution(p):
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("not a normalized probability distribution")
    return p


def trace_distance_classical(p, q):
    p, q = _distribution(p), _distribution(q)
    if p.shape != q.shape:
        raise ValueError("distributions have different support sizes")
    return 0.5 * float(np.sum(np.abs(p - q)))


def bhattacharyya(p, q):
    """``-ln sum sqrt(p q)``; ``inf`` for disjoint supports."""
    p, q = _distribution(p), _distribution(q)
    if p.shape != q.shape:
        raise ValueError("distributions have different support sizes")
    bc = float(np.sum(np.sqrt(p * q)))
    if bc <= 0:
        return math.inf
    return max(0.0, -math.log(min(bc, 1.0)))


def _check_density(rho, atol=1e-10):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2) or not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise ValueError("density matrix must be a Hermitian 2x2 array")
    if abs(np.trace(rho) - 1) > atol or np.linalg.eigvalsh(rho).min() < -atol:
        raise ValueError("density matrix must have unit trace and be positive")
    return rho


def trace_distance_quantum(rho1, rho2):
    """``1/2 * sum of singular values of (rho1 - rho2)``."""
    diff = _check_density(rho1) - _check_density(rho2)
    return 0.5 * float(np.sum(np.linalg.svd(diff, compute_uv=False)))


def distinguish_probability(d):
    """Optimal probability of telling two states apart, ``(1 + D) / 2``."""
    return 0.5 * (1.0 + d)


def zz_angle(j_khz, t_us):
    """Accrued ZZ angle ``tau = j * t`` in radians (kHz x µs x 1e-3)."""
    return np.asarray(j_khz, dtype=float) * np.asarray(t_us, dtype=float) * 1e-3


def analytic_bell_trace_distance(j01, j02, t_phys_us, bell_state):
    """Trace distance between the |+> and |-> target evolutions with a Bell environment.

    ``|cos 2(tau01 + tau02)|`` for phi states, ``|cos 2(tau01 - tau02)|`` for psi states.
    """
    if j01 < 0 or j02 < 0:
        raise ValueError("couplings must be non-negative")
    if bell_state not in BELL_STATES:
        raise ValueError(f"bell_state must be one of {BELL_STATES}")
    t01, t02 = zz_angle(j01, t_phys_us), zz_angle(j02, t_phys_us)
    arg = t01 + t02 if bell_state.startswith("phi") else t01 - t02
    return np.abs(np.cos(2.0 * arg))


def _env_weights(env):
    env = np.asarray(env, dtype=complex)
    if env.shape != (4,):
        raise ValueError("environment needs four amplitudes (alpha, beta, gamma, delta)")
    w = np.abs(env) ** 2
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("environment state is not normalized")
    return w


# environment basis |q1 q2> = |00>, |01>, |10>, |11> mapped to (z1, z2)
_Z1 = np.array([1, 1, -1, -1])
_Z2 = np.array([1, -1, 1, -1])


def general_B_coefficient(env_amplitudes, tau01, tau02):
    """``|B|`` for a |+> target and environment ``alpha|00> + beta|01> + gamma|10> + delta|11>``.

    ``B = 1/2 * sum_e |c_e|^2 exp(2 i (tau01 z1 + tau02 z2))``; the trace
    distance between the |+> and |-> evolutions is ``2 |B|``.
    """
    w = _env_weights(env_amplitudes)
    t01 = np.asarray(tau01, dtype=float)[..., None]
    t02 = np.asarray(tau02, dtype=float)[..., None]
    b = 0.5 * np.sum(w * np.exp(2j * (t01 * _Z1 + t02 * _Z2)), axis=-1)
    return np.abs(b)


def b_modulus_squared(env_amplitudes, tau01, tau02):
    """Expanded ``|B|^2`` in terms of the environment populations."""
    wa, wb, wc, wd = _env_weights(env_amplitudes)
    t01 = np.asarray(tau01, dtype=float)
    t02 = np.asarray(tau02, dtype=float)
    return 0.25 * (wa ** 2 + wb ** 2 + wc ** 2 + wd ** 2
                   + 2 * (wa * wb + wc * wd) * np.cos(4 * t02)
                   + 2 * (wa * wc + wb * wd) * np.cos(4 * t01)
                   + 2 * wa * wd * np.cos(4 * (t01 + t02))
                   + 2 * wb * wc * np.cos(4 * (t01 - t02)))


def bell_amplitudes(bell_state):
    s = 1 / math.sqrt(2)
    table = {"phi+": (s, 0, 0, s), "phi-": (s, 0, 0, -s),
             "psi+": (0, s, s, 0), "psi-": (0, s, -s, 0)}
    if bell_state not in table:
        raise ValueError(f"bell_state must be one of {BELL_STATES}")
    return np.array(table[bell_state], dtype=complex)
