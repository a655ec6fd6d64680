"""Transverse-field Ising spin models, disorder, and the simulated/physical
time mapping.

Hamiltonian: ``H = -sum_j h_j X_j + sum_j eps_j Z_j - sum_<ij> J_ij Z_i Z_j``.
Device-derived models use ``J_ij = scale * j_phys_ij`` with one global
``scale``; by default the reference coupling (mean over the model's edges)
is 1, so ``J t`` is the Ising time.
"""
from dataclasses import dataclass, field, replace

import numpy as np

H_RULES = ("uniform-2Jbar", "per-pair-2J")


@dataclass(frozen=True)
class TimeMap:
    """``scale = J_ij / J_phys_ij`` in 1/kHz."""

    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("time-map scale must be positive")


@dataclass(frozen=True)
class DisorderSpec:
    amplitude_factor: float = 2.0
    realizations: int = 10
    seed: int = 0


@dataclass(frozen=True)
class SpinModel:
    qubits: tuple  # device qubit id of each spin
    h: np.ndarray
    j: dict  # {(i, k): J} over spin indices, i < k
    eps: np.ndarray = None
    time_map: TimeMap = None
    active: tuple = None  # spins that carry the observables
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.qubits)
        object.__setattr__(self, "h", np.asarray(self.h, dtype=float))
        eps = np.zeros(n) if self.eps is None else np.asarray(self.eps, dtype=float)
        object.__setattr__(self, "eps", eps)
        if self.active is None:
            object.__setattr__(self, "active", tuple(range(n)))
        if self.h.shape != (n,) or self.eps.shape != (n,):
            raise ValueError("h and eps need one entry per spin")
        for (a, b) in self.j:
            if not (0 <= a < b < n):
                raise ValueError(f"bad edge {(a, b)} for {n} spins")

    @property
    def n_spins(self):
        return len(self.qubits)

    @property
    def edges(self):
        return sorted(self.j)

    @property
    def has_disorder(self):
        return bool(np.any(self.eps != 0))

    def j_bar(self):
        return float(np.mean(list(self.j.values()))) if self.j else 0.0

    def hamiltonian_terms(self):
        terms = [(-self.h[q], {q: "X"}) for q in range(self.n_spins) if self.h[q] != 0]
        terms += [(self.eps[q], {q: "Z"}) for q in range(self.n_spins) if self.eps[q] != 0]
        terms += [(-self.j[e], {e[0]: "Z", e[1]: "Z"}) for e in self.edges]
        return terms

    def with_disorder(self, eps):
        return replace(self, eps=np.asarray(eps, dtype=float))

    def matches_device(self, device, rtol=1e-12):
        """True when every edge is a device edge with ``J = scale * j_phys``."""
        if self.time_map is None:
            return False
        want = {(min(a, b), max(a, b)) for a, b, _ in device.edges_among(self.qubits)}
        have = set()
        for (a, b), jv in self.j.items():
            qa, qb = self.qubits[a], self.qubits[b]
            jp = device.coupling(qa, qb)
            if jp == 0 or abs(jv - self.time_map.scale * jp) > rtol * abs(jv):
                return False
            have.add((min(qa, qb), max(qa, qb)))
        return have == want


def build_tfim(device, h_rule="uniform-2Jbar", disorder=None, qubits=None, j_ref=None):
    """Ising model on ``qubits`` (default: all) with couplings proportional to the device.

    ``h_rule`` is ``"uniform-2Jbar"`` (every h = 2 * mean J), ``"per-pair-2J"``
    (each spin gets twice the mean of its incident couplings) or an explicit
    array. ``disorder`` is an eps array or ``None``.
    """
    qubits = tuple(device.qubit_ids if qubits is None else qubits)
    for q in qubits:
        device.qubit(q)
    index = {q: i for i, q in enumerate(qubits)}
    edges = device.edges_among(qubits)
    if j_ref is None:
        if not edges:
            raise ValueError("selected qubits share no couplings")
        j_ref = float(np.mean([jp for _, _, jp in edges]))
    tm = TimeMap(1.0 / j_ref)
    j = {}
    for a, b, jp in edges:
        ia, ib = sorted((index[a], index[b]))
        j[(ia, ib)] = tm.scale * jp

    n = len(qubits)
    if isinstance(h_rule, str):
        if h_rule == "uniform-2Jbar":
            if not j:
                raise ValueError("uniform-2Jbar needs at least one edge")
            h = np.full(n, 2.0 * np.mean(list(j.values())))
        elif h_rule == "per-pair-2J":
            h = np.zeros(n)
            for q in range(n):
                inc = [v for e, v in j.items() if q in e]
                if not inc:
                    raise ValueError(f"per-pair-2J: spin {q} (qubit {qubits[q]}) has no edges")
                h[q] = 2.0 * np.mean(inc)
        else:
            raise ValueError(f"unknown h rule {h_rule!r}; expected one of {H_RULES}")
    else:
        h = np.asarray(h_rule, dtype=float)
        if h.shape != (n,):
            raise ValueError(f"explicit h needs {n} entries")
    return SpinModel(qubits=qubits, h=h, j=j, eps=disorder, time_map=tm)


def sample_disorder(j_bar, n_spins, rng, amplitude_factor=2.0):
    """i.i.d. uniform z-fields on ``[-a * j_bar, a * j_bar]``."""
    if not j_bar > 0:
        raise ValueError("j_bar must be positive")
    w = amplitude_factor * j_bar
    return rng.uniform(-w, w, n_spins)


def disorder_realization(model, spec, realization):
    """Disorder field for realization ``r`` of ``spec`` (own seed stream)."""
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(realization,)))
    return sample_disorder(model.j_bar(), model.n_spins, rng, spec.amplitude_factor)


def spectator_closure(model, device, active):
    """Extend ``model`` with every device neighbour of the ``active`` qubits.

    Spectators get h = 0 and eps = 0 but keep their couplings to the cluster;
    the result marks the ``active`` qubits as the observable spins.
    """
    active = list(active)
    if not active:
        raise ValueError("active set is empty")
    if model.time_map is None:
        raise ValueError("spectator closure needs a device-derived model")
    closure = set(active)
    for q in active:
        device.qubit(q)
        closure |= device.neighbors(q)
    closure |= set(model.qubits)
    qubits = tuple(sorted(closure))
    index = {q: i for i, q in enumerate(qubits)}
    old = {q: i for i, q in enumerate(model.qubits)}
    h = np.zeros(len(qubits))
    eps = np.zeros(len(qubits))
    for q, i in old.items():
        h[index[q]] = model.h[i]
        eps[index[q]] = model.eps[i]
    j = {}
    for a, b, jp in device.edges_among(qubits):
        ia, ib = sorted((index[a], index[b]))
        j[(ia, ib)] = model.time_map.scale * jp
    return SpinModel(qubits=qubits, h=h, j=j, eps=eps, time_map=model.time_map,
                     active=tuple(index[q] for q in active))


def map_time(t, tm):
    """Simulated time to physical time in µs (``J t = J_phys t_phys``)."""
    if t < 0:
        raise ValueError("time must be non-negative")
    return t * tm.scale * 1e3


def unmap_time(t_phys_us, tm):
    if t_phys_us < 0:
        raise ValueError("time must be non-negative")
    return t_phys_us / (tm.scale * 1e3)
