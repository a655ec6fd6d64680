"""Monte-Carlo wave-function execution of schedules on a device.

Trajectories are propagated in batches (rows of one complex array) so the
kernels stream over many states at once. Within a moment of duration ``d``
the no-jump evolution is diagonal: every basis state ``k`` picks up
``exp(i w_k t - G_k t / 2)`` where ``w_k`` is the ZZ crosstalk phase rate and
``G_k`` the summed decay rate of its excited qubits. Amplitude-damping jumps
use the waiting-time method: a row jumps when its no-jump norm falls below a
uniform threshold. Dephasing, depolarizing errors after CNOTs and readout
flips are applied as Pauli kicks.

Durations are in ns, coherence times in µs, couplings in kHz; a coupling
``j`` held for ``d`` ns gives the ZZ angle ``theta = -j * d * 1e-6``.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from . import statevector as sv

CHUNK_AMPLITUDES = 1 << 20
_PAULIS = (sv.I2, sv.X, sv.Y, sv.Z)


@dataclass(frozen=True)
class NoiseModel:
    """Noise switches; ``None`` fields take the device's value."""

    enable_t1: bool = True
    enable_t2: bool = True
    cnot_depol: float = None
    crosstalk_during_gates: bool = True
    readout_flip: float = None
    dt_noise: float = 100.0  # ns, resolution of jump times
    scale: float = 1.0  # multiplies every stochastic rate and probability
    crosstalk_scale: float = 1.0

    def __post_init__(self):
        for name in ("cnot_depol", "readout_flip"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= 1:
                raise ValueError(f"{name} must be a probability, got {v}")
        if not self.dt_noise > 0:
            raise ValueError("dt_noise must be positive")
        if self.scale < 0 or self.crosstalk_scale < 0:
            raise ValueError("scale factors must be non-negative")

    @classmethod
    def off(cls):
        """No stochastic noise and no crosstalk during gates: the ideal schedule action."""
        return cls(enable_t1=False, enable_t2=False, cnot_depol=0.0,
                   crosstalk_during_gates=False, readout_flip=0.0)

    def resolved(self, device):
        """Copy with device defaults filled in and ``scale`` applied."""
        depol = device.cnot_error if self.cnot_depol is None else self.cnot_depol
        flip = device.readout_error if self.readout_flip is None else self.readout_flip
        return replace(self, cnot_depol=min(1.0, depol * self.scale),
                       readout_flip=min(1.0, flip * self.scale))

    def is_stochastic(self, device=None):
        nm = self.resolved(device) if device is not None else self
        return bool(self.scale > 0 and (nm.enable_t1 or nm.enable_t2 or nm.cnot_depol
                                        or nm.readout_flip))


@dataclass
class RunResult:
    n_qubits: int
    indices: np.ndarray  # sampled basis index per run
    master_seed: int
    stream: tuple = ()
    probabilities: np.ndarray = None  # exact output distribution when noiseless
    reduced: dict = field(default_factory=dict)  # qubit -> mean 2x2 density matrix
    states: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def n_runs(self):
        return len(self.indices)

    @property
    def bitstrings(self):
        return sv.format_bitstrings(self.indices, self.n_qubits)

    def bits(self):
        """``(n_runs, n_qubits)`` array of 0/1 outcomes, column ``j`` is qubit ``j``."""
        return ((self.indices[:, None] >> np.arange(self.n_qubits)) & 1).astype(np.int8)

    def counts(self):
        keys, cnt = np.unique(self.indices, return_counts=True)
        return {format(int(k), f"0{self.n_qubits}b"): int(c) for k, c in zip(keys, cnt)}


def crosstalk_phase_for(device, qubits, d, scale=1.0):
    """ZZ terms ``(i, j, theta)`` accrued over ``d`` ns on every device edge among ``qubits``.

    Indices refer to positions in ``qubits``.
    """
    if d < 0:
        raise ValueError("duration must be non-negative")
    index = {q: i for i, q in enumerate(qubits)}
    return [(index[a], index[b], -j * d * 1e-6 * scale)
            for a, b, j in device.edges_among(qubits)]


def dephasing_time(t1, t2):
    """Pure-dephasing time ``T_phi`` from ``1/T_phi = 1/T2 - 1/(2 T1)`` (inf when none)."""
    if t1 <= 0 or t2 <= 0 or t2 > 2 * t1 * (1 + 1e-12):
        raise ValueError(f"unphysical coherence times T1={t1}, T2={t2}")
    rate = 1.0 / t2 - 0.5 / t1
    return np.inf if rate <= 0 else 1.0 / rate


def apply_decoherence_interval(state, qubit, d, t1, t2, rng):
    """One stochastic amplitude-damping + dephasing step of ``d`` µs on one qubit.

    Jump with probability ``p1 (1 - e^{-d/T1})``, otherwise apply the
    normalized no-jump operator ``diag(1, e^{-d/2T1})``; then a Z with
    probability ``(1 - e^{-d/T_phi}) / 2``. Averaging over ``rng`` gives the
    exact channel for any ``d``.
    """
    if d < 0:
        raise ValueError("duration must be non-negative")
    t_phi = dephasing_time(t1, t2)
    out = state.copy()
    if d == 0:
        return out
    n = state.n_qubits
    s = 1 << qubit
    v = out.amplitudes.reshape(1 << (n - 1 - qubit), 2, s)
    p1 = float(np.sum(np.abs(v[:, 1, :]) ** 2))
    decay = -np.expm1(-d / t1)
    if rng.random() < p1 * decay:
        v[:, 0, :] = v[:, 1, :]
        v[:, 1, :] = 0
    else:
        v[:, 1, :] *= np.exp(-0.5 * d / t1)
    out.amplitudes /= np.linalg.norm(out.amplitudes)
    if rng.random() < -0.5 * np.expm1(-d / t_phi):
        v[:, 1, :] *= -1
    return out


class _Engine:
    """Propagates a batch of states through one schedule."""

    def __init__(self, schedule, device, noise):
        self.n = n = schedule.n_qubits
        self.schedule = schedule
        self.noise = noise
        phys = schedule.device_qubits
        if device is not None:
            for q in phys:
                try:
                    device.qubit(q)
                except KeyError as exc:
                    raise ValueError(f"schedule qubit {q} is not on device {device.name!r}") from exc
            terms = [(i, j, -th) for i, j, th in
                     crosstalk_phase_for(device, phys, 1.0, noise.crosstalk_scale)]
            self.omega = sv.zz_diagonal(n, terms)  # rad/ns, phase factor exp(+i w d)
            self.has_edges = bool(terms)
        else:
            self.omega = np.zeros(1 << n)
            self.has_edges = False
        self.device = device
        self.loc = list(range(n))  # logical qubit -> position in the state vector

        s = noise.scale
        self.t1_on = device is not None and noise.enable_t1 and s > 0
        self.t2_on = device is not None and noise.enable_t2 and s > 0
        if self.t1_on or self.t2_on:
            specs = [device.qubit(q) for q in phys]
            self.gamma_q = np.array([s / (q.t1 * 1e3) for q in specs])  # 1/ns
            self.dephase_q = np.array([s / (dephasing_time(q.t1, q.t2) * 1e3) for q in specs])
        self.depol = noise.cnot_depol if device is not None else 0.0
        self.readout = noise.readout_flip if device is not None else 0.0
        self._groups = {}
        self._zsign = {}

    # -- helpers ---------------------------------------------------------------

    def _group_table(self, crosstalk):
        if crosstalk not in self._groups:
            k = np.arange(1 << self.n)
            g = np.zeros(1 << self.n)
            for i, rate in enumerate(self.gamma_q):
                g += rate * ((k >> i) & 1)
            w = self.omega if crosstalk else np.zeros_like(g)
            keys, inv = np.unique(np.stack([w, g], axis=1), axis=0, return_inverse=True)
            self._groups[crosstalk] = (inv.reshape(-1).astype(np.int32), keys[:, 0], keys[:, 1])
        return self._groups[crosstalk]

    def _zsigns(self, pos):
        if pos not in self._zsign:
            self._zsign[pos] = sv.z_signs(self.n, pos).astype(float)
        return self._zsign[pos]

    # -- moments -----------------------------------------------------------------

    def run(self, states, rng):
        self.states = states
        self.rng = rng
        self.pending = {}
        self.wait = [0.0, False]  # deferred interval: duration, crosstalk flag
        self.loc = list(range(self.n))
        if self.t1_on:
            self.r = rng.random(len(states))
        xt_gates = self.noise.crosstalk_during_gates
        for m in self.schedule.moments:
            if m.kind == "gate":
                self._settle()
                q = self.loc[m.qubits[0]]
                u = m.u
                self.pending[q] = u @ self.pending[q] if q in self.pending else u
                if m.duration > 0:
                    self._flush()
                    self._defer(m.duration, xt_gates)
            elif m.kind == "cnot":
                self._settle()
                self._flush()
                c, t = self.loc[m.qubits[0]], self.loc[m.qubits[1]]
                kernels.apply_cnot(self.states, c, t)
                if self.depol > 0:
                    self._depolarize(c, t)
                self._defer(m.duration, xt_gates)
            elif m.kind == "idle":
                self._flush()
                self._defer(m.duration, True)
            elif m.kind == "permute":
                self._flush()
                self.loc = [self.loc[p] for p in m.qubits]
        self._flush()
        self._settle()
        return self.states

    def _flush(self):
        if not self.pending:
            return
        qs, us = [], []
        for q, u in self.pending.items():
            if not np.array_equal(u, sv.I2):
                qs.append(q)
                us.append(u)
        self.pending = {}
        kernels.apply_layer(self.states, qs, us)

    def _defer(self, d, crosstalk):
        """Queue an interval; consecutive intervals with no gate between them merge."""
        if d <= 0:
            return
        crosstalk = crosstalk and self.has_edges
        if self.wait[0] > 0 and self.wait[1] != crosstalk:
            self._settle()
        self.wait[0] += d
        self.wait[1] = crosstalk

    def _settle(self):
        d, crosstalk = self.wait
        if d <= 0:
            return
        self.wait = [0.0, False]
        if self.t1_on:
            self._damp(d, crosstalk)
        elif crosstalk:
            self.states *= np.exp(1j * d * self.omega)
        if self.t2_on:
            self._dephase(d)

    def _damp(self, d, crosstalk):
        idx, wg, gg = self._group_table(crosstalk)
        st = self.states
        rows = np.arange(len(st))
        left = np.full(len(st), float(d))
        rate = 1j * wg - 0.5 * gg
        while rows.size:
            probs = kernels.group_probs(st, rows, idx, len(gg))
            norm = np.sum(probs * np.exp(-np.outer(left[rows], gg)), axis=1)
            r = self.r[rows]
            ok = norm >= r
            if ok.any():
                keep = rows[ok]
                table = np.exp(np.outer(left[keep], rate)) / np.sqrt(norm[ok])[:, None]
                kernels.scale_gather(st, keep, idx, table)
                self.r[keep] = r[ok] / norm[ok]
            jump = rows[~ok]
            if not jump.size:
                break
            pj, rj = probs[~ok], r[~ok]
            lo = np.zeros(len(jump))
            hi = left[jump].copy()
            while np.max(hi - lo) > self.noise.dt_noise:
                mid = 0.5 * (lo + hi)
                below = np.sum(pj * np.exp(-np.outer(mid, gg)), axis=1) < rj
                hi = np.where(below, mid, hi)
                lo = np.where(below, lo, mid)
            nm = np.sum(pj * np.exp(-np.outer(hi, gg)), axis=1)
            table = np.exp(np.outer(hi, rate)) / np.sqrt(nm)[:, None]
            kernels.scale_gather(st, jump, idx, table)
            # jump weights sum_k |a_k|^2 G_k of the now-normalized rows
            totals = (pj * np.exp(-np.outer(hi, gg)) / nm[:, None]) @ gg
            for row, total in zip(jump, totals):
                u1, u2 = self.rng.random(2)
                kernels.jump_row(st, row, idx, gg, self.gamma_q, u1, u2, total)
            self.r[jump] = self.rng.random(len(jump))
            left[jump] -= hi
            rows = jump[left[jump] > 0]

    def _dephase(self, d):
        p = -0.5 * np.expm1(-d * self.dephase_q)
        flips = self.rng.random((len(self.states), self.n)) < p
        for i in range(self.n):
            rows = np.flatnonzero(flips[:, i])
            if rows.size:
                self.states[rows] *= self._zsigns(i)

    def _depolarize(self, c, t):
        b = len(self.states)
        hit = np.flatnonzero(self.rng.random(b) < self.depol)
        if not hit.size:
            return
        which = self.rng.integers(1, 16, size=hit.size)
        for row, k in zip(hit, which):
            pc, pt = divmod(int(k), 4)
            view = self.states[row:row + 1]
            if pc:
                kernels.apply_1q(view, c, _PAULIS[pc])
            if pt:
                kernels.apply_1q(view, t, _PAULIS[pt])

    # -- output ------------------------------------------------------------------

    def logical_index_map(self):
        """``phys[k]`` = position index holding logical basis state ``k``."""
        k = np.arange(1 << self.n)
        phys = np.zeros_like(k)
        for i, pos in enumerate(self.loc):
            phys |= ((k >> i) & 1) << pos
        return phys

    def to_logical_indices(self, idx):
        out = np.zeros_like(idx)
        for i, pos in enumerate(self.loc):
            out |= ((idx >> pos) & 1) << i
        return out


def _initial_rows(n, b, initial):
    states = np.zeros((b, 1 << n), dtype=np.complex128)
    if initial is None:
        states[:, 0] = 1.0
    else:
        amps = np.asarray(getattr(initial, "amplitudes", initial), dtype=np.complex128)
        if amps.shape != (1 << n,):
            raise ValueError(f"initial state needs {1 << n} amplitudes")
        states[:] = amps
    return states


def simulate(schedule, device=None, initial=None, noise=None):
    """Coherent execution of ``schedule``; returns the final logical state.

    Only the coherent parts of ``noise`` are used (crosstalk during gates and
    its scale); the default is the ideal action with crosstalk during idles.
    """
    coherent = NoiseModel.off() if noise is None else replace(
        noise, enable_t1=False, enable_t2=False, cnot_depol=0.0, readout_flip=0.0)
    eng = _Engine(schedule, device, coherent)
    st = eng.run(_initial_rows(schedule.n_qubits, 1, initial), None)
    return sv.StateVector(schedule.n_qubits, st[0, eng.logical_index_map()])


def schedule_unitary(schedule, device=None, noise=None):
    """Dense action of a schedule (columns are images of basis states)."""
    n = schedule.n_qubits
    if n > sv.MAX_DENSE_QUBITS:
        raise ValueError(f"dense unitaries limited to {sv.MAX_DENSE_QUBITS} qubits")
    coherent = NoiseModel.off() if noise is None else replace(
        noise, enable_t1=False, enable_t2=False, cnot_depol=0.0, readout_flip=0.0)
    eng = _Engine(schedule, device, coherent)
    rows = np.eye(1 << n, dtype=np.complex128)
    # row r starts as logical basis state r, which sits at physical index r
    st = eng.run(rows, None)
    return st[:, eng.logical_index_map()].T


def seed_rng(master_seed, *key):
    """Independent generator for a (master seed, key) stream."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


def chunk_size(n_qubits, n_runs, chunk_amplitudes=CHUNK_AMPLITUDES):
    return max(1, min(n_runs, chunk_amplitudes >> n_qubits))


def run_trajectories(schedule, device, noise=None, n_runs=1024, master_seed=0, stream=(),
                     initial=None, reduced_qubits=(), keep_states=False,
                     chunk_amplitudes=CHUNK_AMPLITUDES):
    """Sample ``n_runs`` noisy executions of ``schedule``.

    Runs are processed in fixed-size chunks; chunk ``c`` draws from the
    generator keyed by ``(master_seed, *stream, c)``, so results do not depend
    on how work is scheduled. Without stochastic noise a single coherent state
    is computed and sampled with the chunk-0 generator.
    """
    from .compiler import validate_schedule

    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    validate_schedule(schedule)
    noise = (noise or NoiseModel()).resolved(device)
    n = schedule.n_qubits
    stream = tuple(stream)

    if not noise.is_stochastic():
        state = simulate(schedule, device, initial, noise)
        probs = state.probabilities
        idx = sv.sample_indices(probs, n_runs, seed_rng(master_seed, *stream, 0))
        reduced = {q: sv.partial_trace_single(state, q) for q in reduced_qubits}
        states = np.tile(state.amplitudes, (n_runs, 1)) if keep_states else None
        return RunResult(n, idx.astype(np.int64), master_seed, stream, probs, reduced, states,
                         dict(schedule.meta))

    b = chunk_size(n, n_runs, chunk_amplitudes)
    idx_all = []
    rho_sum = {q: np.zeros((2, 2), dtype=complex) for q in reduced_qubits}
    kept = []
    eng = _Engine(schedule, device, noise)
    for c, start in enumerate(range(0, n_runs, b)):
        rows = min(b, n_runs - start)
        rng = seed_rng(master_seed, *stream, c)
        st = eng.run(_initial_rows(n, rows, initial), rng)
        p = st.real ** 2 + st.imag ** 2
        cdf = np.cumsum(p, axis=1)
        u = rng.random(rows) * cdf[:, -1]
        idx = np.minimum(np.sum(cdf <= u[:, None], axis=1), (1 << n) - 1)
        if noise.readout_flip > 0:
            flips = rng.random((rows, n)) < noise.readout_flip
            idx = idx ^ (flips.astype(np.int64) << np.arange(n)).sum(axis=1)
        idx_all.append(eng.to_logical_indices(idx.astype(np.int64)))
        for q in reduced_qubits:
            rho_sum[q] += rows * sv.reduced_density_batch(st, eng.loc[q])
        if keep_states:
            kept.append(st[:, eng.logical_index_map()])
    reduced = {q: rho / n_runs for q, rho in rho_sum.items()}
    states = np.concatenate(kept) if keep_states else None
    return RunResult(n, np.concatenate(idx_all), master_seed, stream, None, reduced, states,
                     dict(schedule.meta))
