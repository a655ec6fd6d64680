"""Named experiment recipes and their CSV output.

Every recipe takes an :class:`ExperimentConfig` and returns a list of
:class:`Row`. Rows are fully determined by the configuration and seed: each
time point draws from its own seed stream, so the thread count used to
sweep the grid does not change any value.
"""
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import compiler as cp
from . import device as dv
from . import metrics as mt
from . import model as md
from . import noise as nz
from . import statevector as sv

BACKENDS = ("theory", "digital", "da")
_BACKEND_ALIASES = {"exact-theory": "theory", "digital-analog": "da"}
CSV_COLUMNS = ("recipe", "backend", "t_phys_us", "t_mapped", "observable", "qubit",
               "value", "stderr", "seed")
DEFAULT_ISING_TIME = 2.5


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    recipe: str
    backend: str
    t_phys_us: float
    t_mapped: float
    observable: str
    qubit: object  # int or None
    value: float
    stderr: float
    seed: int


@dataclass
class ExperimentConfig:
    recipe: str
    device: object = None  # preset name, file path, document or DeviceModel
    backends: tuple = BACKENDS
    n_trotter: int = None
    tmax_us: float = None
    points: int = 25
    times_us: tuple = None  # explicit grid, overrides tmax_us/points
    shots: int = 8192
    seed: int = 0
    noise: dict = field(default_factory=dict)  # NoiseModel field overrides
    disorder: md.DisorderSpec = field(default_factory=md.DisorderSpec)
    pattern: str = None
    workers: int = 1
    continuum: bool = False

    def __post_init__(self):
        if self.recipe not in RECIPES:
            raise ConfigError(f"unknown recipe {self.recipe!r}; choose from {sorted(RECIPES)}")
        backends = []
        for b in self.backends:
            b = _BACKEND_ALIASES.get(b, b)
            if b not in BACKENDS:
                raise ConfigError(f"unknown backend {b!r}")
            if b not in backends:
                backends.append(b)
        self.backends = tuple(backends)
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.points < 1:
            raise ConfigError("points must be >= 1")
        if self.n_trotter is not None and self.n_trotter < 1:
            raise ConfigError("trotter steps must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.times_us is not None:
            t = np.asarray(self.times_us, dtype=float)
            if t.size == 0 or np.any(t < 0) or np.any(np.diff(t) <= 0):
                raise ConfigError("time grid must be non-negative and strictly increasing")
        known = {f.name for f in fields(nz.NoiseModel)}
        bad = set(self.noise) - known
        if bad:
            raise ConfigError(f"unknown noise settings {sorted(bad)}")

    def noise_model(self):
        try:
            return nz.NoiseModel(**self.noise)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self, default_tmax):
        if self.times_us is not None:
            return np.asarray(self.times_us, dtype=float)
        tmax = default_tmax if self.tmax_us is None else self.tmax_us
        if tmax < 0:
            raise ConfigError("tmax must be non-negative")
        return np.linspace(0.0, tmax, self.points)


def _device(cfg, default):
    return dv.load_device(cfg.device if cfg.device is not None else default)


def _sweep(cfg, fn, n_items):
    """Evaluate ``fn(i)`` for every item, optionally on worker threads, in order."""
    if cfg.workers == 1 or n_items < 2:
        return [fn(i) for i in range(n_items)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, range(n_items)))


# -- Trotter dynamics ----------------------------------------------------------

def _schedule(backend, model, device, t, n_tr, initial):
    if backend == "da":
        return cp.trotterize_da(model, device, t, n_tr, initial=initial)
    return cp.trotterize_digital(model, t, n_tr, device, initial=initial)


def _output(backend, model, device, t, n_tr, initial, cfg, stream):
    """Exact probabilities (theory) or a sampled RunResult."""
    if backend == "theory":
        sched = cp.trotterize_digital(model, t, n_tr, initial=initial)
        return nz.simulate(sched).probabilities
    sched = _schedule(backend, model, device, t, n_tr, initial)
    return nz.run_trajectories(sched, device, cfg.noise_model(), cfg.shots, cfg.seed, stream)


def _excitation(out, model, qubits):
    if isinstance(out, np.ndarray):
        return mt.excitation_from_probabilities(out, model.n_spins, qubits), 0.0
    return mt.mean_excitation(out.bits(), model.n_spins, qubits)


def _continuum(model, t, initial):
    state = sv.from_bitstring(initial) if initial else sv.new_basis_state(model.n_spins)
    u = sv.exact_propagator(model.hamiltonian_terms(), t, model.n_spins)
    return mt.excitation_from_probabilities(np.abs(u @ state.amplitudes) ** 2,
                                            model.n_spins, model.active)


def _dynamics(cfg, recipe, model, device, n_tr, default_tmax):
    grid = cfg.grid(default_tmax)
    initial = "0" * model.n_spins
    rows = []
    for b_idx, backend in enumerate(cfg.backends):
        def point(i, backend=backend, b_idx=b_idx):
            tp = float(grid[i])
            t = md.unmap_time(tp, model.time_map)
            out = _output(backend, model, device, t, n_tr, initial, cfg,
                          (BACKENDS.index(backend), i))
            v, se = _excitation(out, model, model.active)
            return [Row(recipe, backend, tp, t, "n_mean", None, v, se, cfg.seed)]
        for chunk in _sweep(cfg, point, len(grid)):
            rows += chunk
    if cfg.continuum:
        if model.n_spins > sv.MAX_DENSE_QUBITS:
            raise ConfigError("continuum solution limited to 10 spins")
        for tp in grid:
            t = md.unmap_time(float(tp), model.time_map)
            rows.append(Row(recipe, "exact", float(tp), t, "n_mean", None,
                            _continuum(model, t, initial), 0.0, cfg.seed))
    return rows


def two_spin_model(device, active=(0, 1)):
    for q in active:
        device.qubit(q)
    if device.coupling(*active) <= 0:
        raise ConfigError(f"device has no coupling between qubits {active}")
    base = md.build_tfim(device, "per-pair-2J", qubits=active)
    return md.spectator_closure(base, device, active)


def run_two_spin(cfg):
    device = _device(cfg, "qx14-like")
    model = two_spin_model(device)
    n_tr = cfg.n_trotter or 6
    tmax = md.map_time(DEFAULT_ISING_TIME, model.time_map)
    return _dynamics(cfg, "two_spin", model, device, n_tr, tmax)


def run_cluster(cfg):
    device = _device(cfg, "qx2-like")
    model = md.build_tfim(device, "uniform-2Jbar")
    n_tr = cfg.n_trotter or (6 if device.n_qubits <= 5 else 3)
    tmax = md.map_time(DEFAULT_ISING_TIME, model.time_map)
    return _dynamics(cfg, "cluster", model, device, n_tr, tmax)


# -- disorder ------------------------------------------------------------------

DEFAULT_PATTERN = "00000001111111"


def domain_sets(pattern):
    """(up, down) qubit sets of a bitstring pattern, qubit 0 rightmost."""
    n = len(pattern)
    up = [q for q in range(n) if pattern[n - 1 - q] == "1"]
    down = [q for q in range(n) if pattern[n - 1 - q] == "0"]
    return up, down


def _half_difference_runs(bits, up, down):
    """Per-run half-difference ``2 (mean_up s - mean_down s)``."""
    return 2.0 * (bits[:, up].mean(axis=1) - bits[:, down].mean(axis=1))


def run_disorder(cfg):
    device = _device(cfg, "qx14-like")
    pattern = cfg.pattern or DEFAULT_PATTERN[-device.n_qubits:].rjust(device.n_qubits, "0")
    if len(pattern) != device.n_qubits or set(pattern) - {"0", "1"}:
        raise ConfigError(f"pattern must be a {device.n_qubits}-bit string")
    up, down = domain_sets(pattern)
    if not up or not down:
        raise ConfigError("pattern needs both up and down spins")
    clean = md.build_tfim(device, "uniform-2Jbar")
    spec = cfg.disorder
    if spec.realizations < 1:
        raise ConfigError("disorder realizations must be >= 1")
    models = [("clean", clean, 0)]
    models += [("disordered", clean.with_disorder(md.disorder_realization(clean, spec, r)), r + 1)
               for r in range(spec.realizations)]
    n_tr = cfg.n_trotter or 6
    grid = cfg.grid(md.map_time(DEFAULT_ISING_TIME, clean.time_map))
    n = device.n_qubits
    rows = []
    for backend in cfg.backends:
        def point(i, backend=backend):
            tp = float(grid[i])
            t = md.unmap_time(tp, clean.time_map)
            acc = {"clean": [], "disordered": []}
            for label, model, r in models:
                out = _output(backend, model, device, t, n_tr, pattern, cfg,
                              (BACKENDS.index(backend), i, r))
                acc[label].append(out)
            out_rows = []
            for label, outs in acc.items():
                if backend == "theory":
                    m = np.mean([mt.magnetization_from_probabilities(p, n) for p in outs], axis=0)
                    hd, se = mt.half_difference(m, up, down), 0.0
                    m_se = np.zeros(n)
                else:
                    bits = np.concatenate([o.bits() for o in outs]).astype(float)
                    m = 2.0 * bits.mean(axis=0) - 1.0
                    m_se = 2.0 * bits.std(axis=0, ddof=1) / math.sqrt(len(bits))
                    h = _half_difference_runs(bits, up, down)
                    hd, se = float(h.mean()), float(h.std(ddof=1) / math.sqrt(len(h)))
                out_rows.append(Row("disorder", backend, tp, t, f"half_difference_{label}",
                                    None, hd, se, cfg.seed))
                for q in range(n):
                    out_rows.append(Row("disorder", backend, tp, t, f"m_{label}", q,
                                        float(m[q]), float(m_se[q]), cfg.seed))
            return out_rows
        for chunk in _sweep(cfg, point, len(grid)):
            rows += chunk
    return rows


# -- QFT -------------------------------------------------------------------------

QFT_QUBITS = (0, 1, 2)


def qft_schedule(backend, device, qubits, basis_index):
    bits = format(basis_index, f"0{len(qubits)}b")
    prep = cp.preparation(bits, device.t_single_gate)
    body = cp.qft_da(device, qubits) if backend == "da" else cp.qft_digital(
        len(qubits), device, qubits)
    return cp.Schedule(len(qubits), prep + body.moments, qubits, meta=dict(body.meta))


def run_qft(cfg):
    device = _device(cfg, "qx2-like")
    qubits = QFT_QUBITS
    dim = 1 << len(qubits)
    try:
        cp.qft_da(device, qubits)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    f = cp.dft_matrix(len(qubits))
    rows = []
    for backend in cfg.backends:
        def point(k, backend=backend):
            ideal = np.abs(f[:, k]) ** 2
            if backend == "theory":
                dist, dur = ideal, 0.0
            else:
                sched = qft_schedule(backend, device, qubits, k)
                res = nz.run_trajectories(sched, device, cfg.noise_model(), cfg.shots,
                                          cfg.seed, (BACKENDS.index(backend), k))
                dist = np.bincount(res.indices, minlength=dim) / res.n_runs
                dur = sched.total_phys_time * 1e-3
            tag = format(k, f"0{len(qubits)}b")
            out = [Row("qft", backend, dur, 0.0, f"p[in={tag}]", o, float(dist[o]), 0.0, cfg.seed)
                   for o in range(dim)]
            out.append(Row("qft", backend, dur, 0.0, f"trace_distance[in={tag}]", None,
                           mt.trace_distance_classical(ideal, dist), 0.0, cfg.seed))
            out.append(Row("qft", backend, dur, 0.0, f"bhattacharyya[in={tag}]", None,
                           mt.bhattacharyya(ideal, dist), 0.0, cfg.seed))
            return out
        per_input = _sweep(cfg, point, dim)
        for chunk in per_input:
            rows += chunk
        for name in ("trace_distance", "bhattacharyya"):
            vals = [r.value for chunk in per_input for r in chunk if r.observable.startswith(name)]
            rows.append(Row("qft", backend, 0.0, 0.0, f"{name}_mean", None,
                            float(np.mean(vals)), 0.0, cfg.seed))
    return rows


# -- non-Markovian dephasing -----------------------------------------------------

TARGET_STATES = {
    "+": np.array([1, 1]) / math.sqrt(2),
    "-": np.array([1, -1]) / math.sqrt(2),
    "0": np.array([1, 0]),
    "1": np.array([0, 1]),
}


def nonmarkov_initial(target, bell_state):
    """Target on qubit 0, Bell environment on qubits 1 and 2."""
    t = np.asarray(TARGET_STATES[target], dtype=complex)
    env = mt.bell_amplitudes(bell_state)
    amps = np.zeros(8, dtype=complex)
    for k in range(8):
        b0, b1, b2 = k & 1, (k >> 1) & 1, (k >> 2) & 1
        amps[k] = t[b0] * env[2 * b1 + b2]
    return amps


def nonmarkov_reduced(device, qubits, t_us, target, bell_state, noise=None, shots=1,
                      seed=0, stream=()):
    """Mean reduced state of the target after idling ``t_us``."""
    sched = cp.Schedule(3, [cp.idle(t_us * 1e3), cp.measure()], qubits)
    init = nonmarkov_initial(target, bell_state)
    if noise is None:
        return sv.partial_trace_single(nz.simulate(sched, device, init), 0)
    res = nz.run_trajectories(sched, device, noise, shots, seed, stream, initial=init,
                              reduced_qubits=(0,))
    return res.reduced[0]


def run_nonmarkov(cfg):
    device = _device(cfg, "qx4-like")
    qubits = (0, 1, 2)
    for q in qubits:
        device.qubit(q)
    j01, j02 = device.coupling(0, 1), device.coupling(0, 2)
    if j01 <= 0 or j02 <= 0:
        raise ConfigError("target qubit 0 must couple to qubits 1 and 2")
    if "digital" in cfg.backends:
        raise ConfigError("nonmarkov has no gate-based variant; use theory or da")
    grid = cfg.grid(20.0)
    cases = [(b, "+", "-") for b in mt.BELL_STATES] + [("phi+", "0", "1")]
    rows = []
    for backend in cfg.backends:
        noise = None if backend == "theory" else cfg.noise_model()

        def point(i, backend=backend, noise=noise):
            tp = float(grid[i])
            out = []
            for c, (bell, a, b) in enumerate(cases):
                rhos = [nonmarkov_reduced(device, qubits, tp, s, bell, noise, cfg.shots,
                                          cfg.seed, (BACKENDS.index(backend), i, c, k))
                        for k, s in enumerate((a, b))]
                d = mt.trace_distance_quantum(*rhos)
                name = f"D[{bell}]" if a == "+" else f"D_basis[{bell}]"
                out.append(Row("nonmarkov", backend, tp, tp, name, 0, d, 0.0, cfg.seed))
            for bell in mt.BELL_STATES:
                out.append(Row("nonmarkov", backend, tp, tp, f"D_analytic[{bell}]", 0,
                               float(mt.analytic_bell_trace_distance(j01, j02, tp, bell)),
                               0.0, cfg.seed))
            return out
        for chunk in _sweep(cfg, point, len(grid)):
            rows += chunk
    return rows


# -- optimal coupling --------------------------------------------------------------

def run_optimal_coupling(cfg, t_1q_ns=(50.0,), t_coh_us=(50.0, 75.0, 100.0)):
    device = _device(cfg, "qx2-like")
    j_dev = float(np.mean([j for _, _, j in device.couplings]))
    rows = []
    for t1q in t_1q_ns:
        for tc in t_coh_us:
            j_opt, err = dv.optimal_coupling(t1q, tc)
            budget = j_opt * 1e3 * tc * 1e-6
            for name, v in (("j_opt_khz", j_opt), ("min_error", err), ("step_budget", budget),
                            ("device_j_over_j_opt", j_dev / j_opt)):
                rows.append(Row("optimal_coupling", "theory", tc, t1q, name, None, float(v),
                                0.0, cfg.seed))
    return rows


RECIPES = {
    "two_spin": run_two_spin,
    "cluster": run_cluster,
    "disorder": run_disorder,
    "qft": run_qft,
    "nonmarkov": run_nonmarkov,
    "optimal_coupling": run_optimal_coupling,
}


def run_recipe(cfg):
    return RECIPES[cfg.recipe](cfg)


# -- CSV -----------------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def read_csv(source):
    """Parse CSV text or a file path back into rows."""
    text = source
    if "\n" not in source:
        with open(source, newline="") as fh:
            text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(Row(rec["recipe"], rec["backend"], float(rec["t_phys_us"]),
                        float(rec["t_mapped"]), rec["observable"],
                        int(rec["qubit"]) if rec["qubit"] else None,
                        float(rec["value"]), float(rec["stderr"]), int(rec["seed"])))
    return rows


def series(rows, backend, observable, qubit=None):
    """Collect one observable of one backend as an ObservableSeries."""
    sel = [r for r in rows if r.backend == backend and r.observable == observable
           and r.qubit == qubit]
    if not sel:
        raise KeyError(f"no rows for {backend}/{observable}")
    return mt.ObservableSeries([r.t_phys_us for r in sel], [r.t_mapped for r in sel],
                               [r.value for r in sel], [r.stderr for r in sel],
                               f"{backend}:{observable}")


def with_overrides(cfg, **kw):
    return replace(cfg, **kw)
