"""Lowering of Trotterized Ising evolution and the 3-qubit QFT onto two
backends.

* digital: single-qubit rotations plus CNOT-conjugated Rz for every ZZ term;
* digital-analog (DA): single-qubit rotations plus timed idles during which
  the device's always-on ZZ couplings do the entangling.

Moments run one after another and ``total_phys_time`` is the sum of their
durations. Gates that run concurrently with the next gate of the same layer
carry zero duration; the last gate of a layer carries the layer time. Rz is a
virtual (frame) gate with zero duration.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import statevector as sv
from .model import map_time

GATE_NAMES = ("RX", "RY", "RZ", "H", "X", "Y", "Z")
_PARAMETRIC = {"RX", "RY", "RZ"}


def gate_matrix(name, theta=0.0):
    if name == "RX":
        return sv.rx(theta)
    if name == "RY":
        return sv.ry(theta)
    if name == "RZ":
        return sv.rz(theta)
    if name in ("H", "X", "Y", "Z"):
        return getattr(sv, name)
    raise ValueError(f"unknown gate {name!r}")


@dataclass(frozen=True)
class Moment:
    kind: str  # "gate" | "cnot" | "idle" | "measure" | "permute"
    qubits: tuple = ()
    name: str = ""
    theta: float = 0.0
    duration: float = 0.0  # ns

    @property
    def u(self):
        return gate_matrix(self.name, self.theta)


def gate(q, name, theta=0.0, duration=0.0):
    return Moment("gate", (q,), name, float(theta), float(duration))


def cnot(control, target, duration=0.0):
    return Moment("cnot", (control, target), duration=float(duration))


def idle(duration):
    return Moment("idle", duration=float(duration))


def measure():
    return Moment("measure")


def permute(perm):
    """After this moment qubit ``i`` holds what qubit ``perm[i]`` held (a relabeling)."""
    return Moment("permute", tuple(perm))


@dataclass
class Schedule:
    n_qubits: int
    moments: list
    device_qubits: tuple = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.device_qubits is None:
            self.device_qubits = tuple(range(self.n_qubits))
        self.device_qubits = tuple(self.device_qubits)

    @property
    def total_phys_time(self):
        return math.fsum(m.duration for m in self.moments)

    def count(self, kind):
        return sum(1 for m in self.moments if m.kind == kind)

    def extend(self, other, mapping=None):
        """Append ``other``'s moments, relabeling its qubits through ``mapping``."""
        for m in other.moments:
            if mapping is not None and m.qubits:
                if m.kind == "permute":
                    raise ValueError("cannot remap a permute moment")
                m = Moment(m.kind, tuple(mapping[q] for q in m.qubits), m.name, m.theta, m.duration)
            self.moments.append(m)
        return self


def validate_schedule(schedule):
    """Raise ``ValueError`` on structural problems."""
    n = schedule.n_qubits
    if len(schedule.device_qubits) != n:
        raise ValueError("device_qubits must list one device id per qubit")
    for pos, m in enumerate(schedule.moments):
        if m.duration < 0 or not math.isfinite(m.duration):
            raise ValueError(f"moment {pos}: bad duration {m.duration}")
        if m.kind == "gate":
            if m.name not in GATE_NAMES:
                raise ValueError(f"moment {pos}: unknown gate {m.name}")
        elif m.kind == "cnot":
            if m.qubits[0] == m.qubits[1]:
                raise ValueError(f"moment {pos}: CNOT control equals target")
        elif m.kind == "permute":
            if sorted(m.qubits) != list(range(n)):
                raise ValueError(f"moment {pos}: not a permutation of {n} qubits")
            continue
        elif m.kind == "measure":
            if pos != len(schedule.moments) - 1:
                raise ValueError("MEASURE must be the last moment")
        elif m.kind != "idle":
            raise ValueError(f"moment {pos}: unknown kind {m.kind}")
        for q in m.qubits:
            if not 0 <= q < n:
                raise ValueError(f"moment {pos}: qubit {q} out of range")
    return True


# -- text format -------------------------------------------------------------

def to_text(schedule):
    lines = ["QUBITS " + " ".join(str(q) for q in schedule.device_qubits)]
    for m in schedule.moments:
        if m.kind == "gate":
            if m.name in _PARAMETRIC:
                lines.append(f"{m.name} {m.qubits[0]} {m.theta!r} {m.duration!r}")
            else:
                lines.append(f"{m.name} {m.qubits[0]} {m.duration!r}")
        elif m.kind == "cnot":
            lines.append(f"CNOT {m.qubits[0]} {m.qubits[1]} {m.duration!r}")
        elif m.kind == "idle":
            lines.append(f"IDLE {m.duration!r}")
        elif m.kind == "permute":
            lines.append("PERMUTE " + " ".join(str(q) for q in m.qubits))
        else:
            lines.append("MEASURE")
    return "\n".join(lines) + "\n"


def from_text(text):
    moments = []
    qubits = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        op, args = parts[0], parts[1:]
        try:
            if op == "QUBITS":
                qubits = tuple(int(a) for a in args)
            elif op in _PARAMETRIC:
                moments.append(gate(int(args[0]), op, float(args[1]), float(args[2])))
            elif op in GATE_NAMES:
                moments.append(gate(int(args[0]), op, 0.0, float(args[1])))
            elif op == "CNOT":
                moments.append(cnot(int(args[0]), int(args[1]), float(args[2])))
            elif op == "IDLE":
                moments.append(idle(float(args[0])))
            elif op == "PERMUTE":
                moments.append(permute(int(a) for a in args))
            elif op == "MEASURE":
                moments.append(measure())
            else:
                raise ValueError(f"unknown op {op}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {raw!r}: {exc}") from exc
    if qubits is None:
        raise ValueError("missing QUBITS header")
    sched = Schedule(len(qubits), moments, qubits)
    validate_schedule(sched)
    return sched


# -- Trotter backends ---------------------------------------------------------

def _layer(gates, duration):
    """Single-qubit gates run concurrently; the last one carries the layer time."""
    out = [gate(q, name, theta) for q, name, theta in gates]
    if out and duration:
        last = out[-1]
        out[-1] = gate(last.qubits[0], last.name, last.theta, duration)
    return out


def preparation(bits, t_single=0.0):
    """X gates producing a basis state given as a bitstring (qubit 0 rightmost)."""
    n = len(bits)
    flips = [(q, "X", 0.0) for q in range(n) if bits[n - 1 - q] == "1"]
    return _layer(flips, t_single)


def _field_layer(model, dt, t_single, frac=1.0):
    gates = [(q, "RX", -2.0 * model.h[q] * dt * frac) for q in range(model.n_spins)]
    if model.has_disorder:
        gates += [(q, "RZ", 2.0 * model.eps[q] * dt * frac) for q in range(model.n_spins)]
    return _layer(gates, t_single)


def edge_layers(edges):
    """Greedy packing of sorted edges into layers of disjoint pairs."""
    layers = []
    for e in sorted(edges):
        for layer in layers:
            if not any(set(e) & set(f) for f in layer):
                layer.append(e)
                break
        else:
            layers.append([e])
    return layers


def _zz_block(model, dt, t_cnot):
    """``exp(i J dt Z Z)`` per edge; CNOTs on disjoint pairs run concurrently."""
    out = []
    for layer in edge_layers(model.edges):
        for rep in range(2):
            for n, (a, b) in enumerate(layer):
                out.append(cnot(a, b, t_cnot if n == len(layer) - 1 else 0.0))
            if rep == 0:
                out += [gate(b, "RZ", -2.0 * model.j[(a, b)] * dt) for a, b in layer]
    return out


def trotterize_digital(model, t, n_tr, device=None, initial=None, order=1):
    """Gate-based Trotter circuit for ``exp(-i H t)``.

    Each step applies the field layer and then ``exp(i J dt Z Z)`` for every
    edge as ``CNOT . Rz(-2 J dt) . CNOT``; edges are taken in sorted order and
    packed into layers of disjoint pairs that share the CNOT time. ``order=2`` gives the
    symmetric splitting. Durations come from ``device`` when given.
    """
    if n_tr < 1:
        raise ValueError("n_tr must be >= 1")
    t_single = device.t_single_gate if device is not None else 0.0
    t_cnot = device.t_cnot if device is not None else 0.0
    dt = t / n_tr
    moments = preparation(initial, t_single) if initial else []
    for _ in range(n_tr):
        if order == 1:
            moments += _field_layer(model, dt, t_single)
            moments += _zz_block(model, dt, t_cnot)
        elif order == 2:
            moments += _field_layer(model, dt, t_single, 0.5)
            moments += _zz_block(model, dt, t_cnot)
            moments += _field_layer(model, dt, t_single, 0.5)
        else:
            raise ValueError("order must be 1 or 2")
    moments.append(measure())
    return Schedule(model.n_spins, moments, model.qubits,
                    meta={"backend": "digital", "t": t, "n_tr": n_tr})


def trotterize_da(model, device, t, n_tr, initial=None, order=1):
    """Digital-analog Trotter schedule: field layer, then one idle per step.

    The idle lasts ``t_phys / n_tr``; during it every device coupling among the
    model's qubits accrues its ZZ phase at once.
    """
    if n_tr < 1:
        raise ValueError("n_tr must be >= 1")
    if not model.matches_device(device):
        raise ValueError("digital-analog compilation needs a device-derived model "
                         "whose coupling ratios match the device")
    t_single = device.t_single_gate
    dt = t / n_tr
    step_ns = map_time(t, model.time_map) * 1e3 / n_tr
    moments = preparation(initial, t_single) if initial else []
    for _ in range(n_tr):
        if order == 1:
            moments += _field_layer(model, dt, t_single)
            moments.append(idle(step_ns))
        elif order == 2:
            moments += _field_layer(model, dt, t_single, 0.5)
            moments.append(idle(step_ns))
            moments += _field_layer(model, dt, t_single, 0.5)
        else:
            raise ValueError("order must be 1 or 2")
    moments.append(measure())
    return Schedule(model.n_spins, moments, model.qubits,
                    meta={"backend": "da", "t": t, "n_tr": n_tr})


# -- echo and QFT ---------------------------------------------------------------

def echo_zz_isolation(device, pair, spectator, theta, qubits=None, max_idle_ns=None):
    """Idle/X echo realizing ``exp(-i theta Z_i Z_j)`` on a device pair.

    Sequence: ``Idle(tau/2), X_k, Idle(tau/2), X_k`` on spectator ``k``; the
    spectator's couplings to the pair cancel and the pair accrues
    ``-J_ij tau``. Positive ``theta`` is reached by conjugating with ``X_i``.
    ``pair``/``spectator`` are device ids; the fragment's qubits are
    ``qubits`` (default ``(i, j, k)``).
    """
    i, j = pair
    k = spectator
    qubits = tuple(qubits) if qubits is not None else (i, j, k)
    index = {q: n for n, q in enumerate(qubits)}
    frag = Schedule(len(qubits), [], qubits, meta={"theta": theta})
    if theta == 0:
        return frag
    j_ij = device.coupling(i, j)
    if j_ij <= 0:
        raise ValueError(f"qubits {i} and {j} are not coupled")
    tau = abs(theta) / (j_ij * 1e-6)
    if max_idle_ns is not None and tau > max_idle_ns:
        warnings.warn(f"echo idle of {tau:.0f} ns exceeds the {max_idle_ns:.0f} ns guard",
                      RuntimeWarning, stacklevel=2)
    t1 = device.t_single_gate
    flip = theta > 0
    if flip:
        frag.moments.append(gate(index[i], "X", 0.0, t1))
    frag.moments += [idle(tau / 2), gate(index[k], "X", 0.0, t1),
                     idle(tau / 2), gate(index[k], "X", 0.0, t1)]
    if flip:
        frag.moments.append(gate(index[i], "X", 0.0, t1))
    return frag


def _qft_pairs(n):
    """(gate list) for the textbook QFT on little-endian qubits, swaps excluded."""
    ops = []
    for j in reversed(range(n)):
        ops.append(("H", j))
        for m in reversed(range(j)):
            ops.append(("CP", m, j, math.pi / 2 ** (j - m)))
    return ops


def qft_digital(n_qubits, device=None, qubits=None):
    """QFT with H, controlled phases from CNOT + Rz, then a qubit-order reversal.

    Controlled phase ``diag(1, 1, 1, e^{i phi})`` is
    ``Rz_c(phi/2) Rz_t(phi/2) CNOT Rz_t(-phi/2) CNOT`` up to global phase.
    """
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    t_single = device.t_single_gate if device is not None else 0.0
    t_cnot = device.t_cnot if device is not None else 0.0
    moments = []
    for op in _qft_pairs(n_qubits):
        if op[0] == "H":
            moments.append(gate(op[1], "H", 0.0, t_single))
        else:
            _, c, t, phi = op
            moments += [gate(c, "RZ", phi / 2), gate(t, "RZ", phi / 2),
                        cnot(c, t, t_cnot), gate(t, "RZ", -phi / 2), cnot(c, t, t_cnot)]
    if n_qubits > 1:
        moments.append(permute(reversed(range(n_qubits))))
    moments.append(measure())
    return Schedule(n_qubits, moments, qubits or tuple(range(n_qubits)),
                    meta={"backend": "digital", "algorithm": "qft"})


def qft_da(device, qubits, max_idle_ns=None):
    """3-qubit QFT whose controlled phases are echoed ZZ idles plus Rz corrections.

    ``diag(1, 1, 1, e^{i phi}) = e^{i phi/4} exp(i phi/4 Z Z) Rz_c(phi/2) Rz_t(phi/2)``
    so each controlled phase is an echo fragment with ``theta = -phi/4``.
    """
    qubits = tuple(qubits)
    if len(qubits) != 3:
        raise ValueError("digital-analog QFT is defined for three qubits")
    for a in range(3):
        for b in range(a + 1, 3):
            if device.coupling(qubits[a], qubits[b]) <= 0:
                raise ValueError(f"qubits {qubits[a]} and {qubits[b]} are not coupled")
    t_single = device.t_single_gate
    sched = Schedule(3, [], qubits, meta={"backend": "da", "algorithm": "qft"})
    for op in _qft_pairs(3):
        if op[0] == "H":
            sched.moments.append(gate(op[1], "H", 0.0, t_single))
            continue
        _, c, t, phi = op
        (s,) = {0, 1, 2} - {c, t}
        sched.moments += [gate(c, "RZ", phi / 2), gate(t, "RZ", phi / 2)]
        frag = echo_zz_isolation(device, (qubits[c], qubits[t]), qubits[s], -phi / 4,
                                 qubits=qubits, max_idle_ns=max_idle_ns)
        sched.extend(frag)
    sched.moments.append(permute((2, 1, 0)))
    sched.moments.append(measure())
    return sched


def dft_matrix(n_qubits):
    dim = 1 << n_qubits
    k = np.arange(dim)
    return np.exp(2j * np.pi * np.outer(k, k) / dim) / np.sqrt(dim)
