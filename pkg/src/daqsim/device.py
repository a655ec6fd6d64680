"""Device model: qubit graph with always-on ZZ couplings, coherence times and
gate durations.

Units follow the device documents: couplings in kHz, coherence times in µs,
gate durations in ns. A coupling ``J`` acting for a time ``t`` contributes the
ZZ angle ``J[kHz] * t[µs] * 1e-3`` radians, the same product that defines
the Ising time ``J * t``.

Bundled presets carry representative coupling values, not measured ones.
"""
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

PRESETS = ("qx2-like", "qx14-like", "qx4-like")

_TOP_KEYS = {"name", "qubits", "couplings", "gates"}
_QUBIT_KEYS = {"id", "t1_us", "t2_us"}
_COUPLING_KEYS = {"a", "b", "j_khz"}
_GATE_KEYS = {"single_ns", "identity_ns", "cnot_ns", "cnot_error", "readout_error"}
_GATE_REQUIRED = _GATE_KEYS - {"readout_error"}


class DeviceValidationError(ValueError):
    """Raised for malformed device documents; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class QubitSpec:
    id: int
    t1: float  # µs
    t2: float  # µs


@dataclass(frozen=True)
class DeviceModel:
    name: str
    qubits: tuple
    couplings: tuple  # ((a, b, j_khz), ...) with a < b
    t_single_gate: float  # ns
    t_identity: float  # ns
    t_cnot: float  # ns
    cnot_error: float
    readout_error: float = 0.0

    @property
    def n_qubits(self):
        return len(self.qubits)

    @property
    def qubit_ids(self):
        return tuple(q.id for q in self.qubits)

    def qubit(self, qid):
        for q in self.qubits:
            if q.id == qid:
                return q
        raise KeyError(f"device {self.name!r} has no qubit {qid}")

    def coupling(self, a, b):
        """Coupling between two qubits in kHz (0 when not connected)."""
        a, b = min(a, b), max(a, b)
        for x, y, j in self.couplings:
            if (x, y) == (a, b):
                return j
        return 0.0

    def neighbors(self, qid):
        out = set()
        for a, b, _ in self.couplings:
            if a == qid:
                out.add(b)
            elif b == qid:
                out.add(a)
        return out

    def edges_among(self, qids):
        """Couplings with both endpoints in ``qids`` (device ids)."""
        s = set(qids)
        return [(a, b, j) for a, b, j in self.couplings if a in s and b in s]


def _fail(path, msg):
    raise DeviceValidationError(path, msg)


def _number(doc, key, path):
    if key not in doc:
        _fail(f"{path}.{key}", "missing")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(f"{path}.{key}", f"expected a number, got {v!r}")
    return float(v)


def _check_keys(doc, allowed, path):
    if not isinstance(doc, dict):
        _fail(path, "expected an object")
    extra = set(doc) - allowed
    if extra:
        _fail(path, f"unknown keys {sorted(extra)}")


def device_from_document(doc):
    """Validate a parsed device document and build a :class:`DeviceModel`."""
    _check_keys(doc, _TOP_KEYS, "$")
    for key in ("name", "qubits", "couplings", "gates"):
        if key not in doc:
            _fail(f"$.{key}", "missing")
    if not isinstance(doc["name"], str):
        _fail("$.name", "expected a string")

    qubits = []
    seen = set()
    if not isinstance(doc["qubits"], list) or not doc["qubits"]:
        _fail("$.qubits", "expected a non-empty array")
    for i, q in enumerate(doc["qubits"]):
        path = f"$.qubits[{i}]"
        _check_keys(q, _QUBIT_KEYS, path)
        qid = q.get("id")
        if isinstance(qid, bool) or not isinstance(qid, int) or qid < 0:
            _fail(f"{path}.id", f"expected a non-negative integer, got {qid!r}")
        if qid in seen:
            _fail(f"{path}.id", f"duplicate qubit id {qid}")
        seen.add(qid)
        t1 = _number(q, "t1_us", path)
        t2 = _number(q, "t2_us", path)
        if t1 <= 0:
            _fail(f"{path}.t1_us", "must be > 0")
        if t2 <= 0:
            _fail(f"{path}.t2_us", "must be > 0")
        if t2 > 2 * t1:
            _fail(f"{path}.t2_us", f"T2 = {t2} exceeds 2*T1 = {2 * t1}")
        qubits.append(QubitSpec(qid, t1, t2))

    couplings = []
    pairs = set()
    if not isinstance(doc["couplings"], list):
        _fail("$.couplings", "expected an array")
    for i, c in enumerate(doc["couplings"]):
        path = f"$.couplings[{i}]"
        _check_keys(c, _COUPLING_KEYS, path)
        ends = []
        for key in ("a", "b"):
            v = c.get(key)
            if isinstance(v, bool) or not isinstance(v, int):
                _fail(f"{path}.{key}", f"expected an integer qubit id, got {v!r}")
            if v not in seen:
                _fail(f"{path}.{key}", f"unknown qubit {v}")
            ends.append(v)
        a, b = ends
        if a == b:
            _fail(path, f"self-loop on qubit {a}")
        pair = (min(a, b), max(a, b))
        if pair in pairs:
            _fail(path, f"duplicate coupling {pair}")
        pairs.add(pair)
        j = _number(c, "j_khz", path)
        if j <= 0:
            _fail(f"{path}.j_khz", f"couplings must be positive, got {j}")
        couplings.append((pair[0], pair[1], j))

    g = doc["gates"]
    _check_keys(g, _GATE_KEYS, "$.gates")
    for key in sorted(_GATE_REQUIRED):
        if key not in g:
            _fail(f"$.gates.{key}", "missing")
    durations = {k: _number(g, k, "$.gates") for k in ("single_ns", "identity_ns", "cnot_ns")}
    for k, v in durations.items():
        if v <= 0:
            _fail(f"$.gates.{k}", "must be > 0")
    probs = {"cnot_error": _number(g, "cnot_error", "$.gates"),
             "readout_error": _number(g, "readout_error", "$.gates") if "readout_error" in g else 0.0}
    for k, v in probs.items():
        if not 0 <= v <= 1:
            _fail(f"$.gates.{k}", "must be a probability in [0, 1]")

    return DeviceModel(
        name=doc["name"],
        qubits=tuple(qubits),
        couplings=tuple(couplings),
        t_single_gate=durations["single_ns"],
        t_identity=durations["identity_ns"],
        t_cnot=durations["cnot_ns"],
        cnot_error=probs["cnot_error"],
        readout_error=probs["readout_error"],
    )


def device_to_document(device):
    return {
        "name": device.name,
        "qubits": [{"id": q.id, "t1_us": q.t1, "t2_us": q.t2} for q in device.qubits],
        "couplings": [{"a": a, "b": b, "j_khz": j} for a, b, j in device.couplings],
        "gates": {
            "single_ns": device.t_single_gate,
            "identity_ns": device.t_identity,
            "cnot_ns": device.t_cnot,
            "cnot_error": device.cnot_error,
            "readout_error": device.readout_error,
        },
    }


def load_device(source):
    """Load a device from a preset name, a JSON file path, JSON text or a dict."""
    if isinstance(source, DeviceModel):
        return source
    if isinstance(source, dict):
        return device_from_document(source)
    if isinstance(source, str) and source in PRESETS:
        text = resources.files("daqsim.presets").joinpath(f"{source}.json").read_text()
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    elif isinstance(source, (str, Path)) and Path(source).is_file():
        text = Path(source).read_text()
    else:
        raise DeviceValidationError("$", f"no preset or file named {source!r}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DeviceValidationError("$", f"parse error: {exc}") from exc
    return device_from_document(doc)


def mean_ising_times(device):
    """``(mean J * mean T1, mean J * mean T2)``, dimensionless."""
    if not device.couplings:
        raise ValueError(f"device {device.name!r} has no couplings")
    j = math.fsum(c[2] for c in device.couplings) / len(device.couplings)
    t1 = math.fsum(q.t1 for q in device.qubits) / len(device.qubits)
    t2 = math.fsum(q.t2 for q in device.qubits) / len(device.qubits)
    return j * t1 * 1e-3, j * t2 * 1e-3


def optimal_coupling(t_1q_ns, t_coh_us):
    """Coupling balancing gate corruption ``J t_1q`` against decoherence ``1/(J T)``.

    Returns ``(j_opt in kHz, minimum total error)``; order-one constants omitted.
    """
    if t_1q_ns <= 0 or t_coh_us <= 0:
        raise ValueError("durations must be positive")
    t_1q = t_1q_ns * 1e-9
    t_coh = t_coh_us * 1e-6
    return 1e-3 / math.sqrt(t_1q * t_coh), math.sqrt(t_1q / t_coh)


def step_error(j_khz, t_1q_ns, t_coh_us):
    """Single-step error model ``J t_1q + 1 / (J T)``."""
    j = j_khz * 1e3
    return j * t_1q_ns * 1e-9 + 1.0 / (j * t_coh_us * 1e-6)


def idle_block_length(t_phys_ns, t_identity_ns):
    """Number of identity gates approximating an idle, and the residual in ns.

    Rounds to nearest (halves up); residual is ``t_phys - M * T_I``.
    """
    if t_phys_ns < 0:
        raise ValueError("idle time must be non-negative")
    m = int(math.floor(t_phys_ns / t_identity_ns + 0.5))
    return m, t_phys_ns - m * t_identity_ns
