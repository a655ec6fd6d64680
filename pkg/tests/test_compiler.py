import math
import warnings

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings, strategies as st

from daqsim import compiler as cp
from daqsim import device as dv
from daqsim import experiments as ex
from daqsim import model as md
from daqsim import noise as nz
from daqsim import statevector as sv

# Six-step Trotter value of the normalized excitation of the two active spins
# (h = 2J, J t = 2.5) in the four-spin closure; computed once with the dense
# scipy.linalg.expm oracle below and frozen.
TWO_SPIN_TROTTER_N_MEAN = 0.6650925490425248

X = np.array([[0, 1], [1, 0]])
Z = np.diag([1.0, -1.0])


def op(n, single, q):
    out = np.ones((1, 1))
    for k in reversed(range(n)):
        out = np.kron(out, single if k == q else np.eye(2))
    return out


def trotter_oracle(model, t, n_tr):
    """First-order product ``(exp(-i H_zz dt) exp(-i H_eps dt) exp(-i H_x dt))^n`` via expm."""
    n = model.n_spins
    dt = t / n_tr
    hx = -sum(model.h[q] * op(n, X, q) for q in range(n))
    he = sum(model.eps[q] * op(n, Z, q) for q in range(n))
    hz = -sum(jv * op(n, Z, a) @ op(n, Z, b) for (a, b), jv in model.j.items())
    step = sl.expm(-1j * hz * dt) @ sl.expm(-1j * he * dt) @ sl.expm(-1j * hx * dt)
    return np.linalg.matrix_power(step, n_tr)


def chain3():
    d = dv.load_device("qx2-like")
    return md.build_tfim(d, qubits=(0, 1, 2)), d


def test_zero_time_digital_is_identity():
    m, _ = chain3()
    u = nz.schedule_unitary(cp.trotterize_digital(m, 0.0, 5))
    assert sv.phase_distance(u, np.eye(8)) <= 1e-12


def test_zero_time_da_is_identity():
    m, d = chain3()
    sched = cp.trotterize_da(m, d, 0.0, 4)
    assert all(mo.duration == 0 for mo in sched.moments if mo.kind == "idle")
    u = nz.schedule_unitary(sched, d)
    assert sv.phase_distance(u, np.eye(8)) <= 1e-12


def test_digital_matches_product_oracle():
    m, _ = chain3()
    m = m.with_disorder([0.3, -0.2, 0.5])
    u = nz.schedule_unitary(cp.trotterize_digital(m, 1.7, 4))
    assert sv.phase_distance(u, trotter_oracle(m, 1.7, 4)) <= 1e-12


def test_two_spin_trotter_value():
    d = dv.load_device("qx14-like")
    m = ex.two_spin_model(d)
    k = np.arange(16)
    psi = trotter_oracle(m, 2.5, 6)[:, 0]
    oracle = sum(np.abs(psi) ** 2 @ ((k >> q) & 1) for q in m.active) / 2
    assert oracle == pytest.approx(TWO_SPIN_TROTTER_N_MEAN, abs=1e-12)
    for sched in (cp.trotterize_digital(m, 2.5, 6, initial="0000"),
                  cp.trotterize_da(m, d, 2.5, 6, initial="0000")):
        state = nz.simulate(sched, d)
        n_mean = sum(state.probabilities @ ((k >> q) & 1) for q in m.active) / 2
        assert n_mean == pytest.approx(TWO_SPIN_TROTTER_N_MEAN, abs=1e-12)


def test_da_idle_per_step_two_spin():
    d = dv.load_device("qx14-like")
    m = ex.two_spin_model(d)
    sched = cp.trotterize_da(m, d, 2.5, 6)
    idles = [mo.duration for mo in sched.moments if mo.kind == "idle"]
    assert len(idles) == 6
    assert idles[0] == pytest.approx(50_000 / 6)
    singles = sum(mo.duration for mo in sched.moments if mo.kind == "gate")
    assert sched.total_phys_time == pytest.approx(50_000 + singles)


def test_da_rejects_non_device_model():
    m, d = chain3()
    bad = md.SpinModel(m.qubits, m.h, {e: 1.0 + i for i, e in enumerate(m.edges)},
                       time_map=m.time_map)
    with pytest.raises(ValueError):
        cp.trotterize_da(bad, d, 1.0, 2)
    cp.trotterize_digital(bad, 1.0, 2)  # still legal digitally


def test_trotter_convergence_64_steps():
    m, _ = chain3()
    exact = sv.exact_propagator(m.hamiltonian_terms(), 1.0, 3)[:, 0]
    state = nz.simulate(cp.trotterize_digital(m, 1.0, 64))
    assert sv.state_distance(state, exact) < 1e-1
    assert 1 - abs(np.vdot(exact, state.amplitudes)) ** 2 < 1e-3


def test_second_order_converges_faster():
    m, _ = chain3()
    exact = sv.exact_propagator(m.hamiltonian_terms(), 1.0, 3)[:, 0]
    first = sv.state_distance(nz.simulate(cp.trotterize_digital(m, 1.0, 16)), exact)
    second = sv.state_distance(nz.simulate(cp.trotterize_digital(m, 1.0, 16, order=2)), exact)
    assert second < first / 5
    with pytest.raises(ValueError):
        cp.trotterize_digital(m, 1.0, 2, order=3)


def test_backend_equivalence_disordered():
    d = dv.load_device("qx2-like")
    m = md.build_tfim(d).with_disorder([0.1, -0.4, 0.2, 0.0, 0.3])
    for n_tr in (1, 3, 8):
        a = nz.simulate(cp.trotterize_digital(m, 2.0, n_tr, d, initial="10010"), d)
        b = nz.simulate(cp.trotterize_da(m, d, 2.0, n_tr, initial="10010"), d)
        assert sv.state_distance(a, b) <= 1e-10


def test_digital_cnot_layers_share_time():
    d = dv.load_device("qx2-like")
    m = md.build_tfim(d)
    layers = cp.edge_layers(m.edges)
    assert sorted(e for layer in layers for e in layer) == m.edges
    for layer in layers:
        qs = [q for e in layer for q in e]
        assert len(qs) == len(set(qs))
    sched = cp.trotterize_digital(m, 1.0, 1, d)
    cnot_time = sum(mo.duration for mo in sched.moments if mo.kind == "cnot")
    assert cnot_time == pytest.approx(2 * len(layers) * d.t_cnot)
    assert sched.count("cnot") == 2 * len(m.edges)


def echo_unitary(device, pair, spectator, theta):
    frag = cp.echo_zz_isolation(device, pair, spectator, theta)
    frag.moments.append(cp.measure())
    return nz.schedule_unitary(frag, device)


def zz_target(theta):
    return sl.expm(-1j * theta * op(3, Z, 0) @ op(3, Z, 1))


def device3(j01, j02, j12):
    return dv.load_device({
        "name": "tri",
        "qubits": [{"id": i, "t1_us": 50.0, "t2_us": 50.0} for i in range(3)],
        "couplings": [{"a": 0, "b": 1, "j_khz": j01}, {"a": 0, "b": 2, "j_khz": j02},
                      {"a": 1, "b": 2, "j_khz": j12}],
        "gates": {"single_ns": 50.0, "identity_ns": 100.0, "cnot_ns": 400.0, "cnot_error": 0.0}})


@pytest.mark.parametrize("theta", [-1.0, -0.2, 0.35, math.pi / 8])
def test_echo_matches_zz_rotation(theta):
    d = device3(60.0, 45.0, 80.0)
    assert sv.phase_distance(echo_unitary(d, (0, 1), 2, theta), zz_target(theta)) <= 1e-12


def test_echo_zero_angle_and_guard():
    d = device3(60.0, 45.0, 80.0)
    assert cp.echo_zz_isolation(d, (0, 1), 2, 0.0).moments == []
    with pytest.warns(RuntimeWarning):
        cp.echo_zz_isolation(d, (0, 1), 2, -1.0, max_idle_ns=100.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cp.echo_zz_isolation(d, (0, 1), 2, -1e-3, max_idle_ns=1e6)


def test_echo_uncoupled_spectator():
    d = dv.load_device({
        "name": "line",
        "qubits": [{"id": i, "t1_us": 50.0, "t2_us": 50.0} for i in range(3)],
        "couplings": [{"a": 0, "b": 1, "j_khz": 60.0}],
        "gates": {"single_ns": 50.0, "identity_ns": 100.0, "cnot_ns": 400.0, "cnot_error": 0.0}})
    frag = cp.echo_zz_isolation(d, (0, 1), 2, -0.4)
    assert frag.count("idle") == 2 and frag.count("gate") == 2
    assert sv.phase_distance(echo_unitary(d, (0, 1), 2, -0.4), zz_target(-0.4)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 500.0), st.floats(1.0, 500.0), st.floats(1.0, 500.0),
       st.floats(-2.0, 2.0))
def test_echo_cancels_spectator_couplings(j01, j02, j12, theta):
    d = device3(j01, j02, j12)
    assert sv.phase_distance(echo_unitary(d, (0, 1), 2, theta), zz_target(theta)) <= 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_qft_digital_is_dft(n):
    u = nz.schedule_unitary(cp.qft_digital(n))
    assert sv.phase_distance(u, cp.dft_matrix(n)) <= 1e-10


def test_qft_single_qubit_is_hadamard():
    sched = cp.qft_digital(1)
    assert [m.name for m in sched.moments if m.kind == "gate"] == ["H"]


def test_qft_da_is_dft():
    d = dv.load_device("qx2-like")
    sched = cp.qft_da(d, (0, 1, 2))
    u = nz.schedule_unitary(sched, d)
    assert sv.phase_distance(u, cp.dft_matrix(3)) <= 1e-9
    np.testing.assert_allclose(np.abs(u[:, 0]) ** 2, np.full(8, 1 / 8), atol=1e-12)


def test_qft_da_idle_scaling():
    d = dv.load_device("qx2-like")  # equal couplings
    sched = cp.qft_da(d, (0, 1, 2))
    idles = [m.duration for m in sched.moments if m.kind == "idle"]
    # fragments in order: R_2 (pi/2), R_3 (pi/4), R_2 (pi/2); two halves each
    assert idles[0] == pytest.approx(2 * idles[2])
    assert idles[4] == pytest.approx(idles[0])


def test_qft_da_needs_triangle():
    with pytest.raises(ValueError):
        cp.qft_da(dv.load_device("qx2-like"), (0, 1, 3))
    with pytest.raises(ValueError):
        cp.qft_da(dv.load_device("qx2-like"), (0, 1))


def test_emitted_schedules_validate(preset):
    m = md.build_tfim(preset, qubits=preset.qubit_ids[:5])
    for sched in (cp.trotterize_digital(m, 1.0, 3, preset), cp.trotterize_da(m, preset, 1.0, 3)):
        assert cp.validate_schedule(sched)
        assert sched.total_phys_time == pytest.approx(sum(mo.duration for mo in sched.moments))


@pytest.mark.parametrize("bad", [
    [cp.gate(0, "RX", 0.1, -1.0)],
    [cp.gate(5, "H")],
    [cp.cnot(1, 1)],
    [cp.measure(), cp.idle(10.0)],
    [cp.permute((0, 0))],
    [cp.gate(0, "T")],
])
def test_validator_rejects(bad):
    with pytest.raises(ValueError):
        cp.validate_schedule(cp.Schedule(2, bad))


GOLDEN = """QUBITS 0 1
X 1 50.0
RX 0 -0.5 0.0
RX 1 -0.5 50.0
IDLE 8333.333333333334
CNOT 0 1 400.0
RZ 1 0.25 0.0
PERMUTE 1 0
MEASURE
"""


def test_text_format_golden_roundtrip():
    sched = cp.from_text(GOLDEN)
    assert sched.device_qubits == (0, 1)
    assert [m.kind for m in sched.moments] == ["gate", "gate", "gate", "idle", "cnot", "gate",
                                                "permute", "measure"]
    assert sched.moments[3].duration == 8333.333333333334
    assert cp.to_text(sched) == GOLDEN


def test_text_format_roundtrip_trotter():
    d = dv.load_device("qx2-like")
    sched = cp.trotterize_da(md.build_tfim(d), d, 1.3, 3, initial="01100")
    back = cp.from_text(cp.to_text(sched))
    assert back.moments == sched.moments


@pytest.mark.parametrize("text", ["RX 0 0.1 0\n", "QUBITS 0\nFOO 1\n", "QUBITS 0\nRX 0\n",
                                  "QUBITS 0 1\nMEASURE\nIDLE 5\n"])
def test_text_format_errors(text):
    with pytest.raises(ValueError):
        cp.from_text(text)


def test_preparation_bit_order():
    moms = cp.preparation("001", 50.0)
    assert [m.qubits for m in moms] == [(0,)]
