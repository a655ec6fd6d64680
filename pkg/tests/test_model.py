import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from daqsim import device as dv
from daqsim import model as md
from daqsim import statevector as sv


def tfim_oracle(n, h, edges, eps=None):
    """Dense Ising matrix from explicit Kronecker products (qubit 0 rightmost)."""
    def op(single, q):
        out = np.ones((1, 1))
        for k in reversed(range(n)):
            out = np.kron(out, single if k == q else np.eye(2))
        return out
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1.0, -1.0])
    m = np.zeros((1 << n, 1 << n))
    for q in range(n):
        m -= h[q] * op(x, q)
        if eps is not None:
            m += eps[q] * op(z, q)
    for (a, b), jv in edges.items():
        m -= jv * op(z, a) @ op(z, b)
    return m


def two_qubit_device(j=70.0):
    return dv.load_device({
        "name": "pair",
        "qubits": [{"id": 0, "t1_us": 50.0, "t2_us": 50.0}, {"id": 1, "t1_us": 50.0, "t2_us": 50.0}],
        "couplings": [{"a": 0, "b": 1, "j_khz": j}],
        "gates": {"single_ns": 50.0, "identity_ns": 100.0, "cnot_ns": 400.0, "cnot_error": 0.02}})


def test_per_pair_rule_two_qubits():
    m = md.build_tfim(two_qubit_device(), "per-pair-2J")
    j01 = m.j[(0, 1)]
    np.testing.assert_allclose(m.h, [2 * j01, 2 * j01])
    assert not m.has_disorder and np.all(m.eps == 0)


def test_uniform_rule_qx2():
    m = md.build_tfim(dv.load_device("qx2-like"), "uniform-2Jbar")
    np.testing.assert_allclose(m.h, 2 * np.mean(list(m.j.values())))
    assert len(m.j) == 6


def test_ratios_follow_device():
    d = dv.load_device("qx4-like")
    m = md.build_tfim(d)
    for (a, b), jv in m.j.items():
        for (c, e), jw in m.j.items():
            want = d.coupling(a, b) / d.coupling(c, e)
            assert jv / jw == pytest.approx(want, rel=1e-12)
    assert m.matches_device(d)
    assert np.mean(list(m.j.values())) == pytest.approx(1.0)


def test_explicit_h_and_bad_rule():
    d = dv.load_device("qx2-like")
    assert np.all(md.build_tfim(d, np.arange(5.0)).h == np.arange(5.0))
    with pytest.raises(ValueError):
        md.build_tfim(d, np.ones(3))
    with pytest.raises(ValueError):
        md.build_tfim(d, "made-up")
    with pytest.raises(ValueError):
        md.build_tfim(d, "per-pair-2J", qubits=(0, 3))  # no shared edge


def test_hamiltonian_matches_oracle(preset):
    m = md.build_tfim(preset, qubits=preset.qubit_ids[:5])
    m = m.with_disorder(np.linspace(-0.5, 0.5, m.n_spins))
    got = sv.hamiltonian_matrix(m.hamiltonian_terms(), m.n_spins)
    want = tfim_oracle(m.n_spins, m.h, m.j, m.eps)
    np.testing.assert_allclose(got, want, atol=1e-12)
    assert np.allclose(got.imag, 0) and np.allclose(got, got.T)


def test_spectrum_without_disorder():
    m = md.build_tfim(dv.load_device("qx2-like"))
    got = np.linalg.eigvalsh(sv.hamiltonian_matrix(m.hamiltonian_terms(), m.n_spins))
    want = np.linalg.eigvalsh(tfim_oracle(m.n_spins, m.h, m.j))
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_disorder_bounds_and_determinism():
    rng = np.random.default_rng(0)
    eps = md.sample_disorder(0.5, 100_000, rng)
    assert np.all(np.abs(eps) <= 1.0)
    # uniform on [-1, 1] has variance 1/3
    assert abs(eps.mean()) < 5 * np.sqrt(1 / 3 / len(eps))
    a = md.sample_disorder(1.0, 7, np.random.default_rng(5))
    b = md.sample_disorder(1.0, 7, np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)
    with pytest.raises(ValueError):
        md.sample_disorder(0.0, 3, rng)


def test_disorder_realizations_are_distinct_and_reproducible():
    m = md.build_tfim(dv.load_device("qx2-like"))
    spec = md.DisorderSpec(seed=3)
    r0, r1 = md.disorder_realization(m, spec, 0), md.disorder_realization(m, spec, 1)
    assert not np.allclose(r0, r1)
    np.testing.assert_array_equal(r0, md.disorder_realization(m, spec, 0))


def test_time_map_two_spin_50_us():
    d = dv.load_device("qx14-like")
    m = md.build_tfim(d, "per-pair-2J", qubits=(0, 1))
    assert md.map_time(2.5, m.time_map) == pytest.approx(50.0)
    assert md.map_time(3.0, md.TimeMap(1.0)) == pytest.approx(3e3)
    with pytest.raises(ValueError):
        md.map_time(-1, m.time_map)
    with pytest.raises(ValueError):
        md.TimeMap(0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1e4), st.floats(1e-4, 1e2))
def test_time_map_roundtrip(t, scale):
    tm = md.TimeMap(scale)
    back = md.unmap_time(md.map_time(t, tm), tm)
    assert back == pytest.approx(t, rel=1e-12, abs=1e-300)


def test_spectator_closure():
    d = dv.load_device("qx14-like")
    base = md.build_tfim(d, "per-pair-2J", qubits=(0, 1))
    m = md.spectator_closure(base, d, (0, 1))
    assert m.qubits == (0, 1, 2, 13)
    assert [m.qubits[i] for i in m.active] == [0, 1]
    assert m.h[2] == 0 and m.h[3] == 0
    assert m.matches_device(d)
    assert (2, 3) not in m.j  # 2 and 13 are not coupled
