import copy
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from daqsim import device as dv


def doc(**gate_overrides):
    gates = {"single_ns": 50.0, "identity_ns": 100.0, "cnot_ns": 400.0, "cnot_error": 0.02}
    gates.update(gate_overrides)
    return {
        "name": "toy",
        "qubits": [{"id": 0, "t1_us": 71.7, "t2_us": 63.3}, {"id": 1, "t1_us": 71.7, "t2_us": 63.3},
                   {"id": 2, "t1_us": 71.7, "t2_us": 63.3}],
        "couplings": [{"a": 0, "b": 1, "j_khz": 60.0}, {"a": 1, "b": 2, "j_khz": 60.0}],
        "gates": gates,
    }


def test_presets_load(preset):
    assert preset.n_qubits >= 5
    assert all(j > 0 for _, _, j in preset.couplings)


def test_qx2_topology():
    d = dv.load_device("qx2-like")
    assert d.n_qubits == 5 and len(d.couplings) == 6
    assert d.neighbors(2) == {0, 1, 3, 4}


def test_qx14_ising_times():
    t1, t2 = dv.mean_ising_times(dv.load_device("qx14-like"))
    assert t1 == pytest.approx(2.6) and t2 == pytest.approx(3.6)


def test_mean_ising_times_qx2_values():
    t1, t2 = dv.mean_ising_times(dv.load_device(doc()))
    assert round(t1, 1) == 4.3 and round(t2, 1) == 3.8


def test_single_coupling_ising_time():
    d = doc()
    d["couplings"] = d["couplings"][:1]
    d["qubits"] = d["qubits"][:2]
    assert dv.mean_ising_times(dv.load_device(d))[0] == pytest.approx(60.0 * 71.7e-3)


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d["couplings"][0].update(j_khz=-10.0), "$.couplings[0].j_khz"),
    (lambda d: d["couplings"].append({"a": 1, "b": 0, "j_khz": 5.0}), "$.couplings[2]"),
    (lambda d: d["couplings"].append({"a": 1, "b": 1, "j_khz": 5.0}), "$.couplings[2]"),
    (lambda d: d["couplings"].append({"a": 1, "b": 7, "j_khz": 5.0}), "$.couplings[2].b"),
    (lambda d: d["qubits"][1].update(t2_us=200.0), "$.qubits[1].t2_us"),
    (lambda d: d["qubits"][1].update(id=0), "$.qubits[1].id"),
    (lambda d: d["gates"].update(cnot_ns=0.0), "$.gates.cnot_ns"),
    (lambda d: d["gates"].update(cnot_error=1.5), "$.gates.cnot_error"),
    (lambda d: d["gates"].pop("single_ns"), "$.gates.single_ns"),
    (lambda d: d.update(extra=1), "$"),
    (lambda d: d["qubits"][0].update(t1_us="long"), "$.qubits[0].t1_us"),
])
def test_validation_errors_name_the_field(mutate, path):
    d = doc()
    mutate(d)
    with pytest.raises(dv.DeviceValidationError) as err:
        dv.load_device(d)
    assert err.value.path == path


def test_load_from_file_and_text(tmp_path):
    p = tmp_path / "dev.json"
    p.write_text(json.dumps(doc()))
    assert dv.load_device(str(p)) == dv.load_device(json.dumps(doc()))
    with pytest.raises(dv.DeviceValidationError):
        dv.load_device("no-such-device")
    with pytest.raises(dv.DeviceValidationError):
        dv.load_device("{not json")


def test_roundtrip_presets(preset):
    assert dv.load_device(dv.device_to_document(preset)) == preset


def test_optimal_coupling_examples():
    j, err = dv.optimal_coupling(50.0, 100.0)
    assert j == pytest.approx(447.2, abs=0.1)
    assert err == pytest.approx(0.02236, abs=1e-5)
    # symmetry point t_1q = T: j = 1/t, error 1
    j, err = dv.optimal_coupling(1e3, 1.0)
    assert j == pytest.approx(1e3) and err == pytest.approx(1.0)
    with pytest.raises(ValueError):
        dv.optimal_coupling(0, 1)


def test_step_error_minimum_at_optimum():
    j, err = dv.optimal_coupling(50.0, 100.0)
    assert dv.step_error(j, 50.0, 100.0) == pytest.approx(2 * err)
    for f in (0.5, 0.9, 1.1, 2.0):
        assert dv.step_error(f * j, 50.0, 100.0) > dv.step_error(j, 50.0, 100.0)


def test_idle_block_length():
    assert dv.idle_block_length(10_000, 100) == (100, 0)
    assert dv.idle_block_length(0, 100) == (0, 0)
    assert dv.idle_block_length(150, 100) == (2, -50)
    with pytest.raises(ValueError):
        dv.idle_block_length(-1, 100)


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0, 1000.0), st.floats(1.0, 1000.0))
def test_optimal_coupling_balances_error_terms(t_1q_ns, t_coh_us):
    j, err = dv.optimal_coupling(t_1q_ns, t_coh_us)
    gate_term = j * 1e3 * t_1q_ns * 1e-9
    idle_term = 1.0 / (j * 1e3 * t_coh_us * 1e-6)
    assert math.isclose(err, gate_term, rel_tol=1e-9)
    assert math.isclose(err, idle_term, rel_tol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.randoms(use_true_random=False))
def test_ising_times_permutation_invariant(rnd):
    d = dv.device_to_document(dv.load_device("qx4-like"))
    ref = dv.mean_ising_times(dv.load_device(d))
    shuffled = copy.deepcopy(d)
    rnd.shuffle(shuffled["qubits"])
    rnd.shuffle(shuffled["couplings"])
    got = dv.mean_ising_times(dv.load_device(shuffled))
    assert got == pytest.approx(ref, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(1.0, 500.0), st.floats(0.1, 1.0)), min_size=2, max_size=6),
       st.floats(0.0, 1.0))
def test_loader_roundtrip(qubits, cnot_error):
    d = {"name": "gen",
         "qubits": [{"id": i, "t1_us": t1, "t2_us": t1 * 2 * f} for i, (t1, f) in enumerate(qubits)],
         "couplings": [{"a": i, "b": i + 1, "j_khz": 10.0 + i} for i in range(len(qubits) - 1)],
         "gates": {"single_ns": 50.0, "identity_ns": 100.0, "cnot_ns": 400.0,
                   "cnot_error": cnot_error, "readout_error": 0.0}}
    assert dv.device_to_document(dv.load_device(d)) == d
