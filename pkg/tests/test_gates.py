import math

import numpy as np
import pytest

from loqc.fock import QubitSlot, make_basis_state
from loqc.gates import (
    GATE_BUILDERS,
    GateDefinition,
    NoValidCorrection,
    basis_input,
    bits,
    build_destructive_xor,
    build_encoder,
    build_parity_check,
    build_pbs_cnot,
    classify_outcomes,
    derive_correction_table,
    get_gate,
    identity_gate,
    pattern_fidelities,
    product_input,
    simulate,
    truth_table,
)
from loqc.measurement import ACCEPT, FAIL, DetectionPattern

S = 1 / math.sqrt(2)
OVERLAPS = (1.0, 0.75, 0.5, 0.25, 0.0)


def conditional_output(gate, state):
    """Normalized accepted output restricted to its logical amplitudes, per output bitstring."""
    run = simulate(gate, state)
    out = run.output()
    amps = {}
    for occ, a in out.amplitudes.items():
        key = ""
        for slot in gate.output_slots:
            key += "1" if occ[slot.v_mode] else "0"
        rest = tuple(occ[i] for i in range(out.mode_count)
                     if i not in {m for s in gate.output_slots for m in s.modes})
        amps[(key, rest)] = amps.get((key, rest), 0) + a / math.sqrt(run.acceptance)
    return run.acceptance, amps


def by_record(amps):
    """Group amplitudes by detector record, dropping records with no weight."""
    groups = {}
    for (key, rest), a in amps.items():
        groups.setdefault(rest, {})[key] = a
    return groups


@pytest.fixture(scope="module")
def gates():
    return {name: get_gate(name) for name in GATE_BUILDERS}


class TestParityCheck:
    def test_two_patterns_i_and_z(self, gates):
        table = gates["parity_check"].corrections
        assert len(table) == 2
        ops = sorted(tuple(c.op for c in fix) for fix in table.values())
        assert ops == [(), ("Z",)]

    def test_basis_acceptance(self, gates):
        tt = truth_table(gates["parity_check"])
        assert tt.acceptance == pytest.approx({"00": 1.0, "01": 0.0, "10": 0.0, "11": 1.0}, abs=1e-12)
        assert tt.mean_acceptance == pytest.approx(0.5, abs=1e-9)
        assert tt.truth_table["00"] == pytest.approx({"0": 1.0})
        assert tt.truth_table["01"] == {}

    @pytest.mark.parametrize("alpha,beta", [(1, 0), (0, 1), (0.6, 0.8), (S, -1j * S)])
    def test_copies_first_qubit_with_plus_ancilla(self, gates, alpha, beta):
        p, amps = conditional_output(gates["parity_check"], product_input([(alpha, beta), (S, S)]))
        assert p == pytest.approx(0.5, abs=1e-9)
        for record in by_record(amps).values():
            norm = math.sqrt(sum(abs(a) ** 2 for a in record.values()))
            got = np.array([record.get("0", 0), record.get("1", 0)]) / norm
            assert abs(np.vdot(got, [alpha, beta])) == pytest.approx(1.0, abs=1e-9)

    def test_odd_parity_fails(self, gates):
        assert classify_outcomes(gates["parity_check"], basis_input("01")) == {FAIL: pytest.approx(1.0)}


class TestDestructiveXor:
    @pytest.mark.parametrize("inp,expected", [("00", "0"), ("01", "1"), ("10", "1"), ("11", "0")])
    def test_truth_table(self, gates, inp, expected):
        tt = truth_table(gates["xor"])
        assert tt.truth_table[inp] == pytest.approx({expected: 1.0})
        assert tt.acceptance[inp] == pytest.approx(0.5, abs=1e-9)

    def test_x_correction(self, gates):
        ops = sorted(tuple(c.op for c in fix) for fix in gates["xor"].corrections.values())
        assert ops == [(), ("X",)]

    def test_coherence_preserved(self, gates):
        p, amps = conditional_output(gates["xor"], product_input([(S, S), (1, 0)]))
        assert p == pytest.approx(0.5, abs=1e-9)
        for record in by_record(amps).values():
            assert record["0"] == pytest.approx(record["1"], abs=1e-12)

    def test_control_consumed(self, gates):
        assert gates["xor"].consumes == (0,)


class TestEncoder:
    @pytest.mark.parametrize("value,expected", [("0", "00"), ("1", "11")])
    def test_copies_basis_value(self, gates, value, expected):
        tt = truth_table(gates["encoder"])
        assert tt.truth_table[value] == pytest.approx({expected: 1.0})
        assert tt.acceptance[value] == pytest.approx(0.5, abs=1e-9)

    def test_superposition_encoding(self, gates):
        p, amps = conditional_output(gates["encoder"], product_input([(0.6, 0.8)]))
        assert p == pytest.approx(0.5, abs=1e-9)
        for record in by_record(amps).values():
            norm = math.sqrt(sum(abs(a) ** 2 for a in record.values()))
            assert record.get("01", 0) == 0 and record.get("10", 0) == 0
            # equal up to a global phase per detector record
            assert abs(record["00"]) / norm == pytest.approx(0.6, abs=1e-12)
            assert record["11"] / record["00"] == pytest.approx(0.8 / 0.6, abs=1e-12)


class TestPbsCnot:
    @pytest.mark.parametrize("inp,expected", [("00", "00"), ("01", "01"), ("10", "11"), ("11", "10")])
    def test_truth_table(self, gates, inp, expected):
        tt = truth_table(gates["cnot"])
        assert tt.truth_table[inp] == pytest.approx({expected: 1.0}, abs=1e-9)
        assert tt.acceptance[inp] == pytest.approx(0.25, abs=1e-9)

    def test_random_product_inputs(self, gates, rng):
        for _ in range(5):
            qubits = [tuple(rng.standard_normal(2) + 1j * rng.standard_normal(2)) for _ in range(2)]
            assert simulate(gates["cnot"], product_input(qubits)).acceptance == pytest.approx(0.25, abs=1e-9)

    def test_entangles(self, gates):
        p, amps = conditional_output(gates["cnot"], product_input([(S, S), (1, 0)]))
        assert p == pytest.approx(0.25, abs=1e-9)
        for record in by_record(amps).values():
            assert set(record) == {"00", "11"}
            assert record["00"] == pytest.approx(record["11"], abs=1e-12)

    def test_four_patterns(self, gates):
        assert len(gates["cnot"].corrections) == 4

    def test_classify(self, gates):
        classes = classify_outcomes(gates["cnot"], basis_input("10"))
        assert classes[FAIL] == pytest.approx(0.75, abs=1e-9)
        kept = sum(p for c, p in classes.items() if c != FAIL)
        assert kept == pytest.approx(0.25, abs=1e-9)
        assert {c.tag for c in classes} == {"accept", "correctable", "fail"}

    def test_distinguishability_trend(self, gates):
        fids = [truth_table(gates["cnot"], v).truth_table_fidelity for v in OVERLAPS]
        assert all(a >= b - 1e-12 for a, b in zip(fids, fids[1:]))
        assert fids[0] == pytest.approx(1.0, abs=1e-9)
        assert fids[-1] < 1.0
        # with the interfering photon fully distinguishable the target bit is random
        assert fids == pytest.approx([1.0, 0.875, 0.75, 0.625, 0.5], abs=1e-9)


class TestCorrectionSearch:
    @pytest.mark.parametrize("name", list(GATE_BUILDERS))
    def test_fidelity_one_after_correction(self, gates, name):
        gate = gates[name]
        fids = pattern_fidelities(gate, gate.corrections)
        assert all(f == pytest.approx(1.0, abs=1e-9) for f in fids.values())
        assert truth_table(gate).process_fidelity == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("name", list(GATE_BUILDERS))
    def test_corrections_needed(self, gates, name):
        assert min(pattern_fidelities(gates[name]).values()) < 1 - 1e-6

    def test_identity_gate_has_empty_table(self):
        gate = identity_gate()
        assert gate.corrections == {}
        assert classify_outcomes(gate, basis_input("1")) == {ACCEPT: 1.0}

    def test_wrong_ideal_is_rejected(self):
        gate = build_destructive_xor()
        broken = GateDefinition(
            name="broken", mode_count=gate.mode_count, input_slots=gate.input_slots,
            output_slots=gate.output_slots, elements=gate.elements, detectors=gate.detectors,
            ideal=np.array([[1, 0, 0, 0], [0, 0, 0, 1]]),
        )
        with pytest.raises(NoValidCorrection):
            derive_correction_table(broken)

    def test_builders_derive_tables(self):
        for build in (build_parity_check, build_destructive_xor, build_encoder, build_pbs_cnot):
            assert build().corrections is not None


class TestClassification:
    @pytest.mark.parametrize("name", list(GATE_BUILDERS))
    def test_probabilities_sum_to_one(self, gates, name, rng):
        gate = gates[name]
        inputs = [basis_input(bits(i, gate.n_inputs)) for i in range(2 ** gate.n_inputs)]
        inputs.append(product_input(
            [tuple(rng.standard_normal(2) + 0j) for _ in range(gate.n_inputs)]))
        for state in inputs:
            assert sum(classify_outcomes(gate, state).values()) == pytest.approx(1.0, abs=1e-10)

    def test_layout_mismatch(self, gates):
        with pytest.raises(ValueError):
            classify_outcomes(gates["cnot"], make_basis_state([1, 0]))


class TestReports:
    def test_conditional_rows_normalized(self, gates):
        for v in OVERLAPS:
            tt = truth_table(gates["cnot"], v)
            for row in tt.truth_table.values():
                assert sum(row.values()) == pytest.approx(1.0, abs=1e-10)

    def test_overlap_range(self, gates):
        with pytest.raises(ValueError):
            truth_table(gates["xor"], 1.5)

    def test_to_dict(self, gates):
        d = truth_table(gates["cnot"]).to_dict()
        assert d["gate"] == "cnot" and len(d["rows"]) == 4
        assert set(d["rows"][0]) == {"input", "output", "conditional_probability",
                                     "acceptance_probability"}

    def test_unknown_gate(self):
        with pytest.raises(KeyError):
            get_gate("toffoli")

    def test_basis_input_layout(self):
        assert basis_input("10").amplitudes == {(0, 1, 1, 0): 1}
        with pytest.raises(ValueError):
            GateDefinition("bad", 2, (QubitSlot(1, 0),), (), (), (), np.ones((1, 2)))
