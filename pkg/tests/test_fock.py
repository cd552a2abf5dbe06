import math

import pytest
from hypothesis import given, strategies as st

from loqc.fock import (
    FockState,
    PhotonCapExceeded,
    QubitSlot,
    encode_qubit,
    inner_product,
    logical_distribution,
    make_basis_state,
    make_bell_ancilla,
    superpose,
    tensor,
    vacuum,
)
from oracles import all_occupations

Q0, Q1 = QubitSlot(0, 1), QubitSlot(2, 3)

amplitude = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def random_state(rng, modes=2, photons=1):
    """Random normalized state over all occupations with a fixed photon number."""
    occs = list(all_occupations(modes, photons))
    amps = rng.standard_normal(len(occs)) + 1j * rng.standard_normal(len(occs))
    return superpose(zip(occs, amps))


class TestBasisStates:
    def test_single_mode_occupation(self):
        s = make_basis_state([1, 0])
        assert s.amplitudes == {(1, 0): 1}
        assert s.norm_squared() == 1.0

    def test_empty_vector_is_zero_mode_vacuum(self):
        s = make_basis_state([])
        assert s.mode_count == 0
        assert s.amplitude(()) == 1

    def test_multi_photon_norm_exact(self):
        assert make_basis_state([2, 1]).norm_squared() == 1.0

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            make_basis_state([1, -1])

    def test_cap_fails_loudly(self):
        with pytest.raises(PhotonCapExceeded):
            make_basis_state([5, 4])
        assert make_basis_state([5, 4], photon_cap=9).photon_numbers() == {9}

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            FockState(3, {(1, 0): 1.0})

    def test_tiny_amplitudes_pruned(self):
        s = FockState(2, {(1, 0): 1.0, (0, 1): 1e-15})
        assert (0, 1) not in s.amplitudes

    def test_amplitudes_are_read_only(self):
        s = make_basis_state([1])
        with pytest.raises(TypeError):
            s.amplitudes[(1,)] = 0.5


class TestSuperpose:
    def test_equal_weights(self):
        s = superpose([((1, 0), 1), ((0, 1), 1)])
        assert s.amplitude((1, 0)) == pytest.approx(1 / math.sqrt(2))
        assert s.amplitude((0, 1)) == pytest.approx(1 / math.sqrt(2))

    def test_cancellation_is_an_error(self):
        with pytest.raises(ValueError):
            superpose([((1, 0), 1), ((1, 0), -1)])

    def test_squares_give_probabilities(self):
        s = superpose([((1, 0), 0.6), ((0, 1), 0.8)])
        assert abs(s.amplitude((1, 0))) ** 2 == pytest.approx(0.36, abs=1e-12)
        assert abs(s.amplitude((0, 1))) ** 2 == pytest.approx(0.64, abs=1e-12)

    def test_duplicates_summed(self):
        s = superpose([((1, 0), 1), ((1, 0), 1), ((0, 1), 2)])
        assert s.amplitude((1, 0)) == pytest.approx(s.amplitude((0, 1)))

    def test_empty_term_list(self):
        with pytest.raises(ValueError):
            superpose([])

    @given(st.lists(amplitude, min_size=3, max_size=3))
    def test_normalized(self, amps):
        if sum(abs(a) for a in amps) < 1e-6:
            return
        s = superpose(zip([(1, 0), (0, 1), (1, 1)], amps))
        assert s.norm_squared() == pytest.approx(1.0, abs=1e-12)
        assert inner_product(s, s) == pytest.approx(1.0, abs=1e-12)


class TestTensorAndInner:
    def test_basis_tensor(self):
        assert tensor(make_basis_state([1]), make_basis_state([0])).amplitudes == {(1, 0): 1}

    def test_superposition_tensor(self):
        plus = superpose([((0,), 1), ((1,), 1)])
        s = tensor(plus, make_basis_state([1]))
        assert set(s.amplitudes) == {(0, 1), (1, 1)}
        assert s.amplitude((1, 1)) == pytest.approx(1 / math.sqrt(2))

    def test_orthogonal_basis(self):
        assert inner_product(make_basis_state([1, 0]), make_basis_state([1, 0])) == 1
        assert inner_product(make_basis_state([1, 0]), make_basis_state([0, 1])) == 0

    def test_mode_mismatch(self):
        with pytest.raises(ValueError):
            inner_product(make_basis_state([1]), make_basis_state([1, 0]))

    def test_conjugate_linear_in_first_argument(self):
        a = superpose([((1, 0), 1j), ((0, 1), 1)])
        b = make_basis_state([1, 0])
        assert inner_product(a, b) == pytest.approx(-1j / math.sqrt(2))
        assert inner_product(b, a) == pytest.approx(1j / math.sqrt(2))

    def test_factorization(self, rng):
        for _ in range(20):
            a, b, c, d = (random_state(rng, 2, 1) for _ in range(4))
            lhs = inner_product(tensor(a, b), tensor(c, d))
            assert lhs == pytest.approx(inner_product(a, c) * inner_product(b, d), abs=1e-12)

    def test_norm_multiplies(self, rng):
        a = random_state(rng, 2, 2).scaled(0.7)
        b = random_state(rng, 2, 1).scaled(1.3)
        assert tensor(a, b).norm() == pytest.approx(a.norm() * b.norm(), abs=1e-12)

    def test_tensor_cap_checked(self):
        with pytest.raises(PhotonCapExceeded):
            tensor(make_basis_state([4], photon_cap=4), make_basis_state([1], photon_cap=4))


class TestQubitEncoding:
    def test_logical_zero_is_h_photon(self):
        assert encode_qubit(1, 0, Q0, 2).amplitudes == {(1, 0): 1}

    def test_logical_one_is_v_photon(self):
        assert encode_qubit(0, 1, Q0, 2).amplitudes == {(0, 1): 1}

    def test_complex_superposition_distribution(self):
        s = encode_qubit(1 / math.sqrt(2), 1j / math.sqrt(2), Q0, 2)
        dist = logical_distribution(s, [Q0])
        assert dist["0"] == pytest.approx(0.5, abs=1e-12)
        assert dist["1"] == pytest.approx(0.5, abs=1e-12)

    def test_degenerate_amplitudes(self):
        with pytest.raises(ValueError):
            encode_qubit(0, 0, Q0, 2)

    def test_vacuum_elsewhere(self):
        s = encode_qubit(1, 0, Q1, 4)
        assert s.amplitudes == {(0, 0, 1, 0): 1}

    def test_slot_validation(self):
        with pytest.raises(ValueError):
            QubitSlot(1, 1)
        with pytest.raises(ValueError):
            encode_qubit(1, 0, QubitSlot(2, 3), 3)

    @given(amplitude, amplitude)
    def test_round_trip(self, alpha, beta):
        if abs(alpha) ** 2 + abs(beta) ** 2 < 1e-8:
            return
        dist = logical_distribution(encode_qubit(alpha, beta, Q0, 2), [Q0])
        total = abs(alpha) ** 2 + abs(beta) ** 2
        assert dist.get("0", 0.0) == pytest.approx(abs(alpha) ** 2 / total, abs=1e-12)
        assert dist.get("1", 0.0) == pytest.approx(abs(beta) ** 2 / total, abs=1e-12)


class TestBellAncilla:
    def test_joint_distribution(self):
        dist = logical_distribution(make_bell_ancilla(Q0, Q1, 4), [Q0, Q1])
        assert dist == pytest.approx({"00": 0.5, "11": 0.5}, abs=1e-12)

    def test_marginals_undefined(self):
        bell = make_bell_ancilla(Q0, Q1, 4)
        for slot in (Q0, Q1):
            assert logical_distribution(bell, [slot]) == pytest.approx({"0": 0.5, "1": 0.5})

    def test_two_photons_per_term(self):
        bell = make_bell_ancilla(Q0, Q1, 4)
        assert bell.photon_numbers() == {2}
        assert bell.norm_squared() == pytest.approx(1.0, abs=1e-12)

    def test_overlapping_slots(self):
        with pytest.raises(ValueError):
            make_bell_ancilla(Q0, QubitSlot(1, 2), 4)


class TestStateArithmetic:
    def test_addition_keeps_layout(self):
        s = make_basis_state([1, 0]) + make_basis_state([0, 1])
        assert s.norm_squared() == pytest.approx(2.0)

    def test_zero_norm_cannot_normalize(self):
        with pytest.raises(ValueError):
            vacuum(2).with_amplitudes({}).normalized()

    def test_repr_lists_terms(self):
        assert "|1,0>" in repr(make_basis_state([1, 0]))
        assert "empty" in repr(vacuum(1).with_amplitudes({}))

    def test_bins_must_divide_modes(self):
        with pytest.raises(ValueError):
            FockState(5, {(0,) * 5: 1}, modes_per_bin=2)
        assert FockState(4, {(0,) * 4: 1}, modes_per_bin=2).bins == 2
