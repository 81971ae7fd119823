import numpy as np
import pytest

import ddbounds as dd
from ddbounds.pauli_types import PAULI_TYPES


class TestPulse:
    def test_pauli_pulse(self, pauli_label):
        pulse = dd.pauli_pulse(pauli_label)
        assert np.array_equal(pulse.unitary, dd.pauli_string(pauli_label))
        assert dd.equal_up_to_phase(dd.expm_hermitian(pulse.area), pulse.unitary)
        assert pulse.label == pauli_label

    def test_identity_pulse(self):
        pulse = dd.pauli_pulse("II", width=0.1)
        assert np.array_equal(pulse.area, np.zeros((4, 4)))
        assert np.allclose(pulse.realized, np.eye(4))

    def test_finite_width_generator(self):
        pulse = dd.pauli_pulse("X", width=0.2)
        assert np.allclose(pulse.generator, (np.pi / 2) / 0.2 * PAULI_TYPES["X"]["matrix"])
        assert dd.equal_up_to_phase(pulse.realized, pulse.unitary)

    def test_ideal_generator(self):
        with pytest.raises(ValueError, match="Ideal pulse 'Z' has no finite generator"):
            dd.pauli_pulse("Z").generator

    def test_width_without_area(self):
        with pytest.raises(ValueError, match="has a finite width but no area"):
            dd.Pulse(PAULI_TYPES["X"]["matrix"], width=0.1, label="X")

    def test_area_mismatch(self):
        with pytest.raises(ValueError, match="does not realise its unitary"):
            dd.Pulse(PAULI_TYPES["X"]["matrix"], area=np.pi / 2 * PAULI_TYPES["Z"]["matrix"], label="X")

    def test_negative_width(self):
        with pytest.raises(ValueError, match="is negative"):
            dd.Pulse(np.eye(2), width=-0.1)


class TestSchedule:
    @pytest.fixture(scope="class")
    def schedule(self) -> dd.PulseSchedule:
        return dd.PulseSchedule.from_labels(["X", "Z", "X", "Z"], tau=0.1, delta=0.02)

    def test_times(self, schedule):
        assert schedule.N == 4
        assert schedule.cycle_time == pytest.approx(0.48)
        assert schedule.delta_total == pytest.approx(0.08)
        assert schedule.pulse_time(2) == pytest.approx(0.24)

    def test_width_mismatch(self):
        with pytest.raises(ValueError, match="schedule width is '0.01'"):
            dd.PulseSchedule((dd.pauli_pulse("X", 0.02),), tau=0.1, delta=0.01)

    def test_empty(self):
        with pytest.raises(ValueError, match="at least one pulse"):
            dd.PulseSchedule((), tau=0.1)

    def test_zero_duration(self):
        with pytest.raises(ValueError, match="positive duration"):
            dd.PulseSchedule.from_labels(["X", "X"], tau=0.0)

    def test_mixed_dimensions(self):
        with pytest.raises(dd.DimensionError, match="different dimensions"):
            dd.PulseSchedule.from_labels(["X", "XX"], tau=0.1)


class TestGroup:
    def test_cumulative_products(self, rng):
        unitaries = [dd.random_unitary(2, rng) for _ in range(3)]
        products = dd.cumulative_products(unitaries)
        assert np.allclose(products[0], unitaries[2] @ unitaries[1] @ unitaries[0])
        assert np.allclose(products[2], unitaries[2])

    @pytest.mark.parametrize("n_sys", [1, 2, 3])
    def test_universal_from_pulses(self, n_sys):
        derived = dd.group_from_pulses(dd.universal_pulses(n_sys))
        named = dd.named_group("universal", n_sys)
        assert np.array_equal(derived.elements[0], np.eye(2 ** n_sys))
        assert derived.order == 4
        assert all(any(dd.equal_up_to_phase(element, other) for other in named.elements)
                   for element in derived.elements)
        assert dd.is_group(derived)

    def test_registry(self):
        for name, entry in dd.GROUP_TYPES.items():
            derived = dd.group_from_pulses(entry["pulses"](2))
            assert derived.order == dd.named_group(name, 2).order

    def test_open_sequence(self):
        with pytest.raises(dd.GroupError, match="not the identity up to a phase"):
            dd.group_from_pulses([dd.pauli_pulse("X"), dd.pauli_pulse("Z")])

    def test_first_element(self):
        with pytest.raises(dd.GroupError, match="must be the identity"):
            dd.DecouplingGroup((PAULI_TYPES["X"]["matrix"], np.eye(2)))

    def test_unknown_name(self):
        with pytest.raises(dd.GroupError, match="'dihedral' is not a known group"):
            dd.named_group("dihedral", 1)

    def test_not_a_group(self):
        g = dd.DecouplingGroup((np.eye(2), dd.expm_hermitian(PAULI_TYPES["Z"]["matrix"], 0.3)))
        assert not dd.is_group(g)

    def test_embedding(self):
        g = dd.universal_group(1)
        embedded = g.embedded(8)
        assert np.array_equal(embedded[1], np.kron(PAULI_TYPES["X"]["matrix"], np.eye(4)))
        with pytest.raises(dd.DimensionError, match="not a multiple"):
            g.embedded(3)


class TestProjection:
    @pytest.mark.parametrize("axis", list(PAULI_TYPES))
    def test_single_qubit_paulis(self, axis):
        # Each group element either commutes with the Pauli or flips its sign
        entry = PAULI_TYPES[axis]
        sign = 1 + sum(-1 if other in entry["anticommutes"] else 1 for other in "XYZ")
        result = dd.project_group(dd.universal_group(1), entry["matrix"])
        assert np.allclose(result, sign * entry["matrix"])

    def test_with_bath(self, rng):
        bath = dd.random_hermitian(4, rng)
        h = np.kron(PAULI_TYPES["Y"]["matrix"], bath)
        assert np.allclose(dd.project_group(dd.universal_group(1), h), 0)

    def test_normalised_idempotent(self, rng):
        g = dd.universal_group(2)
        a = dd.random_hermitian(8, rng)
        once = dd.project_group_normalized(g, a)
        assert np.allclose(dd.project_group_normalized(g, once), once)

    def test_decoupling_condition(self, rng):
        coeffs = dd.random_coefficients(2, 0.2)
        h_err = dd.build_linear_sb(2, 1, coeffs, seed=1)
        check = dd.check_decoupling_condition(dd.universal_group(2), h_err)
        assert check.satisfied and check.residual < 1e-12

    def test_trivial_group_fails(self):
        h_err = dd.build_linear_sb(1, 1, {(1, "x"): "Z"})
        check = dd.check_decoupling_condition(dd.trivial_group(1, 3), h_err)
        assert not check.satisfied
        assert check.residual == pytest.approx(3.0)


class TestCommutation:
    def test_global_pulses_and_exchange(self):
        h_ctrl = dd.build_heisenberg_ctrl(2, {(1, 2): 1.0})
        areas = [pulse.area for pulse in dd.universal_pulses(2)]
        assert dd.check_commutation(areas, h_ctrl).satisfied

    def test_local_control(self):
        h_ctrl = dd.pauli_operator("z", 1, 2)
        check = dd.check_commutation([dd.pauli_pulse("XX").area], h_ctrl)
        assert not check.satisfied
        assert check.residual == pytest.approx(np.pi)

    def test_dimension_mismatch(self):
        with pytest.raises(dd.DimensionError, match="differs from control dimension"):
            dd.check_commutation([np.eye(2)], np.eye(4))
