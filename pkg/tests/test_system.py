import numpy as np
import pytest

from spindd import (CoherenceSpectrum, SpinSystem, coherence_decompose,
                    collective_rotation, single_spin_op, thermal_state, total_spin_op)
from spindd.system import apply_unitary, coherence_filter, coherence_orders, m_values

from conftest import random_state


def kron_chain(*mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


# independent one-spin matrices for cross-checks
UP = np.array([1.0, 0.0])
DOWN = np.array([0.0, 1.0])
EYE2 = np.eye(2)
IPLUS = np.array([[0.0, 1.0], [0.0, 0.0]])


class TestSingleSpinOp:
    def test_iz_single_spin(self):
        sys = SpinSystem.create(1)
        np.testing.assert_allclose(single_spin_op(sys, 0, "z").matrix,
                                   np.diag([0.5, -0.5]), atol=0)

    @pytest.mark.parametrize("slot", [0, 1, 2])
    def test_su2_commutator(self, slot):
        sys = SpinSystem.create(3)
        ix = single_spin_op(sys, slot, "x").matrix
        iy = single_spin_op(sys, slot, "y").matrix
        iz = single_spin_op(sys, slot, "z").matrix
        np.testing.assert_allclose(ix @ iy - iy @ ix, 1j * iz, atol=1e-14)

    def test_raising_on_all_down(self):
        # I+^1 maps |ddd> to |dud> with unit amplitude; checked against an
        # explicit 8x8 built from an independent kron chain.
        sys = SpinSystem.create(3)
        op = single_spin_op(sys, 1, "+").matrix
        expected = kron_chain(EYE2, IPLUS, EYE2)
        np.testing.assert_allclose(op, expected, atol=0)
        all_down = kron_chain(DOWN, DOWN, DOWN)
        target = kron_chain(DOWN, UP, DOWN)
        np.testing.assert_allclose(op @ all_down, target, atol=0)

    def test_distinct_spins_commute(self):
        sys = SpinSystem.create(3)
        for ax1 in ("x", "y", "z", "+", "-"):
            for ax2 in ("x", "y", "z", "+", "-"):
                a = single_spin_op(sys, 0, ax1).matrix
                b = single_spin_op(sys, 2, ax2).matrix
                np.testing.assert_array_equal(a @ b, b @ a)

    def test_index_out_of_range(self):
        sys = SpinSystem.create(2)
        with pytest.raises(IndexError):
            single_spin_op(sys, 2, "z")
        with pytest.raises(ValueError):
            single_spin_op(sys, 0, "w")


class TestSpinSystem:
    def test_validation(self):
        with pytest.raises(ValueError):
            SpinSystem(0, np.zeros(0), np.zeros((0, 0)))
        with pytest.raises(ValueError):
            SpinSystem(13, np.zeros(13), np.zeros((13, 13)))
        bad = np.zeros((2, 2))
        bad[0, 1] = 1.0  # not symmetric
        with pytest.raises(ValueError):
            SpinSystem(2, np.zeros(2), bad)
        with pytest.raises(ValueError):
            SpinSystem(2, np.zeros(2), np.eye(2))

    def test_random_is_symmetric_zero_diag(self):
        sys = SpinSystem.random(5, 100.0, seed=3)
        np.testing.assert_array_equal(sys.couplings, sys.couplings.T)
        np.testing.assert_array_equal(np.diag(sys.couplings), np.zeros(5))

    def test_m_values(self):
        m = m_values(2)
        np.testing.assert_allclose(m, [1.0, 0.0, 0.0, -1.0])


class TestThermalState:
    def test_single_spin(self):
        rho = thermal_state(SpinSystem.create(1))
        c = 1.0 / np.sqrt(2.0)
        np.testing.assert_allclose(rho.matrix, np.diag([c, -c]), atol=1e-15)

    def test_two_spins_diagonal(self):
        sys = SpinSystem.create(2)
        rho = thermal_state(sys)
        iz = (single_spin_op(sys, 0, "z").matrix + single_spin_op(sys, 1, "z").matrix)
        np.testing.assert_allclose(rho.matrix, iz / np.linalg.norm(iz), atol=1e-15)
        assert np.all(rho.matrix[~np.eye(4, dtype=bool)] == 0)

    def test_all_weight_at_zero_order(self, sys4):
        spec = coherence_decompose(sys4, thermal_state(sys4))
        assert spec[0] == pytest.approx(1.0, abs=1e-12)
        assert spec.total() == pytest.approx(1.0, abs=1e-12)


class TestCoherenceDecompose:
    def test_transverse_splits_plus_minus_one(self):
        sys = SpinSystem.create(2)
        spec = coherence_decompose(sys, single_spin_op(sys, 0, "x").matrix)
        assert spec[1] == pytest.approx(spec[-1])
        assert spec[1] + spec[-1] == pytest.approx(spec.total(), rel=1e-12)

    def test_double_raising_pure_plus_two(self):
        sys = SpinSystem.create(2)
        op = single_spin_op(sys, 0, "+").matrix @ single_spin_op(sys, 1, "+").matrix
        spec = coherence_decompose(sys, op)
        assert spec[2] == pytest.approx(spec.total())

    def test_weights_sum_to_norm(self, sys4):
        rho = random_state(sys4, seed=5)
        spec = coherence_decompose(sys4, rho)
        assert spec.total() == pytest.approx(np.linalg.norm(rho) ** 2, rel=1e-12)
        assert all(n in range(-4, 5) for n in spec.orders)

    def test_block_phase_under_z_rotation(self, sys4):
        # exp(-i phi Iz) rho_n exp(+i phi Iz) = exp(-i n phi) rho_n
        rho = random_state(sys4, seed=6)
        phi = 0.7342
        z = np.diag(np.exp(-1j * phi * m_values(4)))
        for n in (-3, -1, 0, 2, 4):
            block = coherence_filter(sys4, rho, n)
            rotated = z @ block @ z.conj().T
            np.testing.assert_allclose(rotated, np.exp(-1j * n * phi) * block, atol=1e-14)

    def test_decompose_idempotent_on_block(self, sys4):
        rho = random_state(sys4, seed=7)
        block = coherence_filter(sys4, rho, 2)
        spec = coherence_decompose(sys4, block)
        assert spec[2] == pytest.approx(spec.total(), rel=1e-12)

    def test_dimension_mismatch(self, sys4):
        with pytest.raises(ValueError):
            coherence_decompose(sys4, np.eye(8))

    def test_spectrum_helpers(self):
        spec = CoherenceSpectrum({0: 0.5, 2: 0.25, -2: 0.25})
        assert spec.weight([2, -2]) == pytest.approx(0.5)
        assert spec[3] == 0.0


class TestCollectiveRotation:
    def test_full_turn_is_identity_up_to_phase(self, sys2):
        u = collective_rotation(sys2, 2 * np.pi, 0.3).matrix
        phase = u[0, 0] / abs(u[0, 0])
        np.testing.assert_allclose(u, phase * np.eye(4), atol=1e-12)

    def test_pi_flip_inverts_thermal(self, sys4):
        rho = thermal_state(sys4)
        u = collective_rotation(sys4, np.pi, 0.0)
        out = apply_unitary(u, rho)
        np.testing.assert_allclose(out.matrix, -rho.matrix, atol=1e-12)

    def test_y_half_turn_maps_z_to_x(self, sys4):
        # pins the rotation sign convention shared by all modules
        rho = thermal_state(sys4)
        u = collective_rotation(sys4, np.pi / 2.0, np.pi / 2.0)
        out = apply_unitary(u, rho)
        ix = total_spin_op(sys4, "x").matrix
        np.testing.assert_allclose(out.matrix, ix / np.linalg.norm(ix), atol=1e-12)

    def test_unitary_and_norm_preserving(self, sys4):
        u = collective_rotation(sys4, 1.234, 2.345).matrix
        np.testing.assert_allclose(u @ u.conj().T, np.eye(16), atol=1e-12)
        rho = random_state(sys4, seed=8)
        out = u @ rho @ u.conj().T
        assert np.linalg.norm(out) == pytest.approx(np.linalg.norm(rho), rel=1e-12)


def test_coherence_orders_matrix():
    orders = coherence_orders(2)
    assert orders[0, 3] == 2 and orders[3, 0] == -2
    assert orders[1, 2] == 0
