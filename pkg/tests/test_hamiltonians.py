"""Builtin Hamiltonians, energy moments, and the resource normalization."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from medqsl.errors import (
    BadDimensionError,
    LayoutMismatchError,
    NotHermitianError,
    StationaryStateError,
)
from medqsl.hamiltonians import (
    BUILTIN_PAIRS,
    Hamiltonian,
    builtin_pair,
    classical_mediator_example,
    cmi_product_example,
    commuting_mediated,
    direct_optimal,
    energy_moments,
    entangled_mediator_example,
    generalized_x,
    generalized_y,
    open_system_example,
    resource_equality_scale,
)
from medqsl.states import DensityState, SystemLayout

SQ2 = math.sqrt(2)


class TestDirectOptimal:
    def test_spectrum_d2(self):
        h = direct_optimal(2)
        assert_allclose(np.linalg.eigvalsh(h.matrix), [-1, -1, 1, 1], atol=1e-12)

    def test_spectrum_d3(self):
        w = np.linalg.eigvalsh(direct_optimal(3).matrix)
        expect = [-1, -1 / SQ2, -1 / SQ2, 0, 0, 0, 1 / SQ2, 1 / SQ2, 1]
        assert_allclose(w, expect, atol=1e-12)

    def test_action_on_00(self):
        h = direct_optimal(2)
        v = np.zeros(4)
        v[0] = 1.0
        out = h.matrix @ v
        expect = np.zeros(4, dtype=complex)
        expect[3] = 1j
        assert_allclose(out, expect, atol=1e-14)

    def test_trajectory_stays_in_two_dims(self):
        # exp(-iMT)|00> = cos T |00> + sin T sum_j |jj>/sqrt(d-1)
        d = 4
        h = direct_optimal(d)
        w, v = np.linalg.eigh(h.matrix)
        psi0 = np.zeros(d * d)
        psi0[0] = 1.0
        t = 0.9
        psi = v @ (np.exp(-1j * t * w) * (v.conj().T @ psi0))
        expect = np.zeros(d * d, dtype=complex)
        expect[0] = math.cos(t)
        for j in range(1, d):
            expect[j * d + j] = math.sin(t) / math.sqrt(d - 1)
        assert_allclose(psi, expect, atol=1e-12)

    def test_d1_rejected(self):
        with pytest.raises(BadDimensionError):
            direct_optimal(1)

    def test_custom_labels(self):
        h = direct_optimal(2, labels=("A", "C"))
        assert h.layout.labels == ("A", "C")


def test_generalized_paulis_reduce_to_qubit_ones():
    assert_allclose(generalized_x(2, 1), np.array([[0, 1], [1, 0]]), atol=0)
    assert_allclose(generalized_y(2, 1), np.array([[0, -1j], [1j, 0]]), atol=0)


class TestEnergyMoments:
    def test_direct_pair_is_unit(self):
        h = direct_optimal(2)
        v = np.zeros(4)
        v[0] = 1.0
        em = energy_moments(h, DensityState.from_pure(h.layout, v))
        assert_allclose([em.mean, em.std], [1.0, 1.0], atol=1e-12)

    def test_builtin_pairs_are_normalized(self):
        for name in BUILTIN_PAIRS:
            h, s = builtin_pair(name)
            em = energy_moments(h, s)
            assert abs(em.smaller - 1.0) < 1e-10, name

    def test_entangled_mediator_mean_is_sqrt2(self):
        h, s = entangled_mediator_example()
        em = energy_moments(h, s)
        assert_allclose(em.mean, SQ2, atol=1e-12)
        assert_allclose(em.std, 1.0, atol=1e-12)

    def test_mixed_state_path(self):
        h, s = classical_mediator_example()
        assert not s.is_pure
        em = energy_moments(h, s)
        assert_allclose([em.mean, em.std], [1.0, 1.0], atol=1e-12)

    def test_layout_mismatch(self):
        h = direct_optimal(2)
        other_lay = SystemLayout((("X", 2), ("Y", 2)))
        v = np.zeros(4)
        v[0] = 1.0
        with pytest.raises(LayoutMismatchError):
            energy_moments(h, DensityState.from_pure(other_lay, v))


class TestResourceEquality:
    def test_scale_factor(self):
        h = direct_optimal(2)
        v = np.zeros(4)
        v[0] = 1.0
        s = DensityState.from_pure(h.layout, v)
        scaled, k = resource_equality_scale(h.scaled(3.0), s)
        assert_allclose(k, 1 / 3, atol=1e-12)
        em = energy_moments(scaled, s)
        assert_allclose(em.smaller, 1.0, atol=1e-12)

    def test_stationary_rejected(self):
        h, _ = classical_mediator_example()
        v = np.zeros(8)
        v[0] = 1.0  # |000> is an eigenstate of the dephasing-style coupling
        s = DensityState.from_pure(h.layout, v)
        with pytest.raises(StationaryStateError):
            resource_equality_scale(h, s)


class TestBuiltinStructure:
    def test_cmi_product_matrix(self):
        h, s = cmi_product_example()
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        y = np.array([[0, -1j], [1j, 0]], dtype=complex)
        i2 = np.eye(2)
        expect = (np.kron(np.kron(x, i2), y) + np.kron(np.kron(i2, y), x)) / SQ2
        assert_allclose(h.matrix, expect, atol=1e-14)
        assert s.is_pure and s.pure_vector[0] == 1.0

    def test_entangled_mediator_state_is_ghz(self):
        _, s = entangled_mediator_example()
        v = s.pure_vector
        assert_allclose([v[0], v[7]], [1 / SQ2, 1 / SQ2], atol=1e-14)
        assert abs(v[1:7]).max() == 0.0

    def test_classical_state_properties(self):
        _, s = classical_mediator_example()
        w = np.linalg.eigvalsh(s.matrix)
        assert_allclose(sorted(w)[-2:], [0.5, 0.5], atol=1e-12)

    def test_open_system_single_coupling(self):
        h, _ = open_system_example()
        z = np.diag([1.0, -1.0]).astype(complex)
        i2 = np.eye(2)
        assert_allclose(h.matrix, np.kron(np.kron(z, i2), z), atol=1e-14)

    def test_unknown_builtin(self):
        with pytest.raises(KeyError):
            builtin_pair("no-such-system")


class TestCommutingMediated:
    def test_terms_commute(self):
        g = np.random.default_rng(3)
        def herm(n):
            m = g.normal(size=(n, n)) + 1j * g.normal(size=(n, n))
            return (m + m.conj().T) / 2
        ha, hb, hc = herm(2), herm(2), herm(3)
        h = commuting_mediated(ha, hb, hc)
        lay = h.layout
        from medqsl.states import embed_operator
        t1 = embed_operator(lay, ("A", "C"), np.kron(ha, hc))
        t2 = embed_operator(lay, ("B", "C"), np.kron(hb, hc))
        assert_allclose(t1 @ t2, t2 @ t1, atol=1e-10)
        assert_allclose(h.matrix, t1 + t2, atol=1e-12)

    def test_nonhermitian_factor_rejected(self):
        bad = np.array([[0, 1], [0, 0]], dtype=complex)
        with pytest.raises(NotHermitianError):
            commuting_mediated(bad, np.eye(2), np.eye(2))


def test_hamiltonian_matrix_read_only():
    h = direct_optimal(2)
    with pytest.raises(ValueError):
        h.matrix[0, 0] = 5.0
