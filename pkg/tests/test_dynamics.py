"""Evolution, the open-system integrator, and the timing probes."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from medqsl.dynamics import (
    JumpOperatorSet,
    ObserveConfig,
    TimeGrid,
    entanglement_change_at_zero,
    evolve_lindblad,
    evolve_unitary,
    first_max_entanglement_time,
)
from medqsl.errors import BadDimensionError, LayoutMismatchError, PositivityLostError
from medqsl.hamiltonians import (
    classical_mediator_example,
    cmi_product_example,
    commuting_mediated,
    direct_optimal,
    entangled_mediator_example,
    open_system_example,
)
from medqsl.states import Bipartition, DensityState, SystemLayout


def ket(layout, index):
    v = np.zeros(layout.dim)
    v[index] = 1.0
    return DensityState.from_pure(layout, v)


class TestTimeGrid:
    def test_includes_endpoint_when_exact(self):
        g = TimeGrid(0.0, 1.0, 0.25)
        assert_allclose(g.times, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_truncates_otherwise(self):
        g = TimeGrid(0.0, 1.0, 0.3)
        assert_allclose(g.times, [0.0, 0.3, 0.6, 0.9])

    def test_rejects_empty_span(self):
        with pytest.raises(ValueError):
            TimeGrid(1.0, 1.0, 0.1)

    def test_rejects_negative_step(self):
        with pytest.raises(ValueError):
            TimeGrid(0.0, 1.0, -0.1)

    def test_rejects_huge_grid(self):
        with pytest.raises(ValueError):
            TimeGrid(0.0, 1.0, 1e-9)


class TestUnitaryEvolution:
    def test_direct_qubit_closed_form(self):
        h = direct_optimal(2)
        traj = evolve_unitary(h, ket(h.layout, 0), TimeGrid(0.0, math.pi / 2, 0.01))
        expect = 0.5 * np.sin(2 * traj.times)
        assert np.abs(traj.columns["negativity"] - expect).max() < 1e-10

    def test_bures_angle_equals_time_on_geodesic(self):
        # the optimal direct coupling moves along a Bures geodesic
        h = direct_optimal(3)
        traj = evolve_unitary(h, ket(h.layout, 0), TimeGrid(0.0, 0.9, 0.05))
        assert np.abs(traj.columns["bures_angle_from_initial"] - traj.times).max() < 1e-9

    def test_energy_columns_constant(self):
        h, s = cmi_product_example()
        traj = evolve_unitary(h, s, TimeGrid(0.0, 1.0, 0.1))
        assert np.ptp(traj.columns["mean_energy"]) < 1e-10
        assert np.ptp(traj.columns["energy_std"]) < 1e-10

    def test_mixed_initial_state(self):
        h, s = classical_mediator_example()
        traj = evolve_unitary(h, s, TimeGrid(0.0, math.pi / 4, math.pi / 16))
        expect = 0.5 * np.sin(2 * traj.times)
        assert np.abs(traj.columns["negativity"] - expect).max() < 1e-10

    def test_grid_start_offset(self):
        h = direct_optimal(2)
        traj = evolve_unitary(h, ket(h.layout, 0), TimeGrid(0.5, 1.0, 0.25))
        # s0 is the state at T=0.5; negativity at the first point is N(0)
        assert_allclose(traj.columns["negativity"][0], 0.0, atol=1e-12)
        assert_allclose(traj.columns["negativity"][1],
                        0.5 * math.sin(2 * 0.25), atol=1e-10)

    def test_layout_mismatch(self):
        h = direct_optimal(2)
        other = SystemLayout((("X", 2), ("Y", 2)))
        with pytest.raises(LayoutMismatchError):
            evolve_unitary(h, ket(other, 0), TimeGrid(0.0, 1.0, 0.1))

    def test_observe_custom_target(self):
        h = direct_optimal(2)
        from medqsl.states import maximally_entangled
        target = maximally_entangled(2, h.layout)
        obs = ObserveConfig(keep=("A", "B"), cut=Bipartition.parse("A:B"), target=target)
        traj = evolve_unitary(h, ket(h.layout, 0), TimeGrid(0.0, math.pi / 4, math.pi / 8),
                              observe=obs)
        assert_allclose(traj.columns["fidelity_to_target"][-1], 1.0, atol=1e-10)


class TestLindblad:
    def test_no_jumps_matches_unitary(self):
        h, s = cmi_product_example()
        grid = TimeGrid(0.0, 0.5, 0.05)
        jumps = JumpOperatorSet(h.layout, ())
        open_traj = evolve_lindblad(h, s, grid, jumps)
        closed_traj = evolve_unitary(h, s, grid)
        diff = np.abs(open_traj.columns["negativity"] - closed_traj.columns["negativity"])
        assert diff.max() < 1e-9

    def test_pure_dephasing_rate(self):
        # single qubit, H = 0: coherence decays exactly as exp(-2 gamma T)
        lay = SystemLayout((("A", 2), ("B", 2)))
        h = direct_optimal(2).scaled(0.0)
        plus = np.array([1, 1, 0, 0]) / math.sqrt(2)
        s = DensityState.from_pure(lay, plus)
        gamma = 0.25
        jumps = JumpOperatorSet.dephasing(lay, gamma, labels=("B",))
        traj = evolve_lindblad(h, s, TimeGrid(0.0, 2.0, 0.1), jumps)
        coherence = np.array([abs(st.matrix[0, 1]) for st in traj.states])
        expect = 0.5 * np.exp(-2 * gamma * traj.times)
        assert np.abs(coherence - expect).max() < 1e-9

    def test_damping_reaches_ground(self):
        lay = SystemLayout((("A", 2), ("B", 2)))
        h = direct_optimal(2).scaled(0.0)
        s = ket(lay, 3)  # |11>
        jumps = JumpOperatorSet.damping(lay, 1.0)
        traj = evolve_lindblad(h, s, TimeGrid(0.0, 12.0, 0.5), jumps)
        assert traj.states[-1].matrix[0, 0].real > 1 - 1e-4

    def test_trace_preserved(self):
        h, s = open_system_example()
        jumps = JumpOperatorSet.dephasing(h.layout, 0.3)
        traj = evolve_lindblad(h, s, TimeGrid(0.0, 1.0, 0.1), jumps)
        for st in traj.states:
            assert abs(np.trace(st.matrix).real - 1) < 1e-10

    def test_qudit_jump_rejected(self):
        lay = SystemLayout((("A", 3), ("B", 3)))
        with pytest.raises(BadDimensionError):
            JumpOperatorSet.dephasing(lay, 0.1)


class TestRateProbe:
    def test_direct_coupling_linear_rate(self):
        h = direct_optimal(2)
        dn = entanglement_change_at_zero(h, ket(h.layout, 0), Bipartition.parse("A:B"),
                                         delta=1e-4)
        # N = sin(2 delta)/2 ~ delta - (2/3) delta^3
        assert_allclose(dn, 1e-4, rtol=1e-6)

    def test_mediated_coupling_flat_at_zero(self):
        h, s = cmi_product_example()
        dn = entanglement_change_at_zero(h, s, Bipartition.parse("A:B"), delta=1e-4)
        assert abs(dn) < 1e-7

    def test_open_variant_never_positive_for_product_input(self):
        h, s = cmi_product_example()
        jumps = JumpOperatorSet.dephasing(h.layout, 0.1)
        dn = entanglement_change_at_zero(h, s, Bipartition.parse("A:B"),
                                         delta=1e-4, jumps=jumps)
        assert dn <= 1e-10

    def test_delta_range_enforced(self):
        h = direct_optimal(2)
        with pytest.raises(ValueError):
            entanglement_change_at_zero(h, ket(h.layout, 0),
                                        Bipartition.parse("A:B"), delta=0.5)


class TestFirstMaxTime:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_direct_optimal_times(self, d):
        h = direct_optimal(d)
        t = first_max_entanglement_time(h, ket(h.layout, 0),
                                        Bipartition.parse("A:B"), d, horizon=2.0)
        assert t is not None
        assert abs(t - math.acos(1 / math.sqrt(d))) < 1e-6

    def test_mediated_pair_needs_double_time(self):
        h, s = cmi_product_example()
        t = first_max_entanglement_time(h, s, Bipartition.parse("A:B"), 2, horizon=2.0)
        assert abs(t - math.pi / 2) < 1e-6

    def test_entangled_mediator_meets_direct_time(self):
        h, s = entangled_mediator_example()
        t = first_max_entanglement_time(h, s, Bipartition.parse("A:B"), 2, horizon=1.0)
        assert abs(t - math.pi / 4) < 1e-6

    def test_commuting_never_reaches(self):
        z = np.diag([1.0, -1.0]).astype(complex)
        h = commuting_mediated(z, z, z)
        lay = h.layout
        plusplus = np.ones(8) / math.sqrt(8)
        s = DensityState.from_pure(lay, plusplus)
        t = first_max_entanglement_time(h, s, Bipartition.parse("A:B"), 2, horizon=3.0)
        assert t is None

    def test_already_maximal_at_zero(self):
        from medqsl.states import maximally_entangled
        h = direct_optimal(2)
        s = maximally_entangled(2, h.layout)
        t = first_max_entanglement_time(h, s, Bipartition.parse("A:B"), 2, horizon=1.0)
        assert t is not None and t < 2e-3


def test_trajectory_csv_round_trip(tmp_path):
    h, s = cmi_product_example()
    traj = evolve_unitary(h, s, TimeGrid(0.0, 0.2, 0.1))
    out = tmp_path / "t.csv"
    traj.to_csv(out)
    lines = out.read_text().strip().split("\n")
    header = lines[0].split(",")
    assert header[0] == "T" and "negativity" in header
    assert len(lines) == 1 + len(traj.times)
    back = float(lines[-1].split(",")[1])
    assert_allclose(back, traj.columns["negativity"][-1], rtol=1e-15)
