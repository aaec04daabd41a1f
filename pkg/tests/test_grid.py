import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dvppsim import (GridTopology, NodeKind, NodeParams, NodeState,
                     ParameterError, net_tie_line_injection, tie_line_flow)


def four_bus():
    return GridTopology.build(
        node_ids=("1", "2", "3", "4"),
        electrical_edges=(("1", "2", 0.1), ("2", "3", 0.1),
                          ("3", "1", 0.1), ("3", "4", 0.02)),
        comm_edges=(("1", "2", 1.0), ("2", "3", 1.0)),
        comm_delay=0.5,
    )


class TestTieLineFlow:
    def test_zero_angle_difference(self):
        assert tie_line_flow(0.0, 0.0, 0.1) == 0.0

    def test_quarter_turn(self):
        assert tie_line_flow(math.pi / 2, 0.0, 0.1) == pytest.approx(10.0)

    def test_small_angle(self):
        assert tie_line_flow(0.01, 0.0, 0.1) == pytest.approx(0.0999983333, rel=1e-9)

    @pytest.mark.parametrize("bad", [0.0, -0.1])
    def test_nonpositive_reactance(self, bad):
        with pytest.raises(ParameterError):
            tie_line_flow(0.0, 0.0, bad)

    def test_nonfinite_input(self):
        with pytest.raises(ParameterError):
            tie_line_flow(float("nan"), 0.0, 0.1)

    @given(st.floats(-10, 10), st.floats(-10, 10),
           st.floats(0.01, 10).filter(lambda x: x > 0))
    @settings(max_examples=200)
    def test_antisymmetric_exactly(self, ti, tj, x):
        assert tie_line_flow(ti, tj, x) == -tie_line_flow(tj, ti, x)

    @given(st.floats(-3, 3), st.floats(-3, 3))
    @settings(max_examples=100)
    def test_periodic(self, ti, tj):
        base = tie_line_flow(ti, tj, 0.1)
        shifted = tie_line_flow(ti + 2 * math.pi, tj, 0.1)
        assert shifted == pytest.approx(base, abs=1e-12)


class TestNetInjection:
    def test_synchronized_network(self):
        topo = four_bus()
        assert all(net_tie_line_injection(n, [0.3] * 4, topo) == 0.0
                   for n in topo.node_ids)

    def test_two_node_antisymmetry(self):
        topo = GridTopology.build(("a", "b"), (("a", "b", 0.1),))
        fa = net_tie_line_injection("a", [0.01, 0.0], topo)
        fb = net_tie_line_injection("b", [0.01, 0.0], topo)
        assert fa == pytest.approx(0.0999983333, rel=1e-9)
        assert fb == -fa

    def test_four_bus_single_phase(self):
        topo = four_bus()
        # node 1 connects over edges (1,2) and (3,1), both X = 0.1
        expected = 2 * math.sin(0.001) / 0.1
        got = net_tie_line_injection("1", [0.001, 0.0, 0.0, 0.0], topo)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(0.02, rel=1e-4)

    def test_unknown_node(self):
        with pytest.raises(LookupError):
            net_tie_line_injection("zzz", [0.0] * 4, four_bus())

    def test_lossless_sum(self):
        topo = four_bus()
        rng = np.random.default_rng(7)
        for _ in range(50):
            theta = rng.uniform(-0.5, 0.5, size=4)
            total = sum(net_tie_line_injection(n, theta, topo)
                        for n in topo.node_ids)
            assert abs(total) <= 1e-12


class TestTopology:
    def test_symmetric_lookup(self):
        topo = four_bus()
        assert topo.reactance("1", "3") == topo.reactance("3", "1") == 0.1

    def test_rejects_negative_reactance(self):
        with pytest.raises(ParameterError, match="reactance must be positive"):
            GridTopology.build(("a", "b"), (("a", "b", -0.1),))

    def test_rejects_self_loop(self):
        with pytest.raises(ParameterError, match="self-loop"):
            GridTopology.build(("a", "b"), (("a", "a", 0.1),))

    def test_rejects_undeclared_endpoint(self):
        with pytest.raises(ParameterError, match="undeclared"):
            GridTopology.build(("a", "b"), (("a", "c", 0.1),))

    def test_rejects_duplicate_edge_any_orientation(self):
        with pytest.raises(ParameterError, match="duplicate"):
            GridTopology.build(("a", "b"),
                               (("a", "b", 0.1), ("b", "a", 0.2)))

    def test_comm_neighbors(self):
        topo = four_bus()
        assert topo.comm_neighbors("2") == [("1", 1.0), ("3", 1.0)]
        assert topo.comm_neighbors("4") == []


class TestNodeParams:
    def test_dvpp_helper_symmetric_limits(self):
        p = NodeParams.dvpp(H=0.01, bess_tau=0.1, bess_limit=0.02,
                            fcr_pmax=0.005, beta=1.0)
        assert p.bess_min == -0.02 and p.bess_max == 0.02
        assert p.kind is NodeKind.DVPP

    def test_rejects_nonpositive_inertia(self):
        with pytest.raises(ParameterError):
            NodeParams.sg(H=0.0, R_ibr=0.05, R_sg=0.05, T_g=2.0)

    def test_rejects_bad_limits(self):
        with pytest.raises(ParameterError, match="straddle"):
            NodeParams(kind=NodeKind.DVPP, H=0.01, bess_tau=0.1, bess_min=0.01,
                       bess_max=0.02, fcr_pmax=0.0, beta=1.0, alpha=1.0)

    def test_missing_sg_fields(self):
        with pytest.raises(ParameterError, match="missing"):
            NodeParams(kind=NodeKind.SG, H=4.0)


def test_node_state_starts_at_zero():
    st_ = NodeState()
    assert (st_.theta, st_.omega, st_.bess_power, st_.dapi_integral,
            st_.p_mech) == (0.0, 0.0, 0.0, 0.0, 0.0)
    assert st_.est_state is None
