import math

import numpy as np
import pytest

from dvppsim import (DapiState, DelayBuffer, NodeParams, ParameterError,
                     dapi_derivative, dapi_mismatch, final_setpoint,
                     local_setpoint)

DVPP = NodeParams.dvpp(H=0.01, bess_tau=0.1, bess_limit=0.02,
                       fcr_pmax=0.005, beta=1.0, alpha=1.0)
SG = NodeParams.sg(H=4.0, R_ibr=0.05, R_sg=0.05, T_g=2.0)


class TestLocalSetpoint:
    def test_pure_unmeasured(self):
        assert local_setpoint(0.0, 0.015, 0.0) == pytest.approx(0.015)

    def test_no_imbalance(self):
        assert local_setpoint(0.0, 0.0, 0.0) == 0.0

    def test_combined_terms(self):
        assert local_setpoint(0.01, 0.02, 0.005) == pytest.approx(0.015)


class TestDapiMismatch:
    def test_fully_served(self):
        u = local_setpoint(0.003, 0.01, 0.002)
        assert dapi_mismatch(0.003, 0.01, 0.002, u) == 0.0

    def test_saturated_shortfall(self):
        # required 0.02 against a battery pinned at 0.01
        assert dapi_mismatch(0.0, 0.02, 0.0, 0.01) == pytest.approx(0.01)

    def test_all_zero(self):
        assert dapi_mismatch(0.0, 0.0, 0.0, 0.0) == 0.0


class TestDapiDerivative:
    def test_quiescent(self):
        assert dapi_derivative("1", 0.0, 0.0, [], DVPP) == 0.0

    def test_pure_mismatch_no_neighbors(self):
        assert dapi_derivative("1", 0.01, 0.0, [], DVPP) == pytest.approx(-0.01)

    def test_consensus_term(self):
        out = dapi_derivative("1", 0.0, 0.2, [(0.1, 1.0, 1.0)], DVPP)
        assert out == pytest.approx(-0.1)

    def test_beta_scaling(self):
        params = NodeParams.dvpp(H=0.01, bess_tau=0.1, bess_limit=0.02,
                                 fcr_pmax=0.005, beta=2.0, alpha=1.0)
        out = dapi_derivative("2", 0.0, 0.2, [(0.3, 3.0, 1.0)], params)
        assert out == pytest.approx(-(0.2 / 2.0 - 0.3 / 3.0))

    def test_rejects_bad_beta(self):
        with pytest.raises(ParameterError):
            dapi_derivative("1", 0.0, 0.0, [(0.1, 0.0, 1.0)], DVPP)

    def test_rejects_sg(self):
        from dvppsim import NodeKindError
        with pytest.raises(NodeKindError):
            dapi_derivative("4", 0.0, 0.0, [], SG)


class TestFinalSetpoint:
    def test_reduces_to_local_without_correction(self):
        assert final_setpoint(0.0, 0.01, 0.02, 0.005) == \
            local_setpoint(0.01, 0.02, 0.005)

    def test_adds_correction(self):
        assert final_setpoint(0.005, 0.0, 0.015, 0.0) == pytest.approx(0.02)

    def test_all_zero(self):
        assert final_setpoint(0.0, 0.0, 0.0, 0.0) == 0.0


def test_consensus_antisymmetry_exact():
    # directed consensus addends over random undirected graphs cancel exactly
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 8))
        beta = rng.uniform(0.5, 3.0, size=n)
        u = rng.normal(scale=0.1, size=n)
        terms = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.6:
                    w = float(rng.uniform(0.1, 2.0))
                    terms.append(w * (u[i] / beta[i] - u[j] / beta[j]))
                    terms.append(w * (u[j] / beta[j] - u[i] / beta[i]))
        assert math.fsum(terms) == 0.0


class TestDelayBuffer:
    def test_exact_delay_on_ramp(self):
        buf = DelayBuffer(5)
        out = []
        for n in range(20):
            out.append(buf.read())
            buf.push(float(n))
        # first 5 reads hit the zero fill, then the ramp delayed by 5
        assert out[:5] == [0.0] * 5
        assert out[5:] == [float(n) for n in range(15)]

    def test_rejects_nonpositive_length(self):
        with pytest.raises(ParameterError):
            DelayBuffer(0)

    def test_dapi_state_sizing(self):
        st = DapiState.create(["1", "2"], comm_delay=0.5, dt=5e-4)
        assert st.delay_steps == 1000
        st0 = DapiState.create(["1"], comm_delay=0.0, dt=5e-4)
        assert st0.delay_steps == 0
        assert st0.delayed("1", live_value=3.3) == 3.3

    def test_dapi_state_roundtrip(self):
        st = DapiState.create(["a"], comm_delay=0.002, dt=1e-3)  # 2 steps
        seen = []
        for n in range(6):
            seen.append(st.delayed("a", live_value=-1.0))
            st.push("a", float(n))
        assert seen == [0.0, 0.0, 0.0, 1.0, 2.0, 3.0]
