import math

import numpy as np
import pytest

from dvppsim import (BmrConfig, BmrGenerator, ParameterError, PrbsConfig,
                     PrbsGenerator, RandomStream, bmr_series, bmr_step,
                     prbs_initial, prbs_series, prbs_step, substream_seed)


class TestRandomStream:
    def test_splitmix64_reference_vector(self):
        # known first output of splitmix64 from state 0
        assert RandomStream(0).next_u64() == 0xE220A8397B1DCDAF

    def test_matches_independent_transcription(self):
        # straight transcription of the published splitmix64 update
        mask = (1 << 64) - 1
        state = 987654321

        def reference():
            nonlocal state
            state = (state + 0x9E3779B97F4A7C15) & mask
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
            return z ^ (z >> 31)

        s = RandomStream(987654321)
        assert [s.next_u64() for _ in range(100)] == [reference() for _ in range(100)]

    def test_scalar_vs_block_identity(self):
        a, b = RandomStream(1234), RandomStream(1234)
        scalar = [a.next_u64() for _ in range(64)]
        assert scalar == list(b.u64_block(64))
        a2, b2 = RandomStream(99), RandomStream(99)
        assert [a2.uniform() for _ in range(32)] == list(b2.uniform_block(32))
        a3, b3 = RandomStream(7), RandomStream(7)
        assert [a3.normal() for _ in range(16)] == list(b3.normal_block(16))

    def test_block_resumes_counter(self):
        a, b = RandomStream(5), RandomStream(5)
        a.u64_block(10)
        [b.next_u64() for _ in range(10)]
        assert a.next_u64() == b.next_u64()

    def test_uniform_range(self):
        s = RandomStream(42)
        u = s.uniform_block(10000)
        assert np.all(u >= 0.0) and np.all(u < 1.0)

    def test_normal_moments(self):
        z = RandomStream(11).normal_block(200000)
        assert abs(z.mean()) < 0.01
        assert abs(z.std() - 1.0) < 0.01

    def test_substreams_differ(self):
        seeds = {substream_seed(1, n, tag)
                 for n in ("1", "2", "3") for tag in ("load", "res")}
        assert len(seeds) == 6

    def test_substream_deterministic(self):
        assert substream_seed(77, "2", "load") == substream_seed(77, "2", "load")


class TestPrbs:
    def test_amplitudes(self):
        cfg = PrbsConfig(n_components=4, magnitude=0.002, switch_scale=1e4)
        assert cfg.amplitudes() == pytest.approx([0.002, 0.001, 0.0005, 0.002 / 6])

    def test_initial_single_component(self):
        cfg = PrbsConfig(n_components=1, magnitude=0.002, switch_scale=1e4)
        _, v0 = prbs_initial(cfg)
        assert v0 == pytest.approx(0.002)

    def test_flip_probabilities(self):
        cfg = PrbsConfig(n_components=3, magnitude=0.002, switch_scale=1e4)
        assert cfg.flip_probs() == pytest.approx([1e-4, 2e-4, 3e-4])

    def test_rejects_bad_probability(self):
        with pytest.raises(ParameterError):
            PrbsConfig(n_components=5, magnitude=0.002, switch_scale=4.0)

    def test_vanishing_probability_never_flips(self):
        cfg = PrbsConfig(n_components=2, magnitude=0.002, switch_scale=1e18)
        gen = PrbsGenerator(cfg, RandomStream(3))
        first = gen.sample()
        assert all(gen.sample() == first for _ in range(5000))

    def test_output_in_reachable_set(self):
        cfg = PrbsConfig(n_components=6, magnitude=0.002, switch_scale=100.0)
        amps = cfg.amplitudes()
        reachable = set()
        for mask in range(2 ** 6):
            v = 0.0
            for k in range(6):
                v += (1 if (mask >> k) & 1 else -1) * amps[k]
            reachable.add(v)
        gen = PrbsGenerator(cfg, RandomStream(17))
        for _ in range(20000):
            assert gen.sample() in reachable

    def test_series_matches_generator(self):
        cfg = PrbsConfig(n_components=8, magnitude=0.002, switch_scale=100.0)
        gen = PrbsGenerator(cfg, RandomStream(123))
        scalar = np.array([gen.sample() for _ in range(5000)])
        vector = prbs_series(cfg, RandomStream(123), 5000)
        assert np.array_equal(scalar, vector)

    def test_step_flips_with_probability(self):
        cfg = PrbsConfig(n_components=1, magnitude=1.0, switch_scale=2.5)
        rng = RandomStream(5)
        flips = 0
        signs = [1]
        for _ in range(20000):
            new, _ = prbs_step(signs, cfg, rng)
            flips += new[0] != signs[0]
            signs = new
        rate = flips / 20000
        assert rate == pytest.approx(0.4, abs=0.02)


class TestBmr:
    CFG = BmrConfig(sigma=0.005, threshold=0.02, decay=0.5, dt=5e-4)

    def test_zero_diffusion(self):
        cfg = BmrConfig(sigma=0.0, threshold=0.02, decay=0.5, dt=5e-4)
        assert bmr_step(0.0, cfg, RandomStream(1)) == (0.0, 0.0)

    def test_reset_branch_scales_output(self):
        # 0.03 exceeds the 0.02 threshold -> output halves, walk unchanged
        cfg = BmrConfig(sigma=0.0, threshold=0.02, decay=0.5, dt=5e-4)
        walk, out = bmr_step(0.03, cfg, RandomStream(1))
        assert out == pytest.approx(0.015)
        assert walk == pytest.approx(0.03)

    def test_below_threshold_passthrough(self):
        cfg = BmrConfig(sigma=0.0, threshold=0.02, decay=0.5, dt=5e-4)
        walk, out = bmr_step(0.01, cfg, RandomStream(1))
        assert out == 0.01 and walk == 0.01

    def test_reset_state_writes_back(self):
        cfg = BmrConfig(sigma=0.0, threshold=0.02, decay=0.5, dt=5e-4,
                        reset_state=True)
        walk, out = bmr_step(0.03, cfg, RandomStream(1))
        assert walk == out == pytest.approx(0.015)

    def test_generator_initial_value_is_zero(self):
        gen = BmrGenerator(self.CFG, RandomStream(9))
        assert gen.sample() == 0.0

    @pytest.mark.parametrize("reset_state", [False, True])
    def test_series_matches_generator(self, reset_state):
        cfg = BmrConfig(sigma=0.005, threshold=0.003, decay=0.5, dt=5e-4,
                        reset_state=reset_state)
        gen = BmrGenerator(cfg, RandomStream(31))
        scalar = np.array([gen.sample() for _ in range(4000)])
        vector = bmr_series(cfg, RandomStream(31), 4000)
        assert np.array_equal(scalar, vector)

    def test_same_seed_bit_identical(self):
        a = BmrGenerator(self.CFG, RandomStream(1000))
        b = BmrGenerator(self.CFG, RandomStream(1000))
        assert [a.sample() for _ in range(100)] == [b.sample() for _ in range(100)]

    def test_step_size_scaling(self):
        # one-step variance is sigma^2 * dt
        cfg = BmrConfig(sigma=0.4, threshold=1e9, decay=0.0, dt=0.25)
        rng = RandomStream(2)
        steps = np.array([bmr_step(0.0, cfg, rng)[1] for _ in range(100000)])
        assert steps.std() == pytest.approx(0.4 * 0.5, rel=0.02)
