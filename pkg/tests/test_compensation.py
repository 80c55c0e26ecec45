import math
from dataclasses import replace

import numpy as np
import pytest

from pvlc.compensation import PostDistortionConfig, optimize_dcl, post_distort
from pvlc.device import ModuleSpec, PVCellParams, first_derivative, module_voltage
from pvlc.link import LEVELS, LinkConfig, ac_couple, run_link, symbol_statistics, train_slicer, training_sequence, tx_waveform
from pvlc.seeding import payload_bits, point_seed

PARAMS = PVCellParams(n=1.5, i0=1e-10, eta=2e-9, temperature=300.0)
MODULE = ModuleSpec(cell_count=1, params=PARAMS)


class TestPostDistort:
    def test_zero_waveform_fixed_point(self):
        cfg = PostDistortionConfig(operating_lux=350.0)
        out = post_distort(np.zeros(64), MODULE, cfg)
        assert np.allclose(out, 0.0, atol=1e-15)

    def test_perfect_inversion_recovers_shape(self):
        rng = np.random.default_rng(0)
        wiggle = rng.uniform(-100.0, 100.0, 512)
        wiggle -= wiggle.mean()
        lux = 350.0 + wiggle
        v_ac = ac_couple(module_voltage(lux, MODULE))
        cfg = PostDistortionConfig(operating_lux=350.0, gain_cap=math.inf)
        out = post_distort(v_ac, MODULE, cfg)
        target = wiggle * first_derivative(350.0, MODULE)
        scale = float(out @ target) / float(target @ target)
        assert np.allclose(out, scale * target, rtol=0, atol=1e-9 * np.max(np.abs(out)))

    def test_noiseless_pam4_gaps_equalized(self):
        config = LinkConfig(tx_dc_lux=350.0, mod_index=0.3, thermal_sigma_v=0.0,
                            shot_noise_enabled=False, seed=0)
        train = training_sequence(config)
        v = module_voltage(tx_waveform(LEVELS[train], config), MODULE)
        compensated = post_distort(ac_couple(v), MODULE,
                                   PostDistortionConfig(operating_lux=350.0, gain_cap=math.inf))
        stats = symbol_statistics(compensated, config.samples_per_symbol)
        centroids, _ = train_slicer(stats, train)
        gaps = np.diff(centroids)
        assert np.max(gaps) - np.min(gaps) <= 1e-6 * np.max(gaps)

    def test_requires_zero_mean(self):
        cfg = PostDistortionConfig(operating_lux=350.0)
        with pytest.raises(ValueError, match="AC-coupled"):
            post_distort(np.full(32, 0.01), MODULE, cfg)

    def test_gain_cap_bounds_noise_amplification(self):
        rng = np.random.default_rng(5)
        noise = rng.normal(0.0, 5e-3, 200_000)
        noise -= noise.mean()
        rms_in = float(np.sqrt(np.mean(noise**2)))
        amplification = []
        for cap in [1.0, 2.0, 4.0, 8.0, math.inf]:
            out = post_distort(noise, MODULE, PostDistortionConfig(350.0, cap))
            amplification.append(float(np.sqrt(np.mean(out**2))) / rms_in)
        assert all(b >= a * (1 - 1e-12) for a, b in zip(amplification, amplification[1:]))

    def test_invalid_config(self):
        with pytest.raises(ValueError):
            PostDistortionConfig(operating_lux=0.0)
        with pytest.raises(ValueError):
            PostDistortionConfig(operating_lux=100.0, gain_cap=0.5)


class TestOptimizeDcl:
    def test_single_point_grid(self):
        config = LinkConfig(seed=3, thermal_sigma_v=0.0, shot_noise_enabled=False)
        best, curve = optimize_dcl(config, MODULE, [200.0], payload=payload_bits(2000, 3))
        assert best == 200.0
        assert len(curve) == 1

    def test_noise_off_ties_break_low(self):
        config = LinkConfig(seed=3, thermal_sigma_v=0.0, shot_noise_enabled=False)
        best, curve = optimize_dcl(config, MODULE, [0.0, 100.0, 200.0], payload=payload_bits(2000, 3))
        assert [ber for _, ber in curve] == [0.0, 0.0, 0.0]
        assert best == 0.0

    def test_curve_matches_pointwise_run_link(self):
        config = LinkConfig(seed=17, thermal_sigma_v=2e-3)
        payload = payload_bits(10_000, 17)
        _, curve = optimize_dcl(config, MODULE, [0.0, 150.0], payload=payload)
        for dcl, ber in curve:
            point = replace(config, dcl_lux=dcl,
                            seed=point_seed(config.seed, config.tx_dc_lux, config.mod_index, dcl, 0))
            assert run_link(point, MODULE, payload).ber == ber

    def test_grid_validation(self):
        config = LinkConfig(seed=1)
        with pytest.raises(ValueError):
            optimize_dcl(config, MODULE, [])
        with pytest.raises(ValueError):
            optimize_dcl(config, MODULE, [100.0, 50.0])
