import numpy as np
import pytest

from dualdomain.channel import PathParams, apply_channel, comm_channel_dd, sensing_channel_ft
from dualdomain.config import SystemConfig, resolutions
from dualdomain.numerics import isfft, random_source
from dualdomain.rx_sense import (
    SensingEstimate,
    associate,
    comm_power_dd,
    detect_peaks,
    estimate_params,
    gain_dd,
    rmse,
    rmse_from_squared,
    sensing_snr,
    squared_errors,
    to_dd,
    wrap_doppler,
)

CFG = SystemConfig(M=1024, N=128)
RES = resolutions(CFG)


def test_peaks_in_descending_order():
    grid = np.zeros((32, 16), complex)
    grid[3, 4], grid[20, 10], grid[9, 1] = 5, 3, 4
    assert detect_peaks(grid, 3) == [(3, 4), (9, 1), (20, 10)]


def test_sidelobe_inside_exclusion_is_skipped():
    grid = np.zeros((32, 16), complex)
    grid[10, 5], grid[11, 6], grid[25, 2] = 5, 4.5, 1
    assert detect_peaks(grid, 2) == [(10, 5), (25, 2)]
    assert detect_peaks(grid, 2, exclusion=(0, 0)) == [(10, 5), (11, 6)]


def test_exclusion_wraps_around_edges():
    grid = np.zeros((32, 16), complex)
    grid[0, 0], grid[31, 15], grid[16, 8] = 5, 4, 1
    assert detect_peaks(grid, 2) == [(0, 0), (16, 8)]


def test_ties_prefer_lower_indices():
    grid = np.ones((8, 8))
    assert detect_peaks(grid, 1) == [(0, 0)]


def test_peaks_exhausted():
    with pytest.raises(ValueError, match="unmasked"):
        detect_peaks(np.ones((5, 5)), 2, exclusion=(2, 2))
    with pytest.raises(ValueError):
        detect_peaks(np.ones((5, 5)), 0)


def test_wrap_doppler():
    np.testing.assert_array_equal(wrap_doppler(np.array([0, 63, 64, 127, -1, -64]), 128), [0, 63, -64, -1, -1, -64])


def test_estimate_worked_examples():
    est = estimate_params([(12, 64 - 3)], (0, 64), RES, CFG)
    assert est.range_hat[0] == pytest.approx(12 * RES.delta_R) and est.range_hat[0] == pytest.approx(14.638, abs=1e-3)
    assert est.velocity_hat[0] == pytest.approx(-5.6392, abs=1e-4)
    est = estimate_params([(1020, 64)], (1020, 64), RES, CFG)
    assert est.range_hat[0] == 0 and est.velocity_hat[0] == 0
    # delay offset taken modulo M
    est = estimate_params([(2, 64)], (1020, 64), RES, CFG)
    assert est.range_hat[0] == pytest.approx(6 * RES.delta_R)


def test_noise_free_on_grid_echo_is_recovered():
    cfg = SystemConfig(M=256, N=64)
    res = resolutions(cfg)
    truth = [(7, 5), (40, -9)]
    paths = [PathParams(1e-6, l * res.delta_tau, k * res.delta_nu, 1.0) for l, k in truth]
    pulse = np.zeros((cfg.M, cfg.N), complex)
    pulse[0, 32] = 1.0
    y = apply_channel(isfft(pulse), sensing_channel_ft(paths, cfg), 0.0)
    peaks = detect_peaks(to_dd(y), 2)
    assert sorted(peaks) == [(7, 37), (40, 23)]
    est = estimate_params(peaks, (0, 32), res, cfg)
    associate(est, [7 * res.delta_R, 40 * res.delta_R])
    r, v = est.for_truth()
    np.testing.assert_allclose(r, [7 * res.delta_R, 40 * res.delta_R])
    np.testing.assert_allclose(v, [5 * res.delta_V, -9 * res.delta_V])


def make_est(ranges, velocities):
    r = np.asarray(ranges, float)
    return SensingEstimate([], r * 0, r * 0, r, np.asarray(velocities, float))


def test_association_is_nearest_range():
    est = associate(make_est([35.2, 14.9, 24.1], [1, 2, 3]), [15, 25, 35])
    assert est.matched_truth == [1, 2, 0]
    r, v = est.for_truth()
    np.testing.assert_allclose(v, [2, 3, 1])
    with pytest.raises(ValueError):
        associate(make_est([1.0], [0.0]), [1.0, 2.0])
    with pytest.raises(ValueError):
        make_est([1.0], [0.0]).for_truth()


def test_squared_errors_and_rmse_form():
    sq_r, sq_v = squared_errors(make_est([15.5, 24.0], [10, 21]), [(15, 14), (25, 25)])
    np.testing.assert_allclose(sq_r, [0.25, 1.0])
    np.testing.assert_allclose(sq_v, [16, 16])
    # (1/U) sqrt(sum_u mean_t e^2)
    sq = np.array([[1.0, 4.0], [3.0, 0.0]])
    r, _ = rmse_from_squared(sq, sq)
    assert r == pytest.approx(np.sqrt(2.0 + 2.0) / 2)


def test_rmse_zero_for_exact_estimates():
    truth = [(15.0, 14.0), (25.0, 25.0)]
    m = rmse([make_est([25, 15], [25, 14]) for _ in range(3)], truth)
    assert m.rmse_range == 0 and m.rmse_velocity == 0


def test_sensing_snr_formula():
    assert sensing_snr(6.0, [0.1, 0.2], 2.0, 0.0) == pytest.approx(10 * np.log10(6 / 0.3))
    assert sensing_snr(1.0, [], 1.0, 0.0) == np.inf
    assert comm_power_dd(20e-3, 240, 14, 1024, 128) == pytest.approx(20e-3 * 3360 / 131072)


def test_sensing_snr_against_empirical():
    # echo energy gathered over the DD lattice against the per-bin noise power
    cfg = SystemConfig(M=128, N=32)
    rng = random_source(12)
    path = PathParams(3e-7 * np.exp(0.4j), 2.7e-8, 3100.0, 1.0)
    h_dd = comm_channel_dd([path], cfg)
    g = gain_dd(h_dd)
    p_s_dd, p_n = 1.0, 1e-13
    predicted = sensing_snr(p_s_dd, [], g, p_n)
    pulse = np.zeros((cfg.M, cfg.N), complex)
    pulse[0, 0] = np.sqrt(p_s_dd)
    h_ft = sensing_channel_ft([path], cfg)
    signal = to_dd(apply_channel(isfft(pulse), h_ft, 0.0))
    noisy = to_dd(apply_channel(isfft(pulse), h_ft, p_n, rng))
    measured = np.sum(np.abs(signal) ** 2) / np.mean(np.abs(noisy - signal) ** 2)
    assert abs(10 * np.log10(measured) - predicted) < 1.0
