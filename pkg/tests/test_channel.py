import numpy as np
import pytest

from dualdomain.channel import (
    NoiseModel,
    PathParams,
    apply_channel,
    comm_channel_dd,
    comm_channel_ft,
    dirichlet_sum,
    draw_channels,
    draw_comm_paths,
    draw_sensing_paths,
    path_gain_comm,
    path_gain_sens,
    sensing_channel_ft,
    two_way_params,
)
from dualdomain.config import SystemConfig, UserScenario, UserSpec, reference_scenario
from dualdomain.numerics import random_source, sfft
from dualdomain.waveform import UserAllocation, allocate_users
from oracles import channel_per_bin

CFG = SystemConfig()


def test_path_gains_at_25m():
    assert 10 * np.log10(path_gain_comm(25.0, CFG)) == pytest.approx(-97.31, abs=0.01)
    assert 10 * np.log10(path_gain_sens(25.0, CFG)) == pytest.approx(-136.26, abs=0.01)


def test_path_gain_scaling_laws():
    assert path_gain_comm(10, CFG) / path_gain_comm(20, CFG) == pytest.approx(4)
    assert path_gain_sens(10, CFG) / path_gain_sens(20, CFG) == pytest.approx(16)
    assert path_gain_sens(10, CFG, rcs_m2=3) == pytest.approx(3 * path_gain_sens(10, CFG))


@pytest.mark.parametrize("R", [0.0, -2.0])
def test_non_positive_range_rejected(R):
    with pytest.raises(ValueError):
        path_gain_comm(R, CFG)
    with pytest.raises(ValueError):
        two_way_params(R, 1.0, 0.0, CFG)


def test_los_delay_and_doppler():
    (p,) = draw_comm_paths(UserSpec(range_m=15, velocity_ms=14), CFG, random_source(0))
    tau2, nu2 = two_way_params(15, 14, 0.0, CFG)
    assert tau2 * 1e9 == pytest.approx(100.069, abs=1e-3)
    assert nu2 == pytest.approx(6537.856, abs=1e-3)
    assert tau2 == pytest.approx(2 * p.tau) and nu2 == pytest.approx(2 * p.nu)


def test_extra_paths_are_later():
    paths = draw_comm_paths(UserSpec(range_m=15, num_paths=4), CFG, random_source(1))
    assert len(paths) == 4
    assert all(paths[0].tau < q.tau <= paths[0].tau + 400e-9 for q in paths[1:])


def test_steady_echo_magnitude():
    paths = draw_sensing_paths(reference_scenario(), CFG, random_source(2), fading=False)
    for p in paths:
        assert abs(p.alpha) ** 2 == pytest.approx(p.omega, rel=1e-12)


def test_faded_echo_mean_power():
    scen = UserScenario(users=(UserSpec(range_m=25),))
    powers = [abs(draw_sensing_paths(scen, CFG, random_source(s))[0].alpha) ** 2 for s in range(4000)]
    assert np.mean(powers) / path_gain_sens(25, CFG) == pytest.approx(1.0, rel=0.06)


def test_ft_channel_matches_per_bin_oracle():
    paths = [PathParams(0.7 - 0.2j, 101e-9, 6537.9, 1.0), PathParams(0.1j, 340e-9, -2000.0, 1.0)]
    block = UserAllocation(0, 37, 5, 12, 6)
    fast = comm_channel_ft(paths, CFG, block)
    slow = channel_per_bin(paths, range(37, 49), range(5, 11), CFG.delta_f, CFG.T)
    np.testing.assert_allclose(fast, slow, atol=1e-12)


def test_channel_magnitude_flat_for_single_path():
    p = PathParams(0.3 + 0.4j, 1e-7, 1234.0, 1.0)
    h = comm_channel_ft([p], SystemConfig(M=64, N=16))
    np.testing.assert_allclose(np.abs(h), 0.5, rtol=1e-12)


@pytest.mark.parametrize("tau_bins, nu_bins", [(3.0, 2.0), (2.37, -1.61), (0.0, 0.5)])
def test_dd_closed_form_matches_sfft(tau_bins, nu_bins):
    cfg = SystemConfig(M=64, N=16)
    T_s = 1 / (cfg.M * cfg.delta_f)
    paths = [
        PathParams(1.0 + 0.5j, tau_bins * T_s, nu_bins / (cfg.N * cfg.T), 1.0),
        PathParams(-0.2j, 5.5 * T_s, 3.2 / (cfg.N * cfg.T), 1.0),
    ]
    expected = sfft(comm_channel_ft(paths, cfg))
    assert np.max(np.abs(comm_channel_dd(paths, cfg) - expected)) < 1e-9


def test_dd_on_grid_is_single_tap():
    cfg = SystemConfig(M=32, N=8)
    T_s = 1 / (cfg.M * cfg.delta_f)
    h = comm_channel_dd([PathParams(2.0, 5 * T_s, 3 / (cfg.N * cfg.T), 1.0)], cfg)
    assert np.count_nonzero(np.abs(h) > 1e-9) == 1
    assert h[5 % 32, 3] == pytest.approx(2.0 * np.sqrt(cfg.M * cfg.N))


def test_dirichlet_removable_singularity():
    np.testing.assert_allclose(dirichlet_sum(np.array([0.0, 8.0, -16.0]), 8), 8)
    x = 1e-9
    assert abs(dirichlet_sum(np.array([x]), 8)[0] - 8) < 1e-6
    direct = np.sum(np.exp(2j * np.pi * np.arange(8) * 0.3 / 8))
    assert dirichlet_sum(np.array([0.3]), 8)[0] == pytest.approx(direct)


def test_off_grid_doppler_spreads_energy():
    cfg = SystemConfig(M=16, N=32)
    h = comm_channel_dd([PathParams(1.0, 0.0, 4.5 / (cfg.N * cfg.T), 1.0)], cfg)
    row = np.abs(h[0])
    assert np.count_nonzero(row > 1e-3 * row.max()) > 2
    # half-bin offset: the two neighbours hold equal peak energy
    assert row[4] == pytest.approx(row[5])


def test_dd_energy_matches_ft_energy():
    cfg = SystemConfig(M=16, N=32)
    paths = [PathParams(1.0, 2.3e-7, 4.5 / (cfg.N * cfg.T), 1.0)]
    assert np.sum(np.abs(comm_channel_dd(paths, cfg)) ** 2) == pytest.approx(
        np.sum(np.abs(comm_channel_ft(paths, cfg)) ** 2), rel=1e-10
    )


def test_sensing_channel_sums_echoes():
    cfg = SystemConfig(M=64, N=16)
    paths = draw_sensing_paths(reference_scenario(), cfg, random_source(3))
    h = sensing_channel_ft(paths, cfg)
    np.testing.assert_allclose(h, sum(comm_channel_ft([p], cfg) for p in paths), atol=1e-20)


def test_draw_channels_shapes_and_truth():
    cfg = SystemConfig(M=1024, N=64)
    rng = random_source(4)
    allocs = allocate_users(reference_scenario(), cfg, rng)
    real = draw_channels(reference_scenario(), allocs, cfg, rng)
    assert [h.shape for h in real.h_comm_ft] == [(240, 14)] * 3
    assert real.h_sens_ft.shape == (1024, 64)
    assert real.ground_truth == [(15.0, 14.0), (25.0, 25.0), (35.0, 30.0)]


def test_apply_channel_noise_power():
    h = np.ones((512, 256), complex)
    y = apply_channel(np.zeros_like(h), h, 2.4e-15, random_source(5))
    assert np.mean(np.abs(y) ** 2) / 2.4e-15 == pytest.approx(1.0, abs=0.02)


def test_apply_channel_noise_free_and_errors():
    x = np.arange(6.0).reshape(2, 3) + 0j
    h = np.full((2, 3), 2j)
    np.testing.assert_array_equal(apply_channel(x, h, 0.0), 2j * x)
    with pytest.raises(ValueError):
        apply_channel(x, h, 1.0)
    with pytest.raises(ValueError):
        apply_channel(x, h[:, :2], 0.0)


def test_noise_model():
    nm = NoiseModel.from_config(CFG)
    assert nm.P_n_comm == pytest.approx(2.4e-15, rel=0.03)
    with pytest.raises(ValueError):
        NoiseModel(-1.0, 0.0)
