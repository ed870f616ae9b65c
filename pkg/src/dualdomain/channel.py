"""Doubly-selective channels in the FT domain and their DD closed form.

The simulator never produces time samples: after cyclic-prefix removal the
channel acts as an element-wise product on the FT grid. The pulse-shaping
filter is taken as ideal Nyquist, i.e. ``G(m delta_f) = 1`` over the band,
so in the DD domain a delay shows up as a periodic sinc.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import SystemConfig, UserScenario, UserSpec
from .numerics import draw_complex_gaussian
from .waveform import UserAllocation

#: Upper bound on the excess delay of non-LoS communication paths.
MAX_EXCESS_DELAY = 400e-9


@dataclass(frozen=True)
class PathParams:
    alpha: complex
    tau: float
    nu: float
    omega: float


@dataclass(frozen=True)
class NoiseModel:
    P_n_comm: float
    P_n_sens: float

    def __post_init__(self):
        if self.P_n_comm < 0 or self.P_n_sens < 0:
            raise ValueError("noise powers must be non-negative")

    @classmethod
    def from_config(cls, config: SystemConfig) -> "NoiseModel":
        p_n = config.noise_power
        return cls(P_n_comm=p_n, P_n_sens=p_n)


@dataclass
class ChannelRealization:
    """One trial's channels.

    ``h_comm_ft[u]`` covers only user ``u``'s block; ``h_sens_ft`` is the full
    two-way LoS channel seen by the monostatic receiver.
    """

    h_comm_ft: list[np.ndarray]
    h_sens_ft: np.ndarray
    comm_paths: list[list[PathParams]]
    sens_paths: list[PathParams]
    ground_truth: list[tuple[float, float]]


# -- geometry and path loss --------------------------------------------------

def two_way_params(R: float, V: float, psi: float, config: SystemConfig) -> tuple[float, float]:
    """Round-trip delay and Doppler of a monostatic echo."""
    if not R > 0:
        raise ValueError(f"range must be positive, got {R}")
    return 2 * R / config.c, 2 * config.f_c / config.c * V * np.cos(psi)


def path_gain_comm(R: float, config: SystemConfig) -> float:
    """Free-space one-way power gain ``(lambda / (4 pi R))**2``."""
    if not R > 0:
        raise ValueError(f"range must be positive, got {R}")
    return (config.wavelength / (4 * np.pi * R)) ** 2


def path_gain_sens(R: float, config: SystemConfig, rcs_m2: float = 1.0) -> float:
    """Monostatic radar-equation gain ``lambda^2 sigma / ((4 pi)^3 R^4)``."""
    if not R > 0:
        raise ValueError(f"range must be positive, got {R}")
    return config.wavelength**2 * rcs_m2 / ((4 * np.pi) ** 3 * R**4)


def draw_comm_paths(user: UserSpec, config: SystemConfig, rng: np.random.Generator) -> list[PathParams]:
    """LoS path plus ``num_paths - 1`` scattered paths with random excess delay and arrival angle.

    Each path gain is CN(0, Omega) with Omega from free-space loss over the
    path length.
    """
    taus = [user.range_m / config.c]
    psis = [user.motion_angle_rad]
    if user.num_paths > 1:
        extra = user.num_paths - 1
        taus.extend(taus[0] + rng.uniform(0.0, MAX_EXCESS_DELAY, extra))
        psis.extend(rng.uniform(0.0, 2 * np.pi, extra))
    paths = []
    for tau, psi in zip(taus, psis):
        omega = path_gain_comm(tau * config.c, config)
        alpha = complex(draw_complex_gaussian(rng, 1, omega)[0])
        nu = config.f_c / config.c * user.velocity_ms * np.cos(psi)
        paths.append(PathParams(alpha=alpha, tau=float(tau), nu=float(nu), omega=omega))
    return paths


def draw_sensing_paths(
    scenario: UserScenario,
    config: SystemConfig,
    rng: np.random.Generator,
    fading: bool = True,
) -> list[PathParams]:
    """One LoS echo per UE.

    With ``fading`` the echo amplitude is CN(0, Omega); otherwise it has the
    deterministic magnitude ``sqrt(Omega)`` and a uniform random phase.
    """
    paths = []
    for user in scenario.users:
        tau, nu = two_way_params(user.range_m, user.velocity_ms, user.motion_angle_rad, config)
        omega = path_gain_sens(user.range_m, config, scenario.rcs_m2)
        if fading:
            alpha = complex(draw_complex_gaussian(rng, 1, omega)[0])
        else:
            alpha = np.sqrt(omega) * np.exp(2j * np.pi * rng.uniform())
        paths.append(PathParams(alpha=alpha, tau=tau, nu=nu, omega=omega))
    return paths


# -- FT and DD channel matrices ---------------------------------------------

def _ft_response(
    paths: Sequence[PathParams], m: np.ndarray, n: np.ndarray, config: SystemConfig
) -> np.ndarray:
    h = np.zeros((m.size, n.size), dtype=complex)
    for p in paths:
        freq = np.exp(-2j * np.pi * m * config.delta_f * p.tau)
        time = np.exp(2j * np.pi * p.nu * n * config.T)
        h += p.alpha * np.outer(freq, time)
    return h


def comm_channel_ft(
    paths: Sequence[PathParams],
    config: SystemConfig,
    block: UserAllocation | None = None,
) -> np.ndarray:
    """``H[m, n] = sum_q alpha_q exp(j 2 pi (nu_q n T - m delta_f tau_q))``.

    Evaluated on the absolute grid indices of ``block``, or on the full
    ``M x N`` grid when no block is given.
    """
    if block is None:
        m, n = np.arange(config.M), np.arange(config.N)
    else:
        m = np.arange(block.m_offset, block.m_offset + block.m_size)
        n = np.arange(block.n_offset, block.n_offset + block.n_size)
    return _ft_response(paths, m, n, config)


def dirichlet_sum(x: np.ndarray, K: int) -> np.ndarray:
    """``sum_{n<K} exp(j 2 pi n x / K)`` as ``sin(pi x)/sin(pi x/K) * exp(j pi x (K-1)/K)``.

    At ``x`` a multiple of ``K`` the removable singularity evaluates to ``K``.
    """
    x = np.asarray(x, dtype=float)
    den = np.sin(np.pi * x / K)
    singular = np.abs(den) < 1e-12
    safe = np.where(singular, 1.0, den)
    ratio = np.sin(np.pi * x) / safe
    out = ratio * np.exp(1j * np.pi * x * (K - 1) / K)
    return np.where(singular, K + 0j, out)


def comm_channel_dd(paths: Sequence[PathParams], config: SystemConfig) -> np.ndarray:
    """Closed-form DD channel: Dirichlet kernel in Doppler, periodic sinc in delay.

    Equals ``sfft(comm_channel_ft(paths, config))`` for the ideal Nyquist filter.
    """
    M, N = config.M, config.N
    T_s = 1.0 / (M * config.delta_f)
    ell = np.arange(M)
    k = np.arange(N)
    h = np.zeros((M, N), dtype=complex)
    for p in paths:
        doppler = dirichlet_sum(p.nu * N * config.T - k, N)
        delay = dirichlet_sum(ell - p.tau / T_s, M)
        h += p.alpha * np.outer(delay, doppler)
    return h / np.sqrt(M * N)


def sensing_channel_ft(paths: Sequence[PathParams], config: SystemConfig) -> np.ndarray:
    """Sum of the per-UE LoS echo responses over the full grid."""
    return _ft_response(paths, np.arange(config.M), np.arange(config.N), config)


def draw_channels(
    scenario: UserScenario,
    allocations: Sequence[UserAllocation],
    config: SystemConfig,
    rng: np.random.Generator,
    echo_fading: bool = True,
) -> ChannelRealization:
    comm_paths = [draw_comm_paths(user, config, rng) for user in scenario.users]
    sens_paths = draw_sensing_paths(scenario, config, rng, fading=echo_fading)
    return ChannelRealization(
        h_comm_ft=[comm_channel_ft(p, config, a) for p, a in zip(comm_paths, allocations, strict=True)],
        h_sens_ft=sensing_channel_ft(sens_paths, config),
        comm_paths=comm_paths,
        sens_paths=sens_paths,
        ground_truth=[(u.range_m, u.velocity_ms * np.cos(u.motion_angle_rad)) for u in scenario.users],
    )


def apply_channel(
    x_ft: np.ndarray, h_ft: np.ndarray, p_n: float, rng: np.random.Generator | None = None
) -> np.ndarray:
    """``Y = H * X + N`` with N i.i.d. CN(0, p_n) per bin."""
    if x_ft.shape != h_ft.shape:
        raise ValueError(f"grid shapes differ: {x_ft.shape} vs {h_ft.shape}")
    y = h_ft * x_ft
    if p_n > 0:
        if rng is None:
            raise ValueError("a random source is required when p_n > 0")
        y = y + draw_complex_gaussian(rng, y.shape, p_n)
    return y
