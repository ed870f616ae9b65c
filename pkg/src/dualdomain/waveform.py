"""Transmit side: per-UE OFDM blocks in FT plus a sparse sensing pulse in DD."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import SystemConfig, UserScenario
from .numerics import draw_complex_gaussian, isfft

#: DMRS-like pilot OFDM symbols within each 14-symbol user block. The first and
#: last symbols are included so that the time-domain spline never extrapolates
#: across more than one symbol at high Doppler.
DEFAULT_PILOT_SYMBOLS: tuple[int, ...] = (0, 3, 6, 9, 13)
PILOT_COMB = 2

# Gray-coded 4-PAM per quadrature: bit pair index (b0 b1) -> amplitude level.
_PAM4_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])
_QAM16_SCALE = 1 / np.sqrt(10)


class AllocationError(ValueError):
    pass


@dataclass(frozen=True)
class UserAllocation:
    user_id: int
    m_offset: int
    n_offset: int
    m_size: int
    n_size: int

    @property
    def rows(self) -> slice:
        return slice(self.m_offset, self.m_offset + self.m_size)

    @property
    def cols(self) -> slice:
        return slice(self.n_offset, self.n_offset + self.n_size)

    def overlaps(self, other: "UserAllocation") -> bool:
        return (
            self.m_offset < other.m_offset + other.m_size
            and other.m_offset < self.m_offset + self.m_size
            and self.n_offset < other.n_offset + other.n_size
            and other.n_offset < self.n_offset + self.n_size
        )


@dataclass
class QamFrame:
    """One user's block content.

    ``symbols`` is the full ``(m_size, n_size)`` block of unit-power values,
    pilots included; ``bits`` are only the data bits, in row-major order of
    the non-pilot positions.
    """

    bits: np.ndarray
    symbols: np.ndarray
    pilot_mask: np.ndarray

    @property
    def pilot_values(self) -> np.ndarray:
        return self.symbols[self.pilot_mask]


@dataclass
class SensingPulseSet:
    positions: list[tuple[int, int]]
    amplitudes: np.ndarray
    P_s_dd: float
    grid: np.ndarray = field(repr=False)


# -- 16-QAM ------------------------------------------------------------------

def qam16_modulate(bits: np.ndarray) -> np.ndarray:
    """Gray-mapped 16-QAM with unit average power; 4 bits per symbol (I pair, then Q pair)."""
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1, 4)
    i = _PAM4_LEVELS[2 * bits[:, 0] + bits[:, 1]]
    q = _PAM4_LEVELS[2 * bits[:, 2] + bits[:, 3]]
    return (i + 1j * q) * _QAM16_SCALE


def _pam4_bits(x: np.ndarray) -> np.ndarray:
    # decision regions -> Gray pairs: (<-2) 00, [-2,0) 01, [0,2) 11, (>=2) 10
    b0 = (x >= 0).astype(np.uint8)
    b1 = (np.abs(x) < 2).astype(np.uint8)
    return np.stack([b0, b1], axis=-1)


def qam16_demodulate(symbols: np.ndarray) -> np.ndarray:
    """Minimum-distance hard decisions, inverse of :func:`qam16_modulate`."""
    s = np.asarray(symbols).ravel() / _QAM16_SCALE
    return np.concatenate([_pam4_bits(s.real), _pam4_bits(s.imag)], axis=-1).ravel()


def qam16_constellation() -> np.ndarray:
    words = (np.arange(16)[:, None] >> np.arange(3, -1, -1)) & 1
    return qam16_modulate(words)


# -- communication blocks ----------------------------------------------------

def pilot_mask(
    m_size: int, n_size: int, pilot_symbols: Sequence[int] = DEFAULT_PILOT_SYMBOLS
) -> np.ndarray:
    """Boolean block mask: even subcarriers of the pilot OFDM symbols."""
    mask = np.zeros((m_size, n_size), dtype=bool)
    cols = [n for n in pilot_symbols if 0 <= n < n_size]
    mask[::PILOT_COMB, cols] = True
    return mask


def allocate_users(
    scenario: UserScenario,
    config: SystemConfig,
    rng: np.random.Generator,
    max_attempts: int = 200,
) -> list[UserAllocation]:
    """Place every UE block uniformly at random without overlap.

    Users are placed in order; a user that cannot be placed after
    ``max_attempts`` draws restarts the whole placement, up to
    ``max_attempts`` restarts.
    """
    need = sum(u.M_cu * u.N_cu for u in scenario.users)
    if need > config.M * config.N:
        raise AllocationError(f"blocks need {need} bins, grid has {config.M * config.N}")
    for user in scenario.users:
        if user.M_cu > config.M or user.N_cu > config.N:
            raise AllocationError(f"block {user.M_cu}x{user.N_cu} larger than grid {config.M}x{config.N}")

    for _ in range(max_attempts):
        placed: list[UserAllocation] = []
        for uid, user in enumerate(scenario.users):
            for _ in range(max_attempts):
                cand = UserAllocation(
                    uid,
                    int(rng.integers(0, config.M - user.M_cu + 1)),
                    int(rng.integers(0, config.N - user.N_cu + 1)),
                    user.M_cu,
                    user.N_cu,
                )
                if not any(cand.overlaps(p) for p in placed):
                    placed.append(cand)
                    break
            else:
                break
        else:
            return placed
    raise AllocationError(f"could not place {scenario.U} disjoint blocks after {max_attempts} restarts")


def make_frame(
    alloc: UserAllocation,
    rng: np.random.Generator,
    pilot_symbols: Sequence[int] = DEFAULT_PILOT_SYMBOLS,
) -> QamFrame:
    """Random data bits on the data REs and random QPSK pilots on the DMRS REs."""
    mask = pilot_mask(alloc.m_size, alloc.n_size, pilot_symbols)
    n_data = int(np.count_nonzero(~mask))
    bits = rng.integers(0, 2, size=4 * n_data, dtype=np.uint8)
    symbols = np.empty(mask.shape, dtype=complex)
    symbols[~mask] = qam16_modulate(bits)
    qpsk = rng.integers(0, 2, size=(int(mask.sum()), 2))
    symbols[mask] = ((2 * qpsk[:, 0] - 1) + 1j * (2 * qpsk[:, 1] - 1)) / np.sqrt(2)
    return QamFrame(bits=bits, symbols=symbols, pilot_mask=mask)


def build_comm_grid(
    allocations: Sequence[UserAllocation],
    frames: Sequence[QamFrame],
    P_c_ft: float,
    shape: tuple[int, int],
) -> np.ndarray:
    grid = np.zeros(shape, dtype=complex)
    for alloc, frame in zip(allocations, frames, strict=True):
        grid[alloc.rows, alloc.cols] = np.sqrt(P_c_ft) * frame.symbols
    return grid


# -- sensing pulse -----------------------------------------------------------

def default_pulse_position(config: SystemConfig) -> tuple[int, int]:
    """Zero delay, mid-grid Doppler so negative Doppler shifts do not wrap."""
    return 0, config.N // 2


def build_sensing_dd(
    positions: Sequence[tuple[int, int]],
    config: SystemConfig,
    P_s_ft: float,
    rng: np.random.Generator | None = None,
) -> SensingPulseSet:
    """Sparse DD sensing grid whose ISFFT carries ``P_s_ft`` per FT bin.

    With ``I`` pulses each gets ``P_s_dd = P_s_ft * M * N / I``. Amplitudes are
    CN(0, 1) when ``rng`` is given, otherwise deterministic unit amplitude.
    """
    positions = [(int(l), int(k)) for l, k in positions]
    if not positions:
        raise ValueError("at least one sensing pulse is required")
    if len(set(positions)) != len(positions):
        raise ValueError(f"duplicate pulse coordinates in {positions}")
    for l, k in positions:
        if not (0 <= l < config.M and 0 <= k < config.N):
            raise ValueError(f"pulse ({l}, {k}) outside the {config.M}x{config.N} DD grid")

    I = len(positions)
    P_s_dd = P_s_ft * config.M * config.N / I
    if rng is None:
        amps = np.ones(I, dtype=complex)
    else:
        amps = draw_complex_gaussian(rng, I, 1.0)
    grid = np.zeros((config.M, config.N), dtype=complex)
    for (l, k), s in zip(positions, amps):
        grid[l, k] = np.sqrt(P_s_dd) * s
    return SensingPulseSet(positions=positions, amplitudes=amps, P_s_dd=P_s_dd, grid=grid)


def superimpose(x_c_ft: np.ndarray, x_s_dd: np.ndarray) -> np.ndarray:
    if x_c_ft.shape != x_s_dd.shape:
        raise ValueError(f"grid shapes differ: {x_c_ft.shape} vs {x_s_dd.shape}")
    return x_c_ft + isfft(x_s_dd)
