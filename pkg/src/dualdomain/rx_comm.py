"""UE receiver: LS pilot estimation, 2-D interpolation, one-tap equalization, BER."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .numerics import dft_interpolate_columns, spline_interpolate_rows
from .waveform import QamFrame, qam16_demodulate

ERASURE_THRESHOLD = 1e-12


@dataclass
class CommRxResult:
    ber: float
    bits_decided: np.ndarray
    snr_ft_db: float
    gain_ft: float
    n_errors: int = 0


def estimate_channel(
    y_block: np.ndarray, pilot_mask: np.ndarray, pilot_values: np.ndarray
) -> np.ndarray:
    """LS estimate on the pilots, DFT-interpolated along frequency then splined along time.

    ``pilot_values`` are the known transmitted pilot symbols in row-major
    order of ``pilot_mask`` (including any transmit amplitude scaling).
    """
    m_size, n_size = y_block.shape
    pilot_values = np.asarray(pilot_values)
    if np.any(pilot_values == 0):
        raise ValueError("pilot values must be non-zero")
    ref = np.zeros(y_block.shape, dtype=complex)
    ref[pilot_mask] = pilot_values

    pilot_cols = np.flatnonzero(pilot_mask.any(axis=0))
    if pilot_cols.size == 0:
        raise ValueError("pilot mask is empty")
    columns = np.empty((m_size, pilot_cols.size), dtype=complex)
    for j, col in enumerate(pilot_cols):
        rows = np.flatnonzero(pilot_mask[:, col])
        ls = y_block[rows, col] / ref[rows, col]
        columns[:, j] = dft_interpolate_columns(ls, rows, m_size)

    if pilot_cols.size == 1:
        return np.repeat(columns, n_size, axis=1)
    return spline_interpolate_rows(columns, pilot_cols, n_size)


def equalize_demap(
    y_block: np.ndarray,
    h_hat: np.ndarray,
    P_c: float,
    data_mask: np.ndarray,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Zero-forcing one-tap equalization and hard 16-QAM decisions on the data bins.

    Bins whose estimate is below ``ERASURE_THRESHOLD * max|h_hat|`` are
    erased and replaced with random bits.
    """
    y = y_block[data_mask]
    h = h_hat[data_mask]
    floor = ERASURE_THRESHOLD * np.max(np.abs(h_hat)) if h_hat.size else 0.0
    erased = np.abs(h) <= floor
    safe = np.where(erased, 1.0, h)
    bits = qam16_demodulate(y / (safe * np.sqrt(P_c))).reshape(-1, 4)
    if np.any(erased):
        if rng is None:
            rng = np.random.default_rng(0)
        bits[erased] = rng.integers(0, 2, size=(int(erased.sum()), 4), dtype=np.uint8)
    return bits.ravel()


def comm_metrics(h_ft_block: np.ndarray, p_c_ft: float, p_s_ft: float, p_n: float) -> tuple[float, float]:
    """Average channel gain over the block and the resulting FT SNR (linear).

    Sensing power crossing the same channel counts as noise.
    """
    if h_ft_block.size == 0:
        raise ValueError("empty channel block")
    gain = float(np.mean(np.abs(h_ft_block) ** 2))
    denom = p_s_ft * gain + p_n
    snr = np.inf if denom == 0 else p_c_ft * gain / denom
    return gain, snr


def ber(bits_tx: np.ndarray, bits_rx: np.ndarray) -> float:
    bits_tx = np.asarray(bits_tx)
    bits_rx = np.asarray(bits_rx)
    if bits_tx.shape != bits_rx.shape:
        raise ValueError(f"bit arrays differ in length: {bits_tx.shape} vs {bits_rx.shape}")
    if bits_tx.size == 0:
        return 0.0
    return float(np.count_nonzero(bits_tx != bits_rx)) / bits_tx.size


def awgn_ber_16qam(snr: np.ndarray | float) -> np.ndarray:
    """Uncoded Gray 16-QAM BER versus symbol SNR Es/N0 (linear)."""
    x = np.sqrt(np.asarray(snr, dtype=float) / 5)
    q = lambda z: 0.5 * erfc(z / np.sqrt(2))  # noqa: E731
    return 0.75 * q(x) + 0.5 * q(3 * x) - 0.25 * q(5 * x)


def receive_comm(
    y_block: np.ndarray,
    frame: QamFrame,
    P_c: float,
    P_s: float,
    P_n: float,
    h_true: np.ndarray,
    rng: np.random.Generator | None = None,
    perfect_csi: bool = False,
) -> CommRxResult:
    """Full per-UE chain on one received block."""
    if perfect_csi:
        h_hat = h_true
    else:
        h_hat = estimate_channel(y_block, frame.pilot_mask, np.sqrt(P_c) * frame.pilot_values)
    bits = equalize_demap(y_block, h_hat, P_c, ~frame.pilot_mask, rng)
    gain, snr = comm_metrics(h_true, P_c, P_s, P_n)
    errors = int(np.count_nonzero(bits != frame.bits))
    return CommRxResult(
        ber=errors / bits.size if bits.size else 0.0,
        bits_decided=bits,
        snr_ft_db=float(10 * np.log10(snr)) if snr > 0 else -np.inf,
        gain_ft=gain,
        n_errors=errors,
    )
