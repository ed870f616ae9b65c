"""Grid transforms, interpolators and seeded random streams.

Grids are plain 2-D complex ``numpy`` arrays of shape ``(M, N)``: rows index
subcarriers (FT) or delay bins (DD), columns index OFDM symbols (FT) or
Doppler bins (DD).

All DFTs are unitary (``1/sqrt(K)`` on both directions), so the symplectic
pair preserves Frobenius energy and a single DD pulse of power ``P`` spreads
to ``P / (M N)`` on every FT bin.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline

_GRID_MAGIC = b"CGRD"
_GRID_HEADER = struct.Struct("<4sQQ")


# -- symplectic finite Fourier pair ---------------------------------------

def isfft(x_dd: np.ndarray) -> np.ndarray:
    """DD -> FT: ``F_M @ x_dd @ F_N^H`` with unitary DFT matrices."""
    return np.fft.ifft(np.fft.fft(x_dd, axis=0, norm="ortho"), axis=1, norm="ortho")


def sfft(y_ft: np.ndarray) -> np.ndarray:
    """FT -> DD: ``F_M^H @ y_ft @ F_N``, the exact inverse of :func:`isfft`."""
    return np.fft.fft(np.fft.ifft(y_ft, axis=0, norm="ortho"), axis=1, norm="ortho")


def dft_matrix(K: int) -> np.ndarray:
    """Unitary K-point DFT matrix with entries ``exp(-2j pi i k / K) / sqrt(K)``."""
    k = np.arange(K)
    return np.exp(-2j * np.pi * np.outer(k, k) / K) / np.sqrt(K)


def circular_convolve_2d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Plain 2-D circular convolution ``sum a[l', k'] b[l - l', k - k']``.

    With the unitary pair, ``sfft(isfft(a) * isfft(b)) == circular_convolve_2d(a, b) / sqrt(M N)``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"convolution operands must be equal 2-D shapes, got {a.shape} and {b.shape}")
    return np.fft.ifft2(np.fft.fft2(a) * np.fft.fft2(b))


# -- interpolation ----------------------------------------------------------

def _comb_step(pilot_idx: np.ndarray, target_len: int) -> int:
    if pilot_idx.ndim != 1 or pilot_idx.size < 1:
        raise ValueError("pilot indices must be a non-empty 1-D sequence")
    if pilot_idx.size == 1:
        step = target_len
    else:
        steps = np.diff(pilot_idx)
        step = int(steps[0])
        if step < 1 or np.any(steps != step):
            raise ValueError(f"pilot comb is not uniform: {pilot_idx.tolist()}")
    if step * pilot_idx.size != target_len:
        raise ValueError(
            f"comb of {pilot_idx.size} pilots with step {step} does not tile length {target_len}"
        )
    if not 0 <= pilot_idx[0] < step:
        raise ValueError(f"first pilot index {pilot_idx[0]} must lie in [0, {step})")
    return step


def dft_interpolate_columns(
    samples: np.ndarray, pilot_idx: Sequence[int], target_len: int
) -> np.ndarray:
    """Interpolate comb-sampled columns to ``target_len`` rows by DFT zero insertion.

    ``samples`` has the pilot axis first (shape ``(P,)`` or ``(P, K)``). The
    pilot comb must be uniform and tile ``target_len`` exactly. Interpolation
    is exact for sequences that are periodic over ``target_len`` and whose
    transform occupies less than half the comb's unambiguous span; the
    Nyquist bin of an even-length comb is split evenly between both edges.
    """
    pilot_idx = np.asarray(pilot_idx, dtype=int)
    step = _comb_step(pilot_idx, target_len)
    samples = np.asarray(samples, dtype=complex)
    P = pilot_idx.size
    if samples.shape[0] != P:
        raise ValueError(f"expected {P} pilot samples, got {samples.shape[0]}")

    spec = np.fft.fft(samples, axis=0)
    padded = np.zeros((target_len,) + samples.shape[1:], dtype=complex)
    if P % 2:
        half = (P + 1) // 2
        padded[:half] = spec[:half]
        if P > 1:
            padded[target_len - (P - half):] = spec[half:]
    else:
        half = P // 2
        padded[:half] = spec[:half]
        padded[half] += spec[half] / 2
        padded[target_len - half] += spec[half] / 2
        padded[target_len - half + 1:] = spec[half + 1:]
    out = np.fft.ifft(padded, axis=0) * step
    return np.roll(out, pilot_idx[0], axis=0)


def spline_interpolate_rows(
    samples: np.ndarray, pilot_idx: Sequence[int], target_len: int
) -> np.ndarray:
    """Natural cubic spline through pilot columns, along the last axis.

    Real and imaginary parts are splined separately; outside the outermost
    pilots the nearest pilot value is held.
    """
    x = np.asarray(pilot_idx, dtype=float)
    samples = np.asarray(samples, dtype=complex)
    if x.size < 2:
        raise ValueError("spline interpolation needs at least 2 pilot columns")
    if samples.shape[-1] != x.size:
        raise ValueError(f"expected {x.size} pilot samples along the last axis, got {samples.shape[-1]}")
    if np.any(np.diff(x) <= 0):
        raise ValueError("pilot columns must be strictly increasing")

    t = np.clip(np.arange(target_len, dtype=float), x[0], x[-1])
    re = CubicSpline(x, samples.real, axis=-1, bc_type="natural")(t)
    im = CubicSpline(x, samples.imag, axis=-1, bc_type="natural")(t)
    return re + 1j * im


# -- random streams ---------------------------------------------------------

def _key_int(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode())
    if part < 0:
        raise ValueError(f"stream key parts must be non-negative, got {part}")
    return int(part)


def random_source(seed: int, *stream: int | str) -> np.random.Generator:
    """Independent generator for ``(seed, *stream)``.

    Each stream label (e.g. ``"noise"``, a trial index) becomes part of the
    SeedSequence spawn key, so identical keys give bit-identical sequences and
    distinct keys are statistically independent.
    """
    seq = np.random.SeedSequence(entropy=seed, spawn_key=tuple(_key_int(p) for p in stream))
    return np.random.Generator(np.random.PCG64(seq))


def draw_complex_gaussian(
    rng: np.random.Generator, n: int | tuple[int, ...], variance: float
) -> np.ndarray:
    """Circularly-symmetric CN(0, variance) samples."""
    if variance < 0:
        raise ValueError(f"variance must be non-negative, got {variance}")
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z * np.sqrt(variance / 2)


# -- serialization ----------------------------------------------------------

def save_grid(path: str | Path, grid: np.ndarray) -> None:
    """Binary dump: 20-byte header (magic, rows, cols as little-endian u64) then re/im float64 pairs."""
    grid = np.asarray(grid, dtype=np.complex128)
    if grid.ndim != 2:
        raise ValueError(f"grid must be 2-D, got shape {grid.shape}")
    with open(path, "wb") as fh:
        fh.write(_GRID_HEADER.pack(_GRID_MAGIC, *grid.shape))
        fh.write(np.ascontiguousarray(grid).astype("<c16").tobytes())


def load_grid(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic, rows, cols = _GRID_HEADER.unpack(fh.read(_GRID_HEADER.size))
        if magic != _GRID_MAGIC:
            raise ValueError(f"{path} is not a grid dump")
        data = np.frombuffer(fh.read(), dtype="<c16")
    if data.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} samples, found {data.size}")
    return data.reshape(rows, cols).astype(np.complex128)


def save_power_csv(path: str | Path, grid: np.ndarray) -> None:
    """Write ``|grid|^2`` as CSV, one grid row per line."""
    np.savetxt(path, np.abs(np.asarray(grid)) ** 2, delimiter=",", fmt="%.17g")
