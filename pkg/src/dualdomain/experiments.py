"""Monte Carlo trials and beta x (M, N) sweeps.

Every random draw of a trial comes from a stream keyed by
``(seed, M, N, trial_index, label)``. The power-split exponent beta is not
part of the key: all beta points of a trial share data, channels and noise
(common random numbers), which is what makes the BER/RMSE curves smooth in
beta at moderate trial counts. A point is still reproducible on its own from
``(seed, beta, case, trial_index)``.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .channel import ChannelRealization, NoiseModel, apply_channel, draw_channels
from .config import SystemConfig, UserScenario, power_split, resolutions, validate
from .numerics import draw_complex_gaussian, isfft, random_source
from .rx_comm import receive_comm
from .rx_sense import (
    DEFAULT_EXCLUSION,
    associate,
    comm_power_dd,
    detect_peaks,
    estimate_params,
    gain_dd,
    rmse_from_squared,
    sensing_snr,
    squared_errors,
    to_dd,
)
from .waveform import (
    DEFAULT_PILOT_SYMBOLS,
    QamFrame,
    UserAllocation,
    allocate_users,
    build_comm_grid,
    build_sensing_dd,
    default_pulse_position,
    make_frame,
    superimpose,
)

log = logging.getLogger(__name__)

CSV_HEADER = (
    "beta", "M", "N", "mean_ber", "rmse_range_m", "rmse_velocity_ms",
    "mean_snr_ft_db", "mean_snr_dd_db", "trials",
)


@dataclass(frozen=True)
class TrialOptions:
    """Knobs that are not part of the physical configuration.

    ``communication=False`` transmits the sensing pulse alone (UEs remain
    radar targets). ``noise`` overrides the thermal noise model, e.g.
    ``NoiseModel(0, 0)`` for noise-free runs.
    """

    pulse_amplitude: str = "gaussian"  # or "unit"
    echo_fading: bool = True
    exclusion: tuple[int, int] = DEFAULT_EXCLUSION
    pilot_symbols: tuple[int, ...] = DEFAULT_PILOT_SYMBOLS
    perfect_csi: bool = False
    communication: bool = True
    pulse_position: tuple[int, int] | None = None
    noise: NoiseModel | None = None


#: Non-fluctuating radar targets: echo magnitude fixed at sqrt(Omega) with a
#: random phase, and a unit-amplitude pulse. With Rayleigh echoes a single deep
#: fade in a hundred trials puts a noise or sidelobe peak in place of the
#: weakest UE, and the range RMSE never settles on the grid floor.
STEADY_TARGETS = TrialOptions(pulse_amplitude="unit", echo_fading=False)


@dataclass
class TrialResult:
    beta: float
    M: int
    N: int
    trial_index: int
    ber: np.ndarray
    sq_range_err: np.ndarray
    sq_velocity_err: np.ndarray
    snr_ft_db: np.ndarray
    snr_dd_db: float
    peaks: list[tuple[int, int]]
    range_hat: np.ndarray
    velocity_hat: np.ndarray


@dataclass
class TrialContext:
    """Everything in a trial that does not depend on the power split.

    Sensing-side grids are stored per unit power: ``dd_comm`` and ``dd_pulse``
    are the DD images of the echoed communication grid (P_c = 1) and of the
    echoed pulse (P_s^FT = 1); ``dd_noise`` is the DD image of the sensing
    receiver noise at its actual power.
    """

    config: SystemConfig
    scenario: UserScenario
    options: TrialOptions
    trial_index: int
    allocations: list[UserAllocation]
    frames: list[QamFrame]
    channels: ChannelRealization
    noise: NoiseModel
    pulse_origin: tuple[int, int]
    pulse_amplitude: complex
    comm_noise: list[np.ndarray]
    sens_noise: np.ndarray
    pulse_ft_unit: np.ndarray = field(repr=False)
    dd_comm: np.ndarray = field(repr=False)
    dd_pulse: np.ndarray = field(repr=False)
    dd_noise: np.ndarray = field(repr=False)
    gain_dd: float = 0.0
    erasure_seed: int = 0


def _stream(seed: int, config: SystemConfig, trial_index: int, label: str) -> np.random.Generator:
    return random_source(seed, "trial", config.M, config.N, trial_index, label)


def prepare_trial(
    config: SystemConfig,
    scenario: UserScenario,
    trial_index: int = 0,
    options: TrialOptions = TrialOptions(),
    seed: int | None = None,
) -> TrialContext:
    """Allocate, draw data/channels/noise and precompute the beta-independent grids."""
    validate(config, scenario)
    seed = config.rng_seed if seed is None else seed
    shape = (config.M, config.N)

    if options.communication:
        allocations = allocate_users(scenario, config, _stream(seed, config, trial_index, "placement"))
        data_rng = _stream(seed, config, trial_index, "data")
        frames = [make_frame(a, data_rng, options.pilot_symbols) for a in allocations]
    else:
        allocations, frames = [], []
    # comm channels are drawn for every UE so the sensing draws are unaffected by the comm load
    chan_rng = _stream(seed, config, trial_index, "channel")
    placeholder = allocations or [
        UserAllocation(u, 0, 0, min(s.M_cu, config.M), min(s.N_cu, config.N))
        for u, s in enumerate(scenario.users)
    ]
    channels = draw_channels(scenario, placeholder, config, chan_rng, echo_fading=options.echo_fading)
    if not options.communication:
        channels.h_comm_ft = []

    origin = options.pulse_position or default_pulse_position(config)
    pulse_rng = _stream(seed, config, trial_index, "pulse") if options.pulse_amplitude == "gaussian" else None
    unit_pulse = build_sensing_dd([origin], config, 1.0, rng=pulse_rng)

    noise = options.noise or NoiseModel.from_config(config)
    noise_rng = _stream(seed, config, trial_index, "noise")
    sens_noise = draw_complex_gaussian(noise_rng, shape, noise.P_n_sens)
    comm_noise = [draw_complex_gaussian(noise_rng, (a.m_size, a.n_size), noise.P_n_comm) for a in allocations]

    h_s = channels.h_sens_ft
    pulse_ft = isfft(unit_pulse.grid)
    x_c_unit = build_comm_grid(allocations, frames, 1.0, shape)
    return TrialContext(
        config=config,
        scenario=scenario,
        options=options,
        trial_index=trial_index,
        allocations=allocations,
        frames=frames,
        channels=channels,
        noise=noise,
        pulse_origin=origin,
        pulse_amplitude=complex(unit_pulse.amplitudes[0]),
        comm_noise=comm_noise,
        sens_noise=sens_noise,
        pulse_ft_unit=pulse_ft,
        dd_comm=to_dd(h_s * x_c_unit),
        dd_pulse=to_dd(h_s * pulse_ft),
        dd_noise=to_dd(sens_noise),
        gain_dd=gain_dd(to_dd(h_s)),
        erasure_seed=int(_stream(seed, config, trial_index, "erasure").integers(2**63)),
    )


def transmit_grid(ctx: TrialContext, beta: float) -> np.ndarray:
    """Superimposed FT transmit grid for a given power split."""
    p_c, p_s = power_split(beta, ctx.config)
    shape = (ctx.config.M, ctx.config.N)
    x_c = build_comm_grid(ctx.allocations, ctx.frames, p_c, shape)
    pulse = build_sensing_dd([ctx.pulse_origin], ctx.config, p_s)
    return superimpose(x_c, pulse.grid * ctx.pulse_amplitude)


def received_sensing_dd(ctx: TrialContext, beta: float) -> np.ndarray:
    """DD grid at the sensing receiver, assembled from the unit-power images."""
    p_c, p_s = power_split(beta, ctx.config)
    return np.sqrt(p_c) * ctx.dd_comm + np.sqrt(p_s) * ctx.dd_pulse + ctx.dd_noise


def received_sensing_dd_direct(ctx: TrialContext, beta: float) -> np.ndarray:
    """Same grid as :func:`received_sensing_dd`, through superimpose -> channel -> SFFT."""
    y_ft = apply_channel(transmit_grid(ctx, beta), ctx.channels.h_sens_ft, 0.0) + ctx.sens_noise
    return to_dd(y_ft)


def evaluate_trial(ctx: TrialContext, beta: float) -> TrialResult:
    config, scenario = ctx.config, ctx.scenario
    p_c, p_s = power_split(beta, config)
    res = resolutions(config)

    bers, snr_ft = [], []
    erasure_rng = np.random.default_rng(ctx.erasure_seed)
    for alloc, frame, h, n in zip(ctx.allocations, ctx.frames, ctx.channels.h_comm_ft, ctx.comm_noise):
        s_block = np.sqrt(p_s) * ctx.pulse_amplitude * ctx.pulse_ft_unit[alloc.rows, alloc.cols]
        x_block = np.sqrt(p_c) * frame.symbols + s_block
        y_block = h * x_block + n
        rx = receive_comm(
            y_block, frame, p_c, p_s, ctx.noise.P_n_comm, h,
            rng=erasure_rng, perfect_csi=ctx.options.perfect_csi,
        )
        bers.append(rx.ber)
        snr_ft.append(rx.snr_ft_db)

    y_dd = received_sensing_dd(ctx, beta)
    peaks = detect_peaks(y_dd, scenario.U, ctx.options.exclusion)
    est = associate(estimate_params(peaks, ctx.pulse_origin, res, config), [u.range_m for u in scenario.users])
    sq_r, sq_v = squared_errors(est, ctx.channels.ground_truth)
    r_hat, v_hat = est.for_truth()

    p_s_dd = p_s * config.M * config.N * abs(ctx.pulse_amplitude) ** 2
    p_c_dd = [comm_power_dd(p_c, a.m_size, a.n_size, config.M, config.N) for a in ctx.allocations]
    return TrialResult(
        beta=beta,
        M=config.M,
        N=config.N,
        trial_index=ctx.trial_index,
        ber=np.asarray(bers, dtype=float),
        sq_range_err=sq_r,
        sq_velocity_err=sq_v,
        snr_ft_db=np.asarray(snr_ft, dtype=float),
        snr_dd_db=sensing_snr(p_s_dd, p_c_dd, ctx.gain_dd, ctx.noise.P_n_sens),
        peaks=peaks,
        range_hat=r_hat,
        velocity_hat=v_hat,
    )


def run_trial(
    config: SystemConfig,
    scenario: UserScenario,
    beta: float,
    trial_index: int = 0,
    options: TrialOptions = TrialOptions(),
    seed: int | None = None,
) -> TrialResult:
    """One full transmit/channel/receive realization at power split ``10**beta``."""
    return evaluate_trial(prepare_trial(config, scenario, trial_index, options, seed), beta)


# -- sweeps -----------------------------------------------------------------

def default_beta_grid(points: int = 12, beta_min: float = -5e-3, beta_max: float = -1e-4) -> list[float]:
    """Logarithmically spaced negative exponents, most negative first."""
    if not beta_min < beta_max < 0:
        raise ValueError(f"need beta_min < beta_max < 0, got {beta_min}, {beta_max}")
    mags = np.geomspace(-beta_min, -beta_max, points)
    return [float(-m) for m in mags]


@dataclass
class SweepSpec:
    beta_grid: Sequence[float]
    cases: Sequence[tuple[int, int]] = ((1024, 64),)
    trials_per_point: int = 100
    scenario: UserScenario = field(default_factory=UserScenario)
    config: SystemConfig = field(default_factory=SystemConfig)
    options: TrialOptions = TrialOptions()
    output_path: str | Path | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if any(not b < 0 for b in self.beta_grid):
            raise ValueError("all beta values must be strictly negative")


@dataclass
class SweepPoint:
    beta: float
    M: int
    N: int
    mean_ber: float
    rmse_range_m: float
    rmse_velocity_ms: float
    mean_snr_ft_db: float
    mean_snr_dd_db: float
    trials: int
    trial_ber: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    failures: list[str] = field(default_factory=list)

    def row(self) -> tuple:
        return tuple(getattr(self, name) for name in CSV_HEADER)


@dataclass
class SweepResult:
    points: list[SweepPoint]

    def curve(self, M: int, N: int) -> list[SweepPoint]:
        return sorted((p for p in self.points if (p.M, p.N) == (M, N)), key=lambda p: p.beta)

    @property
    def cases(self) -> list[tuple[int, int]]:
        return list(dict.fromkeys((p.M, p.N) for p in self.points))


def _run_case_trial(args) -> tuple[int, list[TrialResult | str]]:
    config, scenario, options, betas, trial_index = args
    try:
        ctx = prepare_trial(config, scenario, trial_index, options)
    except Exception as exc:  # noqa: BLE001 - reported per point
        return trial_index, [f"trial {trial_index}: {exc!r}"] * len(betas)
    out: list[TrialResult | str] = []
    for beta in betas:
        try:
            out.append(evaluate_trial(ctx, beta))
        except Exception as exc:  # noqa: BLE001
            out.append(f"trial {trial_index}, beta {beta}: {exc!r}")
    return trial_index, out


def _aggregate(beta: float, M: int, N: int, results: list[TrialResult], failures: list[str]) -> SweepPoint:
    if not results:
        nan = float("nan")
        return SweepPoint(beta, M, N, nan, nan, nan, nan, nan, 0, failures=failures)
    trial_ber = np.array([r.ber.mean() if r.ber.size else np.nan for r in results])
    rr, rv = rmse_from_squared(
        np.array([r.sq_range_err for r in results]), np.array([r.sq_velocity_err for r in results])
    )
    snr_ft = np.concatenate([r.snr_ft_db for r in results])
    snr_dd = np.array([r.snr_dd_db for r in results])
    lin_mean_db = lambda db: float(10 * np.log10(np.mean(10 ** (db / 10)))) if db.size else float("nan")  # noqa: E731
    return SweepPoint(
        beta=float(beta),
        M=M,
        N=N,
        mean_ber=float(np.mean(trial_ber)),
        rmse_range_m=rr,
        rmse_velocity_ms=rv,
        mean_snr_ft_db=lin_mean_db(snr_ft),
        mean_snr_dd_db=lin_mean_db(snr_dd),
        trials=len(results),
        trial_ber=trial_ber,
        failures=failures,
    )


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Run every (beta, case) point and reduce to averaged curves.

    Failing trials are logged and recorded on their points; the sweep goes on.
    The reduction is in trial-index order, so the result does not depend on
    ``workers``.
    """
    betas = sorted(float(b) for b in spec.beta_grid)
    points = []
    for M, N in spec.cases:
        config = spec.config.with_grid(M, N)
        validate(config, spec.scenario)
        tasks = [(config, spec.scenario, spec.options, betas, t) for t in range(spec.trials_per_point)]
        if spec.workers > 1:
            with ProcessPoolExecutor(spec.workers) as pool:
                done = list(pool.map(_run_case_trial, tasks))
        else:
            done = [_run_case_trial(t) for t in tasks]
        done.sort(key=lambda item: item[0])
        for i, beta in enumerate(betas):
            results = [out[i] for _, out in done if isinstance(out[i], TrialResult)]
            failures = [out[i] for _, out in done if isinstance(out[i], str)]
            for msg in failures:
                log.warning("(M=%d, N=%d) %s", M, N, msg)
            points.append(_aggregate(beta, M, N, results, failures))
    result = SweepResult(points)
    if spec.output_path is not None:
        emit_csv(result, spec.output_path)
    return result


def emit_csv(result: SweepResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for p in result.points:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in p.row()])


def read_csv(path: str | Path) -> list[dict[str, float | int]]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ints = {"M", "N", "trials"}
    return [{k: (int(v) if k in ints else float(v)) for k, v in row.items()} for row in rows]
