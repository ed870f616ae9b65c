"""System and scenario parameters for the dual-domain JC&S simulator.

All defaults correspond to a 5G NR numerology-3 carrier at 70 GHz
(120 kHz subcarrier spacing, 8.9 us symbols including the cyclic prefix).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

SPEED_OF_LIGHT = 299_792_458.0

#: (M, N) grid sizes of the three reference cases (a), (b), (c).
REFERENCE_CASES: tuple[tuple[int, int], ...] = ((1024, 128), (2048, 256), (4096, 512))


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants.

    ``problems`` holds one human-readable diagnostic per violation.
    """

    def __init__(self, problems: Iterable[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class SystemConfig:
    f_c: float = 70e9
    delta_f: float = 120e3
    T: float = 8.9e-6
    M: int = 1024
    N: int = 128
    P_tot_ft: float = 20e-3
    c: float = SPEED_OF_LIGHT
    noise_psd: float = 10 ** (-174 / 10) * 1e-3
    noise_figure_db: float = 7.0
    rng_seed: int = 0

    @property
    def wavelength(self) -> float:
        return self.c / self.f_c

    @property
    def noise_power(self) -> float:
        """Thermal noise power per FT bin, W."""
        return self.noise_psd * self.delta_f * 10 ** (self.noise_figure_db / 10)

    @property
    def cp_duration(self) -> float:
        return self.T - 1.0 / self.delta_f

    def with_grid(self, M: int, N: int) -> "SystemConfig":
        return dataclasses.replace(self, M=M, N=N)


@dataclass(frozen=True)
class UserSpec:
    """One UE: LoS geometry and its contiguous FT resource block size."""

    range_m: float
    velocity_ms: float = 0.0
    motion_angle_rad: float = 0.0
    num_paths: int = 1
    M_cu: int = 240
    N_cu: int = 14


@dataclass(frozen=True)
class UserScenario:
    users: tuple[UserSpec, ...] = ()
    qam_order: int = 16
    rcs_m2: float = 1.0

    @property
    def U(self) -> int:
        return len(self.users)


@dataclass(frozen=True)
class Resolutions:
    delta_tau: float
    delta_nu: float
    delta_R: float
    delta_V: float
    R_max_unambiguous: float
    V_max_unambiguous: float


def reference_scenario(**overrides: Any) -> UserScenario:
    """Three LoS UEs at 15/25/35 m moving radially at 14/25/30 m/s."""
    users = tuple(
        UserSpec(range_m=r, velocity_ms=v)
        for r, v in ((15.0, 14.0), (25.0, 25.0), (35.0, 30.0))
    )
    return UserScenario(users=users, **overrides)


def _problems(config: SystemConfig, scenario: UserScenario | None) -> list[str]:
    out = []
    if config.M < 1:
        out.append(f"M must be >= 1, got {config.M}")
    if config.N < 1:
        out.append(f"N must be >= 1, got {config.N}")
    for name in ("delta_f", "T", "P_tot_ft", "f_c", "c"):
        if not getattr(config, name) > 0:
            out.append(f"{name} must be > 0, got {getattr(config, name)}")
    if config.noise_psd < 0:
        out.append(f"noise_psd must be >= 0, got {config.noise_psd}")
    if config.delta_f > 0 and config.T < 1.0 / config.delta_f:
        out.append(
            f"T={config.T} shorter than the useful symbol duration 1/delta_f={1 / config.delta_f}"
        )
    if scenario is None:
        return out

    if scenario.qam_order != 16:
        out.append(f"only 16-QAM is supported, got qam_order={scenario.qam_order}")
    if scenario.rcs_m2 < 0:
        out.append(f"rcs_m2 must be >= 0, got {scenario.rcs_m2}")
    cp = config.cp_duration
    used = 0
    for u, user in enumerate(scenario.users):
        if not user.range_m > 0:
            out.append(f"user {u}: range must be > 0, got {user.range_m}")
        elif cp > 0 and 2 * user.range_m / config.c >= cp:
            out.append(
                f"user {u}: two-way delay {2 * user.range_m / config.c:.3e} s exceeds "
                f"the cyclic prefix {cp:.3e} s"
            )
        if user.num_paths < 1:
            out.append(f"user {u}: num_paths must be >= 1, got {user.num_paths}")
        if not 1 <= user.M_cu <= config.M:
            out.append(f"user {u}: M_cu={user.M_cu} outside [1, M={config.M}]")
        if not 1 <= user.N_cu <= config.N:
            out.append(f"user {u}: N_cu={user.N_cu} outside [1, N={config.N}]")
        used += user.M_cu * user.N_cu
    if used > config.M * config.N:
        out.append(f"user blocks need {used} bins but the grid has {config.M * config.N}")
    return out


def validate(config: SystemConfig, scenario: UserScenario | None = None) -> SystemConfig:
    """Return ``config`` unchanged, or raise :class:`ConfigError` listing every violation."""
    problems = _problems(config, scenario)
    if problems:
        raise ConfigError(problems)
    return config


def resolutions(config: SystemConfig) -> Resolutions:
    delta_tau = 1.0 / (config.M * config.delta_f)
    delta_nu = 1.0 / (config.N * config.T)
    return Resolutions(
        delta_tau=delta_tau,
        delta_nu=delta_nu,
        delta_R=config.c * delta_tau / 2,
        delta_V=config.c * delta_nu / (2 * config.f_c),
        R_max_unambiguous=config.c * config.M * delta_tau / 2,
        V_max_unambiguous=config.c / (4 * config.f_c * config.T),
    )


def power_split(beta: float, config: SystemConfig) -> tuple[float, float]:
    """Split the per-bin budget into (communication, sensing) powers with rho = 10**beta.

    The sensing share is computed as ``P_tot - P_c`` so the two always sum to
    the budget exactly; ``expm1`` keeps it accurate for beta close to zero.
    """
    if not beta < 0:
        raise ValueError(f"beta must be strictly negative, got {beta}")
    p_tot = config.P_tot_ft
    p_s = -math.expm1(beta * math.log(10)) * p_tot
    p_c = p_tot - p_s
    return p_c, p_s


# -- file I/O ---------------------------------------------------------------

_SYSTEM_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}
_USER_FIELDS = {f.name for f in dataclasses.fields(UserSpec)}


def config_from_dict(data: Mapping[str, Any]) -> tuple[SystemConfig, UserScenario]:
    """Build a (config, scenario) pair from a flat mapping.

    System keys mirror :class:`SystemConfig`; the scenario lives under
    ``"users"`` (list of :class:`UserSpec` mappings), ``"qam_order"`` and
    ``"rcs_m2"``. Missing keys take their defaults; unknown keys are an error.
    If ``"users"`` is absent the three-UE reference scenario is used.
    """
    known = _SYSTEM_FIELDS | {"users", "qam_order", "rcs_m2"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown configuration key {k!r}" for k in unknown)

    config = SystemConfig(**{k: v for k, v in data.items() if k in _SYSTEM_FIELDS})
    extra = {k: data[k] for k in ("qam_order", "rcs_m2") if k in data}
    if "users" in data:
        users = []
        for i, item in enumerate(data["users"]):
            bad = sorted(set(item) - _USER_FIELDS)
            if bad:
                raise ConfigError(f"user {i}: unknown key {k!r}" for k in bad)
            users.append(UserSpec(**item))
        scenario = UserScenario(users=tuple(users), **extra)
    else:
        scenario = reference_scenario(**extra)
    return config, scenario


def config_to_dict(config: SystemConfig, scenario: UserScenario) -> dict[str, Any]:
    data = dataclasses.asdict(config)
    data["users"] = [dataclasses.asdict(u) for u in scenario.users]
    data["qam_order"] = scenario.qam_order
    data["rcs_m2"] = scenario.rcs_m2
    return data


def load_config(path: str | Path) -> tuple[SystemConfig, UserScenario]:
    with open(path) as fh:
        data = json.load(fh)
    config, scenario = config_from_dict(data)
    validate(config, scenario)
    return config, scenario
