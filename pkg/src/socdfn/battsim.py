"""Synthetic drive-cycle generator and equivalent-circuit cell simulator.

Produces timestamped (voltage, current, temperature, SOC) series whose
SOC labels come from exact Coulomb counting, so the ground truth is
analytically checkable. Sign convention throughout: charging current is
positive, discharge negative.

The cell model is deliberately small: a linear open-circuit-voltage
curve over SOC, an ohmic internal resistance, and a first-order thermal
lag toward ambient plus I^2*R self-heating. That is enough structure for
a network to learn while keeping every channel hand-verifiable.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, SampleRecord
from .errors import ConfigError
from .rng import check_seed, make_rng

logger = logging.getLogger(__name__)

# Fraction of peak discharge allowed as regen (charging) current.
REGEN_PEAK_FRACTION = 0.5


@dataclass(frozen=True)
class CellParams:
    """Electrical and thermal constants of one cylindrical cell."""

    capacity_ah: float = 2.9
    ocv_full_v: float = 4.2
    ocv_empty_v: float = 3.0
    r_internal_ohm: float = 0.05
    thermal_tau_s: float = 120.0
    ambient_c: float = 25.0
    heat_coeff_k_per_w: float = 8.0

    def __post_init__(self):
        if self.capacity_ah <= 0.0:
            raise ConfigError(f"capacity_ah must be positive, got {self.capacity_ah}")
        if self.ocv_full_v <= self.ocv_empty_v:
            raise ConfigError(
                f"ocv_full_v ({self.ocv_full_v}) must exceed "
                f"ocv_empty_v ({self.ocv_empty_v})"
            )
        if self.r_internal_ohm < 0.0:
            raise ConfigError(
                f"r_internal_ohm must be non-negative, got {self.r_internal_ohm}"
            )
        if self.thermal_tau_s <= 0.0:
            raise ConfigError(
                f"thermal_tau_s must be positive, got {self.thermal_tau_s}"
            )

    def ocv(self, soc_pct: float) -> float:
        """Open-circuit voltage, linear in SOC."""
        return self.ocv_empty_v + (self.ocv_full_v - self.ocv_empty_v) * (
            soc_pct / 100.0
        )


@dataclass(frozen=True)
class CycleConfig:
    """Shape of one synthetic drive cycle."""

    duration_s: float = 20000.0
    dt_s: float = 1.0
    peak_discharge_a: float = 1.0
    regen_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.dt_s <= 0.0:
            raise ConfigError(f"dt_s must be positive, got {self.dt_s}")
        if self.duration_s < self.dt_s:
            raise ConfigError(
                f"duration_s ({self.duration_s}) must be at least dt_s ({self.dt_s})"
            )
        if self.peak_discharge_a <= 0.0:
            raise ConfigError(
                f"peak_discharge_a must be positive, got {self.peak_discharge_a}"
            )
        if not 0.0 <= self.regen_fraction < 1.0:
            raise ConfigError(
                f"regen_fraction must be in [0, 1), got {self.regen_fraction}"
            )
        check_seed(self.seed)


def generate_drive_cycle(cfg: CycleConfig) -> np.ndarray:
    """Seed-deterministic per-step current profile in amperes.

    Three layers: a slowly varying discharge backbone (linear ramps
    between random control points), short random discharge pulses, and
    occasional regen segments carrying positive current on roughly
    regen_fraction of the steps. Values stay within
    [-peak_discharge_a, +REGEN_PEAK_FRACTION * peak_discharge_a].
    """
    rng = make_rng(cfg.seed)
    n = int(math.floor(cfg.duration_s / cfg.dt_s))
    peak = cfg.peak_discharge_a

    # Backbone: control points roughly every 10 minutes of cycle time.
    n_ctrl = max(2, int(n * cfg.dt_s / 600.0) + 1)
    ctrl_levels = -peak * rng.uniform(0.15, 0.55, size=n_ctrl)
    current = np.interp(np.arange(n), np.linspace(0.0, n - 1.0, n_ctrl), ctrl_levels)

    # Discharge pulses: acceleration-like bursts on top of the backbone.
    n_pulses = n // 150
    if n_pulses > 0:
        starts = rng.integers(0, n, size=n_pulses)
        widths = rng.integers(5, 26, size=n_pulses)
        depths = peak * rng.uniform(0.10, 0.40, size=n_pulses)
        for s, w, d in zip(starts, widths, depths):
            current[s : s + w] -= d

    # Regen segments: braking recharges the cell for short stretches.
    if cfg.regen_fraction > 0.0:
        seg_width = 15
        n_regen = max(1, int(round(cfg.regen_fraction * n / seg_width)))
        starts = rng.integers(0, n, size=n_regen)
        levels = REGEN_PEAK_FRACTION * peak * rng.uniform(0.2, 1.0, size=n_regen)
        for s, level in zip(starts, levels):
            current[s : s + seg_width] = level

    return np.clip(current, -peak, REGEN_PEAK_FRACTION * peak)


def simulate_cell(
    profile: np.ndarray, params: CellParams, soc0_pct: float, dt_s: float
) -> Dataset:
    """Integrate one current profile into a labeled Dataset.

    SOC bookkeeping is pure Coulomb counting on the raw integral
    soc(t) = soc0 + (100 / (3600 * capacity)) * sum(i * dt); emitted
    labels are that integral clamped to [0, 100], and the run truncates
    after emitting the first record whose integral has reached 0. Row k
    carries time (k + 1) * dt, the state after applying step k.
    """
    if not 0.0 < soc0_pct <= 100.0:
        raise ConfigError(f"soc0_pct must be in (0, 100], got {soc0_pct}")
    if dt_s <= 0.0:
        raise ConfigError(f"dt_s must be positive, got {dt_s}")
    profile = np.asarray(profile, dtype=np.float64)
    soc_per_amp_step = 100.0 * dt_s / (3600.0 * params.capacity_ah)

    records = []
    soc = soc0_pct
    temp = params.ambient_c
    alpha = dt_s / params.thermal_tau_s
    for k, i in enumerate(profile):
        i = float(i)
        soc += soc_per_amp_step * i
        soc_label = min(100.0, max(0.0, soc))
        volts = params.ocv(soc_label) + i * params.r_internal_ohm
        heat_target = (
            params.ambient_c
            + params.heat_coeff_k_per_w * i * i * params.r_internal_ohm
        )
        temp += alpha * (heat_target - temp)
        records.append(
            SampleRecord(
                t=(k + 1) * dt_s,
                voltage=volts,
                current=i,
                temperature=temp,
                soc=soc_label,
            )
        )
        if soc <= 0.0:
            logger.info(
                "cell empty after step %d of %d, truncating cycle", k + 1, len(profile)
            )
            break
    return Dataset(records=tuple(records), name="simulated-cycle")


def synth_dataset(
    cell: CellParams, cycle: CycleConfig, soc0_pct: float = 100.0
) -> Dataset:
    """Generate a profile and simulate it in one call."""
    return simulate_cell(generate_drive_cycle(cycle), cell, soc0_pct, cycle.dt_s)
