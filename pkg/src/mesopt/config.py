"""Plant configuration: ratings, bounds, efficiencies and cost coefficients.

All parameter blocks are frozen dataclasses validated on construction.  A
`ConfigError` names the offending field so file-level loaders can surface
precise messages.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from . import units


class ConfigError(ValueError):
    """Raised when a configuration value violates a model invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def _require(cond: bool, field: str, message: str) -> None:
    if not cond:
        raise ConfigError(field, message)


def _check_range(field: str, lo: float, hi: float) -> None:
    _require(lo <= hi, field, f"lower bound {lo} exceeds upper bound {hi}")


def _check_efficiency(field: str, value: float) -> None:
    _require(0.0 < value < 1.0, field, f"efficiency {value} must lie strictly in (0, 1)")


@dataclass(frozen=True)
class GeneratorParams:
    """One dispatchable generator: box, ramp, min up/down times, quadratic cost."""

    p_min: float            # kW, lower generation limit when committed
    p_max: float            # kW
    ramp: float             # kW/h between consecutive steps
    min_up: int             # steps
    min_down: int           # steps
    cost_a: float           # $/kW^2 h
    cost_b: float           # $/kWh
    cost_c: float           # $/h, commitment cost

    def validate(self, name: str) -> None:
        _check_range(f"{name}.p_min/p_max", self.p_min, self.p_max)
        _require(self.p_min >= 0.0, f"{name}.p_min", "must be nonnegative")
        _require(self.ramp > 0.0, f"{name}.ramp", "must be positive")
        _require(self.min_up >= 1 and self.min_down >= 1,
                 f"{name}.min_up/min_down", "must be integer steps >= 1")
        _require(self.cost_a >= 0.0, f"{name}.cost_a", "must be nonnegative")
        _require(self.cost_c >= 0.0, f"{name}.cost_c", "must be nonnegative")


@dataclass(frozen=True)
class GasTurbineParams:
    """Co-generation gas turbine plus the absorption chiller it drives."""

    p_min: float
    p_max: float
    ramp: float
    min_up: int
    min_down: int
    cost_a: float
    cost_b: float
    cost_c: float
    heat_ratio: float       # kW thermal recovered per kW electric
    ac_cop: float           # absorption chiller coefficient of performance
    q_ac_min: float         # kW, AC thermal output box when committed
    q_ac_max: float         # kW

    def validate(self) -> None:
        _check_range("gas_turbine.p_min/p_max", self.p_min, self.p_max)
        _require(self.p_min >= 0.0, "gas_turbine.p_min", "must be nonnegative")
        _require(self.ramp > 0.0, "gas_turbine.ramp", "must be positive")
        _require(self.min_up >= 1 and self.min_down >= 1,
                 "gas_turbine.min_up/min_down", "must be integer steps >= 1")
        _require(self.cost_a >= 0.0, "gas_turbine.cost_a", "must be nonnegative")
        _require(self.cost_c >= 0.0, "gas_turbine.cost_c", "must be nonnegative")
        _require(self.heat_ratio > 0.0, "gas_turbine.heat_ratio", "must be positive")
        _require(self.ac_cop > 0.0, "gas_turbine.ac_cop", "must be positive")
        _check_range("gas_turbine.q_ac_min/q_ac_max", self.q_ac_min, self.q_ac_max)
        _require(self.q_ac_min >= 0.0, "gas_turbine.q_ac_min", "must be nonnegative")

    @property
    def thermal_gain(self) -> float:
        """Q_AC produced per kW of turbine electric power."""
        return self.ac_cop * self.heat_ratio


@dataclass(frozen=True)
class ChillerParams:
    """One bank chiller: mass-flow box and coefficient of performance."""

    mdot_min: float         # kg/h when committed
    mdot_max: float         # kg/h
    cop: float

    def validate(self, name: str) -> None:
        _check_range(f"{name}.mdot_min/mdot_max", self.mdot_min, self.mdot_max)
        _require(self.mdot_min >= 0.0, f"{name}.mdot_min", "must be nonnegative")
        _require(self.cop > 0.0, f"{name}.cop", "must be positive")


@dataclass(frozen=True)
class GridParams:
    """Utility exchange box; p_min may be negative to allow export."""

    p_min: float
    p_max: float

    def validate(self) -> None:
        _check_range("grid.p_min/p_max", self.p_min, self.p_max)


@dataclass(frozen=True)
class TesParams:
    """Chilled-water thermal storage: tank geometry, loss, SoC and power boxes."""

    volume: float           # m^3
    area: float             # m^2
    heat_loss: float        # W/m^2 degC
    rho: float              # kg/m^3
    mix_fraction: float     # share of chilled water routed to the tank, in (0,1)
    t_inlet: float          # degC
    t_ambient: float        # degC
    t_min: float
    t_max: float
    soc_min: float          # kWh
    soc_max: float
    p_min: float            # kW, signed: discharge bound <= 0
    p_max: float            # kW, charge bound >= 0
    eta_charge: float
    eta_discharge: float

    def validate(self) -> None:
        _require(self.volume > 0.0, "tes.volume", "must be positive")
        _require(self.area > 0.0, "tes.area", "must be positive")
        _require(self.heat_loss >= 0.0, "tes.heat_loss", "must be nonnegative")
        _require(self.rho > 0.0, "tes.rho", "must be positive")
        _require(0.0 < self.mix_fraction < 1.0, "tes.mix_fraction",
                 "must lie strictly in (0, 1)")
        _check_range("tes.t_min/t_max", self.t_min, self.t_max)
        _check_range("tes.soc_min/soc_max", self.soc_min, self.soc_max)
        _require(self.p_min <= 0.0 <= self.p_max, "tes.p_min/p_max",
                 "signed power box must contain 0 (p_min <= 0 <= p_max)")
        _check_efficiency("tes.eta_charge", self.eta_charge)
        _check_efficiency("tes.eta_discharge", self.eta_discharge)


@dataclass(frozen=True)
class EssParams:
    """Battery storage: SoC/power boxes, efficiencies, degradation cost data."""

    soc_min: float          # kWh
    soc_max: float
    p_min: float            # kW, signed: discharge bound <= 0
    p_max: float            # kW, charge bound >= 0
    eta_charge: float
    eta_discharge: float
    eta_loss: float         # self-discharge fraction per step
    unit_cost: float        # $, purchase plus installation
    life_cycles: int        # full charge-discharge cycles to end of life
    capacity: float         # kWh nameplate
    tau_charge: int         # average steps per charging excursion
    tau_discharge: int

    def validate(self) -> None:
        _check_range("ess.soc_min/soc_max", self.soc_min, self.soc_max)
        _require(self.p_min <= 0.0 <= self.p_max, "ess.p_min/p_max",
                 "signed power box must contain 0 (p_min <= 0 <= p_max)")
        _check_efficiency("ess.eta_charge", self.eta_charge)
        _check_efficiency("ess.eta_discharge", self.eta_discharge)
        _require(0.0 < self.eta_loss < 1.0, "ess.eta_loss",
                 "must lie strictly in (0, 1)")
        _require(self.unit_cost >= 0.0, "ess.unit_cost", "must be nonnegative")
        _require(self.life_cycles >= 1, "ess.life_cycles", "must be >= 1")
        _require(self.capacity > 0.0, "ess.capacity", "must be positive")
        _require(self.tau_charge >= 1 and self.tau_discharge >= 1,
                 "ess.tau_charge/tau_discharge", "must be >= 1 steps")

    @property
    def cycle_coeff(self) -> float:
        """$ per kW of throughput before the per-direction tau division."""
        return self.unit_cost / (2.0 * self.life_cycles * self.capacity)


@dataclass(frozen=True)
class MesConfig:
    """Complete plant description used by every solver and the simulator."""

    dt: float                               # h, sampling time
    generators: tuple[GeneratorParams, ...]
    gas_turbine: Optional[GasTurbineParams]
    chillers: tuple[ChillerParams, ...]
    c_rho: float                            # kJ/kg degC, chilled-water heat capacity
    delta_t_c: float                        # degC, chiller inlet-outlet difference
    grid: GridParams
    tes: Optional[TesParams]
    ess: Optional[EssParams]
    ac_parasitic: float = 0.0               # electric kW drawn per kW of AC output

    def __post_init__(self):
        _require(self.dt > 0.0, "dt", "must be positive")
        _require(self.c_rho > 0.0, "c_rho", "must be positive")
        _require(self.delta_t_c > 0.0, "delta_t_c", "must be positive")
        _require(self.ac_parasitic >= 0.0, "ac_parasitic", "must be nonnegative")
        for i, g in enumerate(self.generators):
            g.validate(f"generators[{i}]")
        if self.gas_turbine is not None:
            self.gas_turbine.validate()
        for j, c in enumerate(self.chillers):
            c.validate(f"chillers[{j}]")
        self.grid.validate()
        if self.tes is not None:
            self.tes.validate()
            lc = self.tes_loss_coeff
            _require(0.0 <= lc <= 1.0, "tes.heat_loss",
                     f"per-step loss fraction {lc:.4g} leaves the unit interval; "
                     "reduce heat_loss/area or the sampling time")
        if self.ess is not None:
            self.ess.validate()

    @property
    def n_g(self) -> int:
        return len(self.generators)

    @property
    def n_c(self) -> int:
        return len(self.chillers)

    @property
    def has_gt(self) -> bool:
        return self.gas_turbine is not None

    @property
    def has_tes(self) -> bool:
        return self.tes is not None

    @property
    def has_ess(self) -> bool:
        return self.ess is not None

    @property
    def q_per_flow(self) -> float:
        """kW of cooling per kg/h of chiller flow."""
        return units.chiller_q_per_flow(self.c_rho, self.delta_t_c)

    @property
    def tes_flow_coeff(self) -> float:
        assert self.tes is not None
        return units.tes_flow_coeff(self.tes.mix_fraction, self.tes.volume,
                                    self.tes.rho, self.dt)

    @property
    def tes_loss_coeff(self) -> float:
        assert self.tes is not None
        return units.tes_loss_coeff(self.tes.heat_loss, self.tes.area,
                                    self.tes.volume, self.tes.rho,
                                    self.c_rho, self.dt)

    def without_storage(self) -> "MesConfig":
        """Copy of this plant with both storage units removed."""
        return replace(self, tes=None, ess=None)
