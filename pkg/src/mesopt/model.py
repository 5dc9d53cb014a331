"""Physical and economic plant model: decision/state types, per-component
equations, constraint audits and the exact single/multi-step evaluator.

Every function here is pure; all types are immutable after construction, so
instances can be shared freely across parallel workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import units
from .config import MesConfig

# Balance tolerance for solver-produced points (kW).
BALANCE_TOL_SOLVER = 1e-6
# Balance tolerance for schedules ingested from outside the package (kW).
BALANCE_TOL_EXTERNAL = 1e-3


class ConstraintViolationError(ValueError):
    """A decision quantity violates a named operating constraint."""


class InfeasibleStateError(ValueError):
    """A state update left its admissible box; never silently clamped."""


class DimensionMismatchError(ValueError):
    """Plan, state and exogenous series lengths disagree."""


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DecisionVector:
    """One time step of the control vector: continuous set-points plus
    commitment binaries.

    Sign conventions: storage powers are signed with charge > 0; a positive
    mode flag (1) marks charging and pins the power nonnegative, mode 0 pins
    it nonpositive.
    """

    p_g: np.ndarray          # kW per generator
    p_gt: float              # kW
    q_ac: float              # kW thermal from the absorption chiller
    mdot: np.ndarray         # kg/h per bank chiller
    p_ess: float             # kW, signed
    p_tes: float             # kW, signed
    p_gr: float              # kW, import > 0
    on_g: np.ndarray         # {0,1} per generator
    on_gt: int
    mode_ess: int            # 1 = charging
    mode_tes: int
    on_c: np.ndarray         # {0,1} per bank chiller

    def __post_init__(self):
        object.__setattr__(self, "p_g", _frozen_array(self.p_g))
        object.__setattr__(self, "mdot", _frozen_array(self.mdot))
        object.__setattr__(self, "on_g", _frozen_array(self.on_g, dtype=np.int8))
        object.__setattr__(self, "on_c", _frozen_array(self.on_c, dtype=np.int8))

    @staticmethod
    def all_off(cfg: MesConfig) -> "DecisionVector":
        return DecisionVector(
            p_g=np.zeros(cfg.n_g), p_gt=0.0, q_ac=0.0,
            mdot=np.zeros(cfg.n_c), p_ess=0.0, p_tes=0.0, p_gr=0.0,
            on_g=np.zeros(cfg.n_g, dtype=np.int8), on_gt=0,
            mode_ess=0, mode_tes=0, on_c=np.zeros(cfg.n_c, dtype=np.int8))

    def binaries(self, layout: "BinaryLayout") -> np.ndarray:
        """Flatten the commitment flags into this config's binary layout."""
        out = np.zeros(layout.n_b, dtype=np.int8)
        for i in range(layout.n_g):
            out[layout.gen(i)] = self.on_g[i]
        if layout.has_gt:
            out[layout.gt()] = self.on_gt
        if layout.has_ess:
            out[layout.ess()] = self.mode_ess
        if layout.has_tes:
            out[layout.tes()] = self.mode_tes
        for j in range(layout.n_c):
            out[layout.chiller(j)] = self.on_c[j]
        return out


@dataclass(frozen=True)
class SystemState:
    """Dynamic plant state plus consecutive-status counters.

    For each temporal unit exactly one of (tau_up, tau_down) is positive;
    the positive one counts how many consecutive steps the unit has held its
    current status, including the step just applied.
    """

    t_tes: float             # degC
    soc_ess: float           # kWh
    soc_tes: float           # kWh
    tau_up_g: np.ndarray     # steps, per generator
    tau_down_g: np.ndarray
    tau_up_gt: int
    tau_down_gt: int

    def __post_init__(self):
        object.__setattr__(self, "tau_up_g", _frozen_array(self.tau_up_g, dtype=np.int64))
        object.__setattr__(self, "tau_down_g", _frozen_array(self.tau_down_g, dtype=np.int64))
        for i, (up, dn) in enumerate(zip(self.tau_up_g, self.tau_down_g)):
            if not ((up > 0) ^ (dn > 0)) or up < 0 or dn < 0:
                raise ValueError(
                    f"generators[{i}]: exactly one of tau_up/tau_down must be positive "
                    f"(got {up}, {dn})")
        if not ((self.tau_up_gt > 0) ^ (self.tau_down_gt > 0)) \
                or self.tau_up_gt < 0 or self.tau_down_gt < 0:
            raise ValueError("gas_turbine: exactly one of tau_up/tau_down must be positive")

    def gen_status(self, i: int) -> int:
        return 1 if self.tau_up_g[i] > 0 else 0

    @property
    def gt_status(self) -> int:
        return 1 if self.tau_up_gt > 0 else 0


def initial_state(cfg: MesConfig) -> SystemState:
    """Rest state: storages at mid-box, every unit off long enough to be free."""
    n_g = cfg.n_g
    tau_dn = np.array([g.min_down for g in cfg.generators], dtype=np.int64)
    gt_dn = cfg.gas_turbine.min_down if cfg.has_gt else 1
    return SystemState(
        t_tes=0.5 * (cfg.tes.t_min + cfg.tes.t_max) if cfg.has_tes else 0.0,
        soc_ess=0.5 * (cfg.ess.soc_min + cfg.ess.soc_max) if cfg.has_ess else 0.0,
        soc_tes=0.5 * (cfg.tes.soc_min + cfg.tes.soc_max) if cfg.has_tes else 0.0,
        tau_up_g=np.zeros(n_g, dtype=np.int64), tau_down_g=tau_dn,
        tau_up_gt=0, tau_down_gt=gt_dn)


@dataclass(frozen=True)
class ExogenousSeries:
    """Per-step demand, renewable and price data."""

    p_l: np.ndarray          # kW electrical load
    q_l: np.ndarray          # kW thermal load
    p_r: np.ndarray          # kW renewable generation
    c_d: np.ndarray          # $/kWh day-ahead price component
    c_rt: np.ndarray         # $/kWh real-time price component

    def __post_init__(self):
        n = len(self.p_l)
        for name in ("p_l", "q_l", "p_r", "c_d", "c_rt"):
            arr = _frozen_array(getattr(self, name))
            if len(arr) != n:
                raise DimensionMismatchError(
                    f"series {name} has {len(arr)} steps, expected {n}")
            object.__setattr__(self, name, arr)
        if np.any(self.p_l < 0) or np.any(self.q_l < 0) or np.any(self.p_r < 0):
            raise ValueError("loads and renewable generation must be nonnegative")

    def __len__(self) -> int:
        return len(self.p_l)

    @property
    def c_gr(self) -> np.ndarray:
        """Total market energy price: day-ahead plus real-time component."""
        return self.c_d + self.c_rt

    def window(self, start: int, n: int) -> "ExogenousSeries":
        if start < 0 or start + n > len(self):
            raise DimensionMismatchError(
                f"window [{start}, {start + n}) outside series of length {len(self)}")
        sl = slice(start, start + n)
        return ExogenousSeries(self.p_l[sl], self.q_l[sl], self.p_r[sl],
                               self.c_d[sl], self.c_rt[sl])

    def tiled(self, total_steps: int) -> "ExogenousSeries":
        """Periodically extend the series to at least total_steps."""
        reps = -(-total_steps // len(self))
        return ExogenousSeries(*(np.tile(getattr(self, f), reps)[:total_steps]
                                 for f in ("p_l", "q_l", "p_r", "c_d", "c_rt")))

    def scaled(self, load_factor: float, thermal_factor: float,
               renewable_factor: float) -> "ExogenousSeries":
        return ExogenousSeries(self.p_l * load_factor, self.q_l * thermal_factor,
                               self.p_r * renewable_factor, self.c_d, self.c_rt)


class BinaryLayout:
    """Index map for the per-step binary vector of one plant configuration.

    Slot order: generators, gas turbine, battery mode, thermal-store mode,
    bank chillers; absent units contribute no slot.
    """

    def __init__(self, cfg: MesConfig):
        self.n_g = cfg.n_g
        self.n_c = cfg.n_c
        self.has_gt = cfg.has_gt
        self.has_ess = cfg.has_ess
        self.has_tes = cfg.has_tes
        pos = self.n_g
        self._gt = pos if self.has_gt else None
        pos += int(self.has_gt)
        self._ess = pos if self.has_ess else None
        pos += int(self.has_ess)
        self._tes = pos if self.has_tes else None
        pos += int(self.has_tes)
        self._chiller0 = pos
        self.n_b = pos + self.n_c

    def gen(self, i: int) -> int:
        return i

    def gt(self) -> int:
        assert self._gt is not None
        return self._gt

    def ess(self) -> int:
        assert self._ess is not None
        return self._ess

    def tes(self) -> int:
        assert self._tes is not None
        return self._tes

    def chiller(self, j: int) -> int:
        return self._chiller0 + j

    def temporal_slots(self) -> list[tuple[str, int, int]]:
        """(kind, unit index, slot) for every unit with min up/down times."""
        out = [("gen", i, self.gen(i)) for i in range(self.n_g)]
        if self.has_gt:
            out.append(("gt", 0, self.gt()))
        return out

    def free_slots(self) -> list[int]:
        """Slots with no temporal coupling: storage modes and chillers."""
        out = []
        if self.has_ess:
            out.append(self.ess())
        if self.has_tes:
            out.append(self.tes())
        out.extend(self.chiller(j) for j in range(self.n_c))
        return out


# ---------------------------------------------------------------------------
# Component equations
# ---------------------------------------------------------------------------

def gen_cost(p: float, on: int, a: float, b: float, c: float,
             p_min: Optional[float] = None, p_max: Optional[float] = None,
             unit: str = "generator") -> float:
    """Quadratic generation cost; zero when the unit is off."""
    if p_min is not None and p_max is not None:
        lo, hi = on * p_min, on * p_max
        if p < lo - 1e-9 or p > hi + 1e-9:
            raise ConstraintViolationError(
                f"{unit}: power {p} outside committed box [{lo}, {hi}]")
    return on * (a * p * p + b * p + c)


def gt_cost(p_gt: float, on_gt: int, a: float, b: float, c: float,
            p_min: Optional[float] = None, p_max: Optional[float] = None) -> float:
    return gen_cost(p_gt, on_gt, a, b, c, p_min, p_max, unit="gas_turbine")


def ac_output(p_gt: float, cfg: MesConfig) -> float:
    """Absorption-chiller cooling delivered by the recovered turbine heat."""
    assert cfg.gas_turbine is not None
    return cfg.gas_turbine.thermal_gain * p_gt


def chiller_thermal(mdot: float, on: int, cfg: MesConfig, j: int) -> float:
    """Cooling power of bank chiller j at the given mass flow."""
    ch = cfg.chillers[j]
    lo, hi = on * ch.mdot_min, on * ch.mdot_max
    if mdot < lo - 1e-9 or mdot > hi + 1e-9:
        raise ConstraintViolationError(
            f"chillers[{j}]: flow {mdot} outside committed box [{lo}, {hi}]")
    return on * mdot * cfg.q_per_flow


def chiller_power(q_c: Sequence[float], cfg: MesConfig) -> float:
    """Electric power drawn by the chiller bank for the given cooling outputs."""
    return float(sum(q / ch.cop for q, ch in zip(q_c, cfg.chillers)))


def _tes_temperature_next(t_tes: float, flow_sum: float, cfg: MesConfig) -> float:
    tes = cfg.tes
    fc = cfg.tes_flow_coeff
    lc = cfg.tes_loss_coeff
    return (fc * flow_sum * (tes.t_inlet - t_tes)
            + t_tes * (1.0 - lc) + tes.t_ambient * lc)


def tes_temperature_step(state: SystemState, mdot: Sequence[float],
                         on_c: Sequence[int], cfg: MesConfig) -> float:
    """Tank temperature after one step of chilled-water mixing and ambient loss."""
    assert cfg.tes is not None
    flow_sum = float(np.dot(np.asarray(mdot, dtype=float),
                            np.asarray(on_c, dtype=float)))
    t_next = _tes_temperature_next(state.t_tes, flow_sum, cfg)
    if t_next < cfg.tes.t_min - 1e-9 or t_next > cfg.tes.t_max + 1e-9:
        raise InfeasibleStateError(
            f"tes.temperature: {t_next:.6g} outside [{cfg.tes.t_min}, {cfg.tes.t_max}]")
    return t_next


def _tes_soc_next(soc: float, t_tes: float, p_tes: float, mode: int,
                  cfg: MesConfig) -> float:
    tes = cfg.tes
    if mode == 1:
        flow = tes.eta_charge * p_tes * cfg.dt
    else:
        flow = p_tes * cfg.dt / tes.eta_discharge
    ambient = units.tes_ambient_power_kw(tes.heat_loss, tes.area,
                                         tes.t_ambient - t_tes) * cfg.dt
    return soc + flow + ambient


def tes_soc_step(state: SystemState, p_tes: float, mode_tes: int,
                 cfg: MesConfig) -> float:
    """Stored cooling energy after one charge/discharge step."""
    assert cfg.tes is not None
    soc_next = _tes_soc_next(state.soc_tes, state.t_tes, p_tes, mode_tes, cfg)
    if soc_next < cfg.tes.soc_min - 1e-9 or soc_next > cfg.tes.soc_max + 1e-9:
        raise InfeasibleStateError(
            f"tes.soc: {soc_next:.6g} outside [{cfg.tes.soc_min}, {cfg.tes.soc_max}]")
    return soc_next


def _ess_soc_next(soc: float, p_ess: float, mode: int, cfg: MesConfig) -> float:
    ess = cfg.ess
    if mode == 1:
        flow = ess.eta_charge * p_ess * cfg.dt
    else:
        flow = p_ess * cfg.dt / ess.eta_discharge
    return soc + flow - ess.eta_loss * soc


def ess_soc_step(state: SystemState, p_ess: float, mode_ess: int,
                 cfg: MesConfig) -> float:
    """Battery state of charge after one step, including self-discharge."""
    assert cfg.ess is not None
    soc_next = _ess_soc_next(state.soc_ess, p_ess, mode_ess, cfg)
    if soc_next < cfg.ess.soc_min - 1e-9 or soc_next > cfg.ess.soc_max + 1e-9:
        raise InfeasibleStateError(
            f"ess.soc: {soc_next:.6g} outside [{cfg.ess.soc_min}, {cfg.ess.soc_max}]")
    return soc_next


def ess_cycle_cost(p_ess: float, mode_ess: int, cfg: MesConfig) -> float:
    """Degradation cost of one charge or discharge step; nonnegative under the
    signed-power convention."""
    assert cfg.ess is not None
    ess = cfg.ess
    if mode_ess == 1:
        return ess.cycle_coeff * p_ess / ess.tau_charge
    return -ess.cycle_coeff * p_ess / ess.tau_discharge


def stage_cost(u: DecisionVector, c_gr: float, cfg: MesConfig) -> float:
    """Operating cost rate of one step: generation, turbine, grid and battery
    degradation."""
    total = 0.0
    for i, g in enumerate(cfg.generators):
        total += gen_cost(float(u.p_g[i]), int(u.on_g[i]), g.cost_a, g.cost_b, g.cost_c)
    if cfg.has_gt:
        gt = cfg.gas_turbine
        total += gt_cost(u.p_gt, u.on_gt, gt.cost_a, gt.cost_b, gt.cost_c)
    total += c_gr * u.p_gr
    if cfg.has_ess:
        total += ess_cycle_cost(u.p_ess, u.mode_ess, cfg)
    return total


# ---------------------------------------------------------------------------
# Constraint checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    name: str
    step: Optional[int]
    amount: float


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    @property
    def max_violation(self) -> float:
        return max((v.amount for v in self.violations), default=0.0)

    def names(self) -> list[str]:
        return [v.name for v in self.violations]


def unit_temporal_violations(seq: Sequence[int], status0: int, elapsed0: int,
                             t_up: int, t_dn: int) -> list[int]:
    """Steps at which one unit's on/off sequence breaks its minimum up/down
    windows, given its pre-horizon status and elapsed consecutive steps.

    Implements the switch-window form: the carried-in status pins the first
    (min_time - elapsed) steps, and each in-horizon switch pins the following
    (min_time - 1) steps, truncated at the horizon end.
    """
    h = len(seq)
    bad: set[int] = set()
    need0 = t_up if status0 == 1 else t_dn
    for k in range(min(max(need0 - elapsed0, 0), h)):
        if seq[k] != status0:
            bad.add(k)
    prev = status0
    for k in range(h):
        if seq[k] > prev:       # switched on at k: hold for t_up - 1 more steps
            for t in range(k + 1, min(k + t_up, h)):
                if seq[t] != 1:
                    bad.add(t)
        elif seq[k] < prev:     # switched off at k: hold for t_dn - 1 more steps
            for t in range(k + 1, min(k + t_dn, h)):
                if seq[t] != 0:
                    bad.add(t)
        prev = seq[k]
    return sorted(bad)


def check_temporal(binaries: np.ndarray, state: SystemState,
                   cfg: MesConfig) -> FeasibilityReport:
    """Audit minimum up/down times of every temporal unit over a horizon.

    `binaries` has shape (horizon, n_b) in this config's binary layout.
    Storage modes and bank chillers carry no temporal coupling.
    """
    layout = BinaryLayout(cfg)
    binaries = np.asarray(binaries, dtype=np.int8).reshape(-1, layout.n_b)
    viols: list[Violation] = []
    for kind, i, slot in layout.temporal_slots():
        if kind == "gen":
            g = cfg.generators[i]
            status0 = state.gen_status(i)
            elapsed0 = int(state.tau_up_g[i] if status0 else state.tau_down_g[i])
            t_up, t_dn, name = g.min_up, g.min_down, f"generators[{i}].temporal"
        else:
            gt = cfg.gas_turbine
            status0 = state.gt_status
            elapsed0 = int(state.tau_up_gt if status0 else state.tau_down_gt)
            t_up, t_dn, name = gt.min_up, gt.min_down, "gas_turbine.temporal"
        for k in unit_temporal_violations(binaries[:, slot], status0, elapsed0,
                                          t_up, t_dn):
            viols.append(Violation(name, k, 1.0))
    return FeasibilityReport(ok=not viols, violations=tuple(viols))


def electrical_balance_residual(u: DecisionVector, p_l: float, p_r: float,
                                cfg: MesConfig) -> float:
    """Supply minus demand on the electrical bus (kW); zero when balanced."""
    q_c = [chiller_thermal(float(u.mdot[j]), int(u.on_c[j]), cfg, j)
           for j in range(cfg.n_c)]
    p_c = chiller_power(q_c, cfg)
    p_ac = cfg.ac_parasitic * u.q_ac
    supply = float(np.dot(u.on_g, u.p_g)) + u.on_gt * u.p_gt + p_r + u.p_gr \
        - u.p_ess - p_c - p_ac
    return supply - p_l


def thermal_balance_residual(u: DecisionVector, q_l: float, cfg: MesConfig) -> float:
    """Supply minus demand on the cooling bus (kW); zero when balanced."""
    q_c = sum(chiller_thermal(float(u.mdot[j]), int(u.on_c[j]), cfg, j)
              for j in range(cfg.n_c))
    return q_c + u.q_ac - u.p_tes - q_l


def check_balance(u: DecisionVector, state: SystemState, p_l: float, q_l: float,
                  p_r: float, cfg: MesConfig,
                  tol: float = BALANCE_TOL_SOLVER) -> FeasibilityReport:
    """Audit both bus balances at a single instant."""
    r_e = electrical_balance_residual(u, p_l, p_r, cfg)
    r_q = thermal_balance_residual(u, q_l, cfg)
    viols = []
    if abs(r_e) > tol:
        viols.append(Violation("balance.electrical", None, abs(r_e)))
    if abs(r_q) > tol:
        viols.append(Violation("balance.thermal", None, abs(r_q)))
    return FeasibilityReport(ok=not viols, violations=tuple(viols))


def advance_state(state: SystemState, u: DecisionVector, cfg: MesConfig,
                  check: bool = True) -> SystemState:
    """Apply one control to the plant: dynamic states plus status counters.

    With check=True an out-of-box state raises InfeasibleStateError; the
    audit path uses check=False and collects residuals itself.
    """
    if cfg.has_tes:
        flow_sum = float(np.dot(u.mdot, u.on_c.astype(float)))
        t_next = _tes_temperature_next(state.t_tes, flow_sum, cfg)
        soc_tes_next = _tes_soc_next(state.soc_tes, state.t_tes, u.p_tes,
                                     u.mode_tes, cfg)
        if check:
            if not (cfg.tes.t_min - 1e-9 <= t_next <= cfg.tes.t_max + 1e-9):
                raise InfeasibleStateError(
                    f"tes.temperature: {t_next:.6g} outside "
                    f"[{cfg.tes.t_min}, {cfg.tes.t_max}]")
            if not (cfg.tes.soc_min - 1e-9 <= soc_tes_next <= cfg.tes.soc_max + 1e-9):
                raise InfeasibleStateError(
                    f"tes.soc: {soc_tes_next:.6g} outside "
                    f"[{cfg.tes.soc_min}, {cfg.tes.soc_max}]")
    else:
        t_next, soc_tes_next = state.t_tes, state.soc_tes
    if cfg.has_ess:
        soc_ess_next = _ess_soc_next(state.soc_ess, u.p_ess, u.mode_ess, cfg)
        if check and not (cfg.ess.soc_min - 1e-9 <= soc_ess_next
                          <= cfg.ess.soc_max + 1e-9):
            raise InfeasibleStateError(
                f"ess.soc: {soc_ess_next:.6g} outside "
                f"[{cfg.ess.soc_min}, {cfg.ess.soc_max}]")
    else:
        soc_ess_next = state.soc_ess

    tau_up_g = state.tau_up_g.copy()
    tau_dn_g = state.tau_down_g.copy()
    for i in range(cfg.n_g):
        if u.on_g[i] == 1:
            tau_up_g[i] = tau_up_g[i] + 1 if state.gen_status(i) == 1 else 1
            tau_dn_g[i] = 0
        else:
            tau_dn_g[i] = tau_dn_g[i] + 1 if state.gen_status(i) == 0 else 1
            tau_up_g[i] = 0
    if u.on_gt == 1:
        tau_up_gt = state.tau_up_gt + 1 if state.gt_status == 1 else 1
        tau_dn_gt = 0
    else:
        tau_dn_gt = state.tau_down_gt + 1 if state.gt_status == 0 else 1
        tau_up_gt = 0
    return SystemState(t_tes=t_next, soc_ess=soc_ess_next, soc_tes=soc_tes_next,
                       tau_up_g=tau_up_g, tau_down_g=tau_dn_g,
                       tau_up_gt=tau_up_gt, tau_down_gt=tau_dn_gt)


def _box_violation(value: float, lo: float, hi: float) -> float:
    return max(lo - value, value - hi, 0.0)


def _audit_step(u: DecisionVector, state: SystemState, p_l: float, q_l: float,
                p_r: float, cfg: MesConfig, prev_p_g: np.ndarray,
                prev_p_gt: float, k: int, tol: float) -> list[Violation]:
    viols: list[Violation] = []

    def box(name: str, value: float, lo: float, hi: float):
        amt = _box_violation(value, lo, hi)
        if amt > tol:
            viols.append(Violation(name, k, amt))

    for i, g in enumerate(cfg.generators):
        on = int(u.on_g[i])
        box(f"generators[{i}].power", float(u.p_g[i]), on * g.p_min, on * g.p_max)
        ramp = abs(float(u.p_g[i]) - float(prev_p_g[i])) - g.ramp
        if ramp > tol:
            viols.append(Violation(f"generators[{i}].ramp", k, ramp))
    if cfg.has_gt:
        gt = cfg.gas_turbine
        box("gas_turbine.power", u.p_gt, u.on_gt * gt.p_min, u.on_gt * gt.p_max)
        box("gas_turbine.ac_output", u.q_ac, u.on_gt * gt.q_ac_min,
            u.on_gt * gt.q_ac_max)
        coupling = abs(u.q_ac - u.on_gt * gt.thermal_gain * u.p_gt)
        if coupling > tol:
            viols.append(Violation("gas_turbine.ac_coupling", k, coupling))
        ramp = abs(u.p_gt - prev_p_gt) - gt.ramp
        if ramp > tol:
            viols.append(Violation("gas_turbine.ramp", k, ramp))
    else:
        if abs(u.p_gt) > tol or abs(u.q_ac) > tol or u.on_gt != 0:
            viols.append(Violation("gas_turbine.absent", k,
                                   abs(u.p_gt) + abs(u.q_ac) + u.on_gt))
    for j, ch in enumerate(cfg.chillers):
        on = int(u.on_c[j])
        box(f"chillers[{j}].flow", float(u.mdot[j]), on * ch.mdot_min,
            on * ch.mdot_max)
    box("grid.power", u.p_gr, cfg.grid.p_min, cfg.grid.p_max)
    if cfg.has_ess:
        lo, hi = (0.0, cfg.ess.p_max) if u.mode_ess == 1 else (cfg.ess.p_min, 0.0)
        box("ess.power", u.p_ess, lo, hi)
    elif abs(u.p_ess) > tol or u.mode_ess != 0:
        viols.append(Violation("ess.absent", k, abs(u.p_ess) + u.mode_ess))
    if cfg.has_tes:
        lo, hi = (0.0, cfg.tes.p_max) if u.mode_tes == 1 else (cfg.tes.p_min, 0.0)
        box("tes.power", u.p_tes, lo, hi)
    elif abs(u.p_tes) > tol or u.mode_tes != 0:
        viols.append(Violation("tes.absent", k, abs(u.p_tes) + u.mode_tes))

    r_e = electrical_balance_residual(u, p_l, p_r, cfg)
    if abs(r_e) > tol:
        viols.append(Violation("balance.electrical", k, abs(r_e)))
    r_q = thermal_balance_residual(u, q_l, cfg)
    if abs(r_q) > tol:
        viols.append(Violation("balance.thermal", k, abs(r_q)))
    return viols


def evaluate_minlp_point(plan: Sequence[DecisionVector], state: SystemState,
                         exo: ExogenousSeries, cfg: MesConfig,
                         prev: Optional[DecisionVector] = None,
                         tol: float = BALANCE_TOL_SOLVER
                         ) -> tuple[float, FeasibilityReport]:
    """Ground-truth evaluation of a candidate schedule.

    Returns the summed stage cost over the plan together with a full audit:
    operating boxes, ramps, both balances, temporal windows, and the
    time-coupled storage dynamics with their state boxes.  This is the
    evaluator every solver and every oracle in the package is checked
    against.
    """
    plan = list(plan)
    h = len(plan)
    if len(exo) < h:
        raise DimensionMismatchError(
            f"plan has {h} steps but series only {len(exo)}")
    if prev is None:
        prev = DecisionVector.all_off(cfg)

    layout = BinaryLayout(cfg)
    binaries = np.stack([u.binaries(layout) for u in plan])
    viols = list(check_temporal(binaries, state, cfg).violations)

    total = 0.0
    cur = state
    prev_p_g, prev_p_gt = prev.p_g, prev.p_gt
    for k, u in enumerate(plan):
        viols.extend(_audit_step(u, cur, float(exo.p_l[k]), float(exo.q_l[k]),
                                 float(exo.p_r[k]), cfg, prev_p_g, prev_p_gt,
                                 k, tol))
        total += stage_cost(u, float(exo.c_gr[k]), cfg)
        nxt = advance_state(cur, u, cfg, check=False)
        if cfg.has_tes:
            amt = _box_violation(nxt.t_tes, cfg.tes.t_min, cfg.tes.t_max)
            if amt > tol:
                viols.append(Violation("tes.temperature", k, amt))
            amt = _box_violation(nxt.soc_tes, cfg.tes.soc_min, cfg.tes.soc_max)
            if amt > tol:
                viols.append(Violation("tes.soc", k, amt))
        if cfg.has_ess:
            amt = _box_violation(nxt.soc_ess, cfg.ess.soc_min, cfg.ess.soc_max)
            if amt > tol:
                viols.append(Violation("ess.soc", k, amt))
        cur = nxt
        prev_p_g, prev_p_gt = u.p_g, u.p_gt
    return total, FeasibilityReport(ok=not viols, violations=tuple(viols))
