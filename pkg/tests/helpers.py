"""Shared fixtures and independent oracles used across the test suite.

The oracles here intentionally avoid the library code paths they check:
temporal feasibility is re-derived by directly simulating status counters,
and optima are found by discretized exhaustive search over the free degrees
of freedom after eliminating the balance equalities.
"""
from __future__ import annotations

import itertools

import numpy as np

from mesopt.config import (MesConfig, GeneratorParams, GasTurbineParams,
                           ChillerParams, GridParams, TesParams, EssParams)
from mesopt.model import (DecisionVector, SystemState, ExogenousSeries,
                          evaluate_minlp_point)


def toy_config(ramp: float = 500.0, dt: float = 0.5) -> MesConfig:
    """1 generator + 1 chiller + grid; no turbine, no storage.

    The generator cost and grid price are chosen so the continuous optimum
    of the generator set-point, (c_gr - cost_b) / (2 * cost_a), lands exactly
    on the 21-level discretization grid of [100, 300].
    """
    return MesConfig(
        dt=dt,
        generators=(GeneratorParams(p_min=100.0, p_max=300.0, ramp=ramp,
                                    min_up=1, min_down=1,
                                    cost_a=1.0e-4, cost_b=0.02, cost_c=2.0),),
        gas_turbine=None,
        chillers=(ChillerParams(mdot_min=1000.0, mdot_max=80000.0, cop=3.0),),
        c_rho=4.2, delta_t_c=5.0,
        grid=GridParams(p_min=-500.0, p_max=2000.0),
        tes=None, ess=None)


def toy_exo(n: int = 2) -> ExogenousSeries:
    p_l = np.full(n, 400.0)
    q_l = np.full(n, 90.0)
    p_r = np.zeros(n)
    c_d = np.full(n, 0.06)
    c_rt = np.zeros(n)
    return ExogenousSeries(p_l, q_l, p_r, c_d, c_rt)


def toy_state(cfg: MesConfig) -> SystemState:
    n_g = cfg.n_g
    return SystemState(t_tes=0.0, soc_ess=0.0, soc_tes=0.0,
                       tau_up_g=np.zeros(n_g, dtype=int),
                       tau_down_g=np.full(n_g, 10, dtype=int),
                       tau_up_gt=0, tau_down_gt=10)


def two_dg_one_gt_config(grid_max: float = 2000.0) -> MesConfig:
    """The 2-generator + 1-turbine plant used for temporal-logic studies."""
    gen = GeneratorParams(p_min=50.0, p_max=300.0, ramp=1000.0,
                          min_up=2, min_down=2,
                          cost_a=1.0e-4, cost_b=0.05, cost_c=1.0)
    gt = GasTurbineParams(p_min=50.0, p_max=500.0, ramp=1000.0,
                          min_up=2, min_down=2,
                          cost_a=1.0e-4, cost_b=0.04, cost_c=1.0,
                          heat_ratio=1.0, ac_cop=1.0,
                          q_ac_min=0.0, q_ac_max=500.0)
    return MesConfig(dt=0.5, generators=(gen, gen), gas_turbine=gt,
                     chillers=(), c_rho=4.2, delta_t_c=5.0,
                     grid=GridParams(p_min=0.0, p_max=grid_max),
                     tes=None, ess=None)


def two_dg_one_gt_state() -> SystemState:
    """Counters: G1 on for 2 steps, G2 on for 1, turbine off for 1."""
    return SystemState(t_tes=0.0, soc_ess=0.0, soc_tes=0.0,
                       tau_up_g=np.array([2, 1]), tau_down_g=np.array([0, 0]),
                       tau_up_gt=0, tau_down_gt=1)


def storage_config() -> MesConfig:
    """Small plant with both storage units, for relaxation and dynamics tests."""
    gen = GeneratorParams(p_min=50.0, p_max=400.0, ramp=600.0,
                          min_up=1, min_down=1,
                          cost_a=2.0e-4, cost_b=0.04, cost_c=1.0)
    tes = TesParams(volume=2.0, area=6.0, heat_loss=2.0, rho=1000.0,
                    mix_fraction=0.5, t_inlet=6.0, t_ambient=30.0,
                    t_min=4.0, t_max=14.0, soc_min=10.0, soc_max=500.0,
                    p_min=-100.0, p_max=200.0,
                    eta_charge=0.95, eta_discharge=0.95)
    ess = EssParams(soc_min=20.0, soc_max=180.0, p_min=-60.0, p_max=80.0,
                    eta_charge=0.95, eta_discharge=0.95, eta_loss=0.001,
                    unit_cost=30000.0, life_cycles=5000, capacity=200.0,
                    tau_charge=4, tau_discharge=4)
    return MesConfig(dt=0.5, generators=(gen,), gas_turbine=None,
                     chillers=(ChillerParams(mdot_min=500.0, mdot_max=40000.0,
                                             cop=3.0),),
                     c_rho=4.2, delta_t_c=5.0,
                     grid=GridParams(p_min=-200.0, p_max=1500.0),
                     tes=tes, ess=ess)


def mid_state(cfg: MesConfig) -> SystemState:
    from mesopt.model import initial_state
    return initial_state(cfg)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def simulate_temporal_ok(seq, status0: int, elapsed0: int, t_up: int,
                         t_dn: int) -> bool:
    """Counter-simulation oracle for one unit's minimum up/down times."""
    status, elapsed = status0, elapsed0
    for b in seq:
        if b != status:
            need = t_up if status == 1 else t_dn
            if elapsed < need:
                return False
            status, elapsed = int(b), 1
        else:
            elapsed += 1
    return True


def toy_decision(cfg: MesConfig, p_g: float, p_l: float, q_l: float,
                 on_g: int = 1) -> DecisionVector:
    """Balance-eliminated point of the 1-generator/1-chiller toy plant.

    The chiller flow follows from the thermal balance and the grid power
    from the electrical balance, leaving the generator set-point as the only
    free continuous variable.
    """
    mdot = q_l / cfg.q_per_flow
    p_c = q_l / cfg.chillers[0].cop
    p_gr = p_l + p_c - on_g * p_g
    return DecisionVector(
        p_g=np.array([p_g]), p_gt=0.0, q_ac=0.0, mdot=np.array([mdot]),
        p_ess=0.0, p_tes=0.0, p_gr=p_gr,
        on_g=np.array([on_g]), on_gt=0, mode_ess=0, mode_tes=0,
        on_c=np.array([1 if q_l > 0 else 0]))


def brute_force_toy_optimum(cfg: MesConfig, exo: ExogenousSeries,
                            state: SystemState, levels: int = 21
                            ) -> tuple[float, list[DecisionVector]]:
    """Exhaustive discretized optimum of the toy plant over the full horizon.

    Binaries are enumerated outright; the generator set-point is discretized
    to `levels` levels of its committed box; chiller flow and grid power are
    eliminated through the two balance equalities.  Every candidate plan is
    scored with the ground-truth evaluator, so this oracle is independent of
    all solver code.
    """
    g = cfg.generators[0]
    h = len(exo)
    grid = np.linspace(g.p_min, g.p_max, levels)
    per_step_choices = []
    for k in range(h):
        opts = [toy_decision(cfg, 0.0, float(exo.p_l[k]), float(exo.q_l[k]),
                             on_g=0)]
        opts.extend(toy_decision(cfg, float(p), float(exo.p_l[k]),
                                 float(exo.q_l[k]), on_g=1) for p in grid)
        per_step_choices.append(opts)
    best, best_plan = np.inf, None
    for plan in itertools.product(*per_step_choices):
        obj, report = evaluate_minlp_point(list(plan), state, exo, cfg)
        if report.ok and obj < best:
            best, best_plan = obj, list(plan)
    if best_plan is None:
        raise AssertionError("brute-force oracle found no feasible plan")
    return best, best_plan
