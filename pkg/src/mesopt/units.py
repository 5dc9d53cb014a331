"""Unit conversions and per-step normalization of physical coefficients.

Every conversion between the mixed units used by the plant model (kg/h mass
flows, kJ/kg degC specific heat, W/m2 degC loss coefficients, refrigeration
tons) lives here so there is exactly one place to audit.
"""

# 1 refrigeration ton expressed in kW of thermal power.
RT_TO_KW = 3.51685

# kJ/h -> kW
KJ_PER_H_TO_KW = 1.0 / 3600.0

# W -> kW
W_TO_KW = 1.0e-3


def chiller_q_per_flow(c_rho: float, delta_t_c: float) -> float:
    """Thermal kW produced per kg/h of chilled-water flow.

    mdot [kg/h] * c_rho [kJ/kg degC] * delta_t_c [degC] gives kJ/h.
    """
    return c_rho * delta_t_c * KJ_PER_H_TO_KW


def tes_flow_coeff(mix_fraction: float, volume: float, rho: float, dt: float) -> float:
    """Dimensionless temperature-mixing fraction per kg/h of flow per step.

    mdot [kg/h] * dt [h] is the mass moved in one step; dividing by the tank
    mass V*rho makes the mixing term dimensionless.
    """
    return mix_fraction * dt / (volume * rho)

def tes_loss_coeff(heat_loss: float, area: float, volume: float, rho: float,
                   c_rho: float, dt: float) -> float:
    """Dimensionless ambient-exchange fraction per step.

    heat_loss [W/m2 degC] * area [m2] is J/(s degC); over one step of
    3600*dt seconds, relative to the tank heat capacity V*rho*c_rho [kJ/degC].
    """
    return heat_loss * area * 3600.0 * dt / (volume * rho * c_rho * 1.0e3)


def tes_ambient_power_kw(heat_loss: float, area: float, delta_t: float) -> float:
    """Instantaneous ambient exchange H_L * A * delta_T, converted W -> kW."""
    return heat_loss * area * delta_t * W_TO_KW
