"""Per-timestep data-center physics: IT power, thermal chain, HVAC, water, heat recovery.

The model evaluates one 15-minute step as a pure function of the parameter block,
the current CRAC setpoint, aggregate utilizations, and ambient weather:

    inlet temps -> component powers -> rack outlet temps -> CRAC return temp
    -> cooling load -> chiller/fans/pumps -> water draw -> energy

Utilizations are fractions in [0, 1] everywhere. All servers in a site share the
aggregate utilization; heterogeneity below the rack level is out of scope.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum

logger = logging.getLogger(__name__)

MINUTES_PER_STEP = 15.0
STEP_HOURS = MINUTES_PER_STEP / 60.0


class HvacAction(Enum):
    DOWN_1C = -1
    HOLD = 0
    UP_1C = 1


@dataclass(frozen=True)
class WeatherSample:
    drybulb_c: float
    wetbulb_c: float


@dataclass(frozen=True)
class DcPhysicsParams:
    """Physical constants of one site. Immutable after load.

    CPU/fan curves are linear in inlet temperature between the lower/upper ratio
    bounds over ``inlet_temp_range_c``; GPU power is logarithmic in utilization.
    """

    # layout
    num_racks: int = 4
    cpus_per_rack: int = 50
    gpus_per_rack: int = 10
    supply_approach_temps_c: tuple = ()
    return_approach_temps_c: tuple = ()

    # server characteristics
    cpu_power_ratio_lb: tuple = (0.01, 1.00)
    cpu_power_ratio_ub: tuple = (0.03, 1.02)
    inlet_temp_range_c: tuple = (16.0, 28.0)
    cpu_idle_w: float = 110.0  # nameplate reference; the ratio curve governs actual idle draw
    cpu_full_w: float = 170.0
    gpu_idle_w: float = 25.0
    gpu_full_w: float = 250.0
    fan_airflow_ratio_lb: tuple = (0.01, 0.225)
    fan_airflow_ratio_ub: tuple = (0.225, 1.0)
    fan_ref_w: float = 10.0
    fan_ref_ratio: float = 1.0
    fan_full_load_v_m3s: float = 0.051
    fan_power_exponent: float = 1.0
    mem_w_per_gb: float = 0.07
    design_it_load_w: float = 1.0e6
    # rack outlet model T_out = T_in + c*P^d / (Cp*rho*V^e*f) + g
    thermal_coeffs: tuple = (1.0, 1.0, 1.0, 1.0, 0.0)

    # air properties
    c_air: float = 1006.0
    rho_air: float = 1.225

    # hvac chain
    crac_fan_ref_w: float = 150.0
    crac_supply_flow_pu: float = 5.663e-5  # kg/s per W of IT load
    crac_ref_flow_pu: float = 9.438e-5
    ct_fan_ref_w: float = 1000.0
    ct_ref_air_flow_m3s: float = 2.8315
    ct_delta_t_k: float = 10.0
    cw_pressure_drop_pa: float = 3.0e5
    ct_pressure_drop_pa: float = 3.0e5
    cw_pump_eff: float = 0.87
    ct_pump_eff: float = 0.87
    cw_flow_m3s: float = 0.0011
    ct_flow_m3s: float = 0.0011
    chiller_cop_nominal: float = 5.0
    chiller_cop_ambient_slope: float = 0.1
    chiller_cop_min: float = 1.5
    chiller_capacity_w: float = 1.2e6
    chiller_min_load_fraction: float = 0.2

    # water
    water_drift_rate: float = 0.002
    heat_reject_unit_w: float = 1.0e6
    condenser_t_range_k: float = 5.0

    # heat recovery
    hru_ave_hlp_w_m2k: float = 5.0
    hru_dc_area_pu_m2_per_w: float = 0.001
    hru_office_area_m2: float = 5000.0
    hru_office_guide_temp_c: float = 21.0
    hru_it_load_cap_fraction: float = 0.25

    setpoint_range_c: tuple = (18.0, 27.0)

    def __post_init__(self):
        if self.num_racks < 1:
            raise ValueError("num_racks must be >= 1")
        if self.cpus_per_rack < 0 or self.gpus_per_rack < 0:
            raise ValueError("per-rack device counts must be >= 0")
        for name in ("supply_approach_temps_c", "return_approach_temps_c"):
            vals = tuple(getattr(self, name))
            if not vals:
                vals = (0.0,) * self.num_racks
            if len(vals) != self.num_racks:
                raise ValueError(f"{name} must have one entry per rack ({self.num_racks})")
            object.__setattr__(self, name, vals)
        for name in ("cpu_power_ratio_lb", "cpu_power_ratio_ub",
                     "fan_airflow_ratio_lb", "fan_airflow_ratio_ub"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for lb, ub in ((self.cpu_power_ratio_lb, self.cpu_power_ratio_ub),
                       (self.fan_airflow_ratio_lb, self.fan_airflow_ratio_ub)):
            if lb[0] > ub[0] or lb[1] > ub[1]:
                raise ValueError("ratio lower bounds must not exceed upper bounds")
        lo, hi = self.inlet_temp_range_c
        if lo >= hi:
            raise ValueError("inlet_temp_range_c must be ordered")
        object.__setattr__(self, "inlet_temp_range_c", (float(lo), float(hi)))
        lo, hi = self.setpoint_range_c
        if lo >= hi:
            raise ValueError("setpoint_range_c must be ordered")
        object.__setattr__(self, "setpoint_range_c", (float(lo), float(hi)))
        object.__setattr__(self, "thermal_coeffs", tuple(self.thermal_coeffs))
        if len(self.thermal_coeffs) != 5:
            raise ValueError("thermal_coeffs must be (c, d, e, f, g)")
        if self.thermal_coeffs[3] == 0:
            raise ValueError("thermal_coeffs f must be nonzero")
        for name in ("cpu_full_w", "gpu_full_w", "fan_ref_w", "crac_fan_ref_w",
                     "ct_fan_ref_w", "ct_ref_air_flow_m3s", "crac_supply_flow_pu",
                     "crac_ref_flow_pu", "design_it_load_w", "chiller_capacity_w",
                     "heat_reject_unit_w", "ct_delta_t_k", "c_air", "rho_air"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("cw_pump_eff", "ct_pump_eff"):
            eff = getattr(self, name)
            if not 0 < eff <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")

    # linear curve coefficients shared by the CPU and fan models
    @property
    def cpu_slope(self) -> float:
        lo, hi = self.inlet_temp_range_c
        return (self.cpu_power_ratio_ub[0] - self.cpu_power_ratio_lb[0]) / (hi - lo)

    @property
    def cpu_intercept(self) -> float:
        return self.cpu_power_ratio_ub[0] - self.cpu_slope * self.inlet_temp_range_c[1]

    @property
    def cpu_ratio_shift(self) -> float:
        return self.cpu_power_ratio_lb[1] - self.cpu_power_ratio_lb[0]

    @property
    def fan_slope(self) -> float:
        lo, hi = self.inlet_temp_range_c
        return (self.fan_airflow_ratio_ub[0] - self.fan_airflow_ratio_lb[0]) / (hi - lo)

    @property
    def fan_intercept(self) -> float:
        return self.fan_airflow_ratio_ub[0] - self.fan_slope * self.inlet_temp_range_c[1]

    @property
    def fan_ratio_shift(self) -> float:
        return self.fan_airflow_ratio_lb[1] - self.fan_airflow_ratio_lb[0]


@dataclass(frozen=True)
class DcStepResult:
    """Energy, water and temperature outputs of one 15-minute physics step."""

    it_power_w: float
    crac_fan_w: float
    chiller_w: float
    ct_fan_w: float
    pump_w: float
    total_power_w: float
    energy_kwh: float
    water_l_15min: float
    crac_return_temp_c: float
    rack_outlet_temps_c: tuple
    hru_recovered_w: float
    setpoint_c: float


@dataclass(frozen=True)
class HvacBreakdown:
    crac_fan_w: float
    chiller_w: float
    ct_fan_w: float
    pump_w: float
    water_m3_per_hr: float
    hru_recovered_w: float
    q_crac_w: float
    q_effective_w: float


def _clamp(x, lo, hi):
    return min(max(x, lo), hi)


def cpu_power(params: DcPhysicsParams, t_inlet_c: float, u_cpu: float) -> float:
    """CPU draw in W: full-load power times the temperature/utilization ratio curve.

    Inlet temperatures outside the operating range are clamped, not rejected.
    """
    t = _clamp(t_inlet_c, *params.inlet_temp_range_c)
    ratio = params.cpu_slope * t + params.cpu_intercept + params.cpu_ratio_shift * u_cpu
    return params.cpu_full_w * ratio


def gpu_power(params: DcPhysicsParams, u_gpu: float) -> float:
    """GPU draw in W: idle + (full - idle) * log2(1 + u)."""
    if not 0.0 <= u_gpu <= 1.0:
        raise ValueError(f"u_gpu {u_gpu} outside [0, 1]")
    return params.gpu_idle_w + (params.gpu_full_w - params.gpu_idle_w) * math.log2(1.0 + u_gpu)


def memory_power_per_rack(params: DcPhysicsParams, total_mem_gb: float, num_racks: int) -> float:
    """Static DRAM draw per rack: capacity split evenly across racks."""
    if num_racks < 1:
        raise ValueError("num_racks must be >= 1")
    if total_mem_gb < 0:
        raise ValueError("total_mem_gb must be >= 0")
    return params.mem_w_per_gb * total_mem_gb / num_racks


def fan_velocity_ratio(params: DcPhysicsParams, t_inlet_c: float, u_eff: float) -> float:
    t = _clamp(t_inlet_c, *params.inlet_temp_range_c)
    return params.fan_slope * t + params.fan_intercept + params.fan_ratio_shift * u_eff


def fan_power(params: DcPhysicsParams, t_inlet_c: float, u_eff: float) -> float:
    """Server-fan draw in W from the velocity-ratio curve.

    ``u_eff`` is the aggregate thermal load fraction the fan must remove
    (CPU, GPU and memory combined).
    """
    ratio = fan_velocity_ratio(params, t_inlet_c, u_eff)
    return params.fan_ref_w * (ratio / params.fan_ref_ratio) ** params.fan_power_exponent


def fan_airflow_m3s(params: DcPhysicsParams, t_inlet_c: float, u_eff: float) -> float:
    """Volumetric airflow one server fan moves at the current velocity ratio."""
    return params.fan_full_load_v_m3s * fan_velocity_ratio(params, t_inlet_c, u_eff)


def total_it_power(
    params: DcPhysicsParams,
    rack_inlet_temps_c,
    u_cpu: float,
    u_gpu: float,
    total_mem_gb: float,
    layout,
) -> tuple[float, list[float]]:
    """Sum component powers over racks.

    ``layout`` is one (num_servers, num_gpus) pair per rack; all servers in a
    rack share that rack's inlet temperature and the aggregate utilizations.
    Returns (total W, per-rack W).
    """
    if len(layout) != len(rack_inlet_temps_c):
        raise ValueError("layout and rack_inlet_temps_c must have one entry per rack")
    if not layout:
        raise ValueError("layout must contain at least one rack")
    u_eff = _clamp(0.5 * (u_cpu + u_gpu), 0.0, 1.0)
    n_racks = len(layout)
    per_rack = []
    for t_in, (n_servers, n_gpus) in zip(rack_inlet_temps_c, layout):
        if n_servers < 0 or n_gpus < 0:
            raise ValueError("layout counts must be >= 0")
        p = n_servers * (cpu_power(params, t_in, u_cpu) + fan_power(params, t_in, u_eff))
        p += n_gpus * gpu_power(params, u_gpu)
        p += memory_power_per_rack(params, total_mem_gb, n_racks)
        per_rack.append(p)
    return sum(per_rack), per_rack


def rack_outlet_temp(
    params: DcPhysicsParams, t_in_c: float, rack_power_w: float, fan_flow_m3s: float
) -> float:
    """Rack outlet temperature from the energy-balance model with empirical coefficients."""
    if fan_flow_m3s <= 0:
        raise ValueError("fan_flow_m3s must be > 0")
    c, d, e, f, g = params.thermal_coeffs
    rise = c * rack_power_w ** d / (params.c_air * params.rho_air * fan_flow_m3s ** e * f)
    return t_in_c + rise + g


def crac_return_temp(params: DcPhysicsParams, rack_outlet_temps_c) -> float:
    """Mean over racks of outlet temperature plus the rack's return approach offset."""
    outs = list(rack_outlet_temps_c)
    if not outs:
        raise ValueError("at least one rack outlet temperature is required")
    if len(outs) != len(params.return_approach_temps_c):
        raise ValueError("one outlet temperature per configured rack is required")
    return sum(t + dt for t, dt in zip(outs, params.return_approach_temps_c)) / len(outs)


def pump_power(pressure_drop_pa: float, flow_m3s: float, efficiency: float) -> float:
    """Hydraulic pump draw in W: pressure drop times volume flow over efficiency."""
    if not 0 < efficiency <= 1:
        raise ValueError("efficiency must lie in (0, 1]")
    if pressure_drop_pa < 0 or flow_m3s < 0:
        raise ValueError("pressure drop and flow must be >= 0")
    return pressure_drop_pa * flow_m3s / efficiency


def chiller_cop(params: DcPhysicsParams, t_drybulb_c: float) -> float:
    """Ambient-degraded coefficient of performance, floored at the minimum COP."""
    cop = params.chiller_cop_nominal - params.chiller_cop_ambient_slope * (t_drybulb_c - 20.0)
    return max(params.chiller_cop_min, cop)


def heat_recovery_w(params: DcPhysicsParams, t_drybulb_c: float) -> float:
    """Recoverable office-heating duty in W; zero when outdoors is warmer than the office target."""
    t_delta = max(params.hru_office_guide_temp_c - t_drybulb_c, 0.0)
    q_dc_office = (
        params.hru_ave_hlp_w_m2k * params.hru_dc_area_pu_m2_per_w
        * params.design_it_load_w * t_delta
    )
    q_ext_office = params.hru_ave_hlp_w_m2k * params.hru_office_area_m2 * t_delta
    return q_dc_office + q_ext_office


def hvac_step(
    params: DcPhysicsParams,
    it_power_w: float,
    t_return_c: float,
    setpoint_c: float,
    t_drybulb_c: float,
    t_wetbulb_c: float,
    hru_enabled: bool = False,
) -> HvacBreakdown:
    """Evaluate the cooling chain for one step.

    The CRAC load is carried by an air mass flow proportional to IT power; heat
    recovery (when enabled) offsets at most a fixed fraction of the IT load and
    never drives the effective cooling load negative. Pumps draw their constant
    hydraulic power whenever the plant is on.
    """
    lo, hi = params.setpoint_range_c
    if not lo <= setpoint_c <= hi:
        raise ValueError(f"setpoint {setpoint_c} outside [{lo}, {hi}]")
    if it_power_w < 0:
        raise ValueError("it_power_w must be >= 0")

    m_dot = params.crac_supply_flow_pu * it_power_w
    q_crac = m_dot * params.c_air * max(t_return_c - setpoint_c, 0.0)

    recovered = 0.0
    if hru_enabled:
        potential = heat_recovery_w(params, t_drybulb_c)
        recovered = min(potential, params.hru_it_load_cap_fraction * it_power_w)
    q_effective = max(q_crac - recovered, 0.0)
    q_served = min(q_effective, params.chiller_capacity_w)

    crac_fan = (
        params.crac_fan_ref_w
        * (params.crac_supply_flow_pu / params.crac_ref_flow_pu) ** 3
        * (it_power_w / params.design_it_load_w)
    )

    if q_served > 0.0:
        load_fraction = q_served / params.chiller_capacity_w
        effective_fraction = max(load_fraction, params.chiller_min_load_fraction)
        chiller = params.chiller_capacity_w * effective_fraction / chiller_cop(params, t_drybulb_c)
    else:
        chiller = 0.0

    v_air = q_served / (params.c_air * params.rho_air * params.ct_delta_t_k)
    ct_fan = params.ct_fan_ref_w * (v_air / params.ct_ref_air_flow_m3s) ** 3

    pumps = pump_power(params.cw_pressure_drop_pa, params.cw_flow_m3s, params.cw_pump_eff)
    pumps += pump_power(params.ct_pressure_drop_pa, params.ct_flow_m3s, params.ct_pump_eff)

    w_norm = water_usage_rate(params.condenser_t_range_k, t_wetbulb_c)
    w_evap = max(w_norm, 0.0) * q_served / params.heat_reject_unit_w
    w_total = w_evap * (1.0 + params.water_drift_rate)

    return HvacBreakdown(
        crac_fan_w=crac_fan,
        chiller_w=chiller,
        ct_fan_w=ct_fan,
        pump_w=pumps,
        water_m3_per_hr=w_total,
        hru_recovered_w=recovered,
        q_crac_w=q_crac,
        q_effective_w=q_effective,
    )


def water_usage_rate(t_range_k: float, t_wetbulb_c: float) -> float:
    """Normalized evaporative water usage (m3/hr per heat-rejection unit)."""
    y_intercept = 0.3528 * t_range_k + 0.101
    return 0.044 * t_wetbulb_c + y_intercept


def water_to_15min_liters(w_total_m3_per_hr: float) -> float:
    """Convert an hourly water rate in m3/hr to liters per 15-minute interval."""
    if w_total_m3_per_hr < 0:
        raise ValueError("water rate must be >= 0")
    return w_total_m3_per_hr * 1000.0 / 4.0


def apply_hvac_action(params: DcPhysicsParams, setpoint_c: float, action: HvacAction) -> float:
    """Move the CRAC setpoint by +/-1 degC (or hold), clamped to the valid range."""
    return _clamp(setpoint_c + float(action.value), *params.setpoint_range_c)


def dc_physics_step(
    params: DcPhysicsParams,
    setpoint_c: float,
    u_cpu: float,
    u_gpu: float,
    mem_used_gb: float,
    weather: WeatherSample,
    setpoint_action: HvacAction | None = None,
    hru_enabled: bool = False,
) -> DcStepResult:
    """Run the full IT -> thermal -> HVAC chain for one 15-minute step.

    Pure in its inputs: the returned ``setpoint_c`` is the effective setpoint
    after applying ``setpoint_action``; the caller owns persisting it.
    """
    for name, u in (("u_cpu", u_cpu), ("u_gpu", u_gpu)):
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"{name} {u} outside [0, 1]")
    if mem_used_gb < 0:
        raise ValueError("mem_used_gb must be >= 0")
    lo, hi = params.setpoint_range_c
    if not lo <= setpoint_c <= hi:
        raise ValueError(f"setpoint {setpoint_c} outside [{lo}, {hi}]")

    setpoint = setpoint_c
    if setpoint_action is not None:
        setpoint = apply_hvac_action(params, setpoint_c, setpoint_action)

    t_lo, t_hi = params.inlet_temp_range_c
    inlets = []
    for approach in params.supply_approach_temps_c:
        t_in = setpoint + approach
        clamped = _clamp(t_in, t_lo, t_hi)
        if clamped != t_in:
            logger.warning(
                "inlet temperature %.2f degC clamped to [%.1f, %.1f]", t_in, t_lo, t_hi
            )
        inlets.append(clamped)

    layout = [(params.cpus_per_rack, params.gpus_per_rack)] * params.num_racks
    it_power, per_rack = total_it_power(params, inlets, u_cpu, u_gpu, mem_used_gb, layout)

    # All CRAC supply air is pushed through the racks in equal shares, so with the
    # default outlet coefficients the heat handed to the CRAC matches IT power.
    m_dot_sys = params.crac_supply_flow_pu * it_power
    g = params.thermal_coeffs[4]
    if m_dot_sys > 0.0:
        v_rack = m_dot_sys / (params.num_racks * params.rho_air)
        outlets = [
            rack_outlet_temp(params, t_in, p, v_rack) for t_in, p in zip(inlets, per_rack)
        ]
    else:
        outlets = [t_in + g for t_in in inlets]
    t_return = crac_return_temp(params, outlets)

    hv = hvac_step(
        params, it_power, t_return, setpoint,
        weather.drybulb_c, weather.wetbulb_c, hru_enabled,
    )

    total = it_power + hv.crac_fan_w + hv.chiller_w + hv.ct_fan_w + hv.pump_w
    return DcStepResult(
        it_power_w=it_power,
        crac_fan_w=hv.crac_fan_w,
        chiller_w=hv.chiller_w,
        ct_fan_w=hv.ct_fan_w,
        pump_w=hv.pump_w,
        total_power_w=total,
        energy_kwh=total * STEP_HOURS / 1000.0,
        water_l_15min=water_to_15min_liters(hv.water_m3_per_hr),
        crac_return_temp_c=t_return,
        rack_outlet_temps_c=tuple(outlets),
        hru_recovered_w=hv.hru_recovered_w,
        setpoint_c=setpoint,
    )


# JSON parameter block: section and key names follow the conventional dc-config layout.
def params_to_config(params: DcPhysicsParams) -> dict:
    return {
        "data_center_configuration": {
            "NUM_RACKS": params.num_racks,
            "CPUS_PER_RACK": params.cpus_per_rack,
            "GPUS_PER_RACK": params.gpus_per_rack,
            "RACK_SUPPLY_APPROACH_TEMP_LIST": list(params.supply_approach_temps_c),
            "RACK_RETURN_APPROACH_TEMP_LIST": list(params.return_approach_temps_c),
        },
        "server_characteristics": {
            "CPU_POWER_RATIO_LB": list(params.cpu_power_ratio_lb),
            "CPU_POWER_RATIO_UB": list(params.cpu_power_ratio_ub),
            "INLET_TEMP_RANGE": list(params.inlet_temp_range_c),
            "HP_PROLIANT": [params.cpu_idle_w, params.cpu_full_w],   # [idle W, full W]
            "NVIDIA_V100": [params.gpu_idle_w, params.gpu_full_w],   # [idle W, full W]
            "IT_FAN_AIRFLOW_RATIO_LB": list(params.fan_airflow_ratio_lb),
            "IT_FAN_AIRFLOW_RATIO_UB": list(params.fan_airflow_ratio_ub),
            "IT_FAN_FULL_LOAD_V": params.fan_full_load_v_m3s,
            "ITFAN_REF_V_RATIO": params.fan_ref_ratio,
            "ITFAN_REF_P": params.fan_ref_w,
            "IT_FAN_POWER_EXPONENT": params.fan_power_exponent,
            "MEM_POWER_PER_GB": params.mem_w_per_gb,
            "DESIGN_IT_LOAD_W": params.design_it_load_w,
            "THERMAL_COEFFS": list(params.thermal_coeffs),
        },
        "hvac_configuration": {
            "C_AIR": params.c_air,
            "RHO_AIR": params.rho_air,
            "CRAC_FAN_REF_P": params.crac_fan_ref_w,
            "CRAC_SUPPLY_AIR_FLOW_RATE_pu": params.crac_supply_flow_pu,
            "CRAC_REFERENCE_AIR_FLOW_RATE_pu": params.crac_ref_flow_pu,
            "CT_FAN_REF_P": params.ct_fan_ref_w,
            "CT_REFERENCE_AIR_FLOW_RATE": params.ct_ref_air_flow_m3s,
            "CT_DELTA_T": params.ct_delta_t_k,
            "CW_PRESSURE_DROP": params.cw_pressure_drop_pa,
            "CT_PRESSURE_DROP": params.ct_pressure_drop_pa,
            "CW_PUMP_EFFICIENCY": params.cw_pump_eff,
            "CT_PUMP_EFFICIENCY": params.ct_pump_eff,
            "CW_WATER_FLOW_RATE": params.cw_flow_m3s,
            "CT_WATER_FLOW_RATE": params.ct_flow_m3s,
            "CHILLER_COP_NOMINAL": params.chiller_cop_nominal,
            "CHILLER_COP_AMBIENT_SLOPE": params.chiller_cop_ambient_slope,
            "CHILLER_COP_MIN": params.chiller_cop_min,
            "CHILLER_CAPACITY_W": params.chiller_capacity_w,
            "CHILLER_MIN_LOAD_FRACTION": params.chiller_min_load_fraction,
            "CONDENSER_T_RANGE": params.condenser_t_range_k,
            "WATER_DRIFT_RATE": params.water_drift_rate,
            "HEAT_REJECT_UNIT_W": params.heat_reject_unit_w,
            "SETPOINT_RANGE": list(params.setpoint_range_c),
            "HRU": {
                "AVE_HLP": params.hru_ave_hlp_w_m2k,
                "DC_AREA_PU": params.hru_dc_area_pu_m2_per_w,
                "OFFICE_BUILDING_AREA": params.hru_office_area_m2,
                "OFFICE_GUIDE_TEMP": params.hru_office_guide_temp_c,
                "IT_LOAD_CAP_FRACTION": params.hru_it_load_cap_fraction,
            },
        },
    }


def params_from_config(doc: dict) -> DcPhysicsParams:
    """Build a parameter block from the JSON document; absent keys keep defaults."""
    defaults = DcPhysicsParams()
    dc = doc.get("data_center_configuration", {})
    sc = doc.get("server_characteristics", {})
    hc = doc.get("hvac_configuration", {})
    hru = hc.get("HRU", {})

    def pick(section, key, default):
        return section.get(key, default)

    hp = pick(sc, "HP_PROLIANT", [defaults.cpu_idle_w, defaults.cpu_full_w])
    v100 = pick(sc, "NVIDIA_V100", [defaults.gpu_idle_w, defaults.gpu_full_w])
    return DcPhysicsParams(
        num_racks=int(pick(dc, "NUM_RACKS", defaults.num_racks)),
        cpus_per_rack=int(pick(dc, "CPUS_PER_RACK", defaults.cpus_per_rack)),
        gpus_per_rack=int(pick(dc, "GPUS_PER_RACK", defaults.gpus_per_rack)),
        supply_approach_temps_c=tuple(pick(dc, "RACK_SUPPLY_APPROACH_TEMP_LIST", ())),
        return_approach_temps_c=tuple(pick(dc, "RACK_RETURN_APPROACH_TEMP_LIST", ())),
        cpu_power_ratio_lb=tuple(pick(sc, "CPU_POWER_RATIO_LB", defaults.cpu_power_ratio_lb)),
        cpu_power_ratio_ub=tuple(pick(sc, "CPU_POWER_RATIO_UB", defaults.cpu_power_ratio_ub)),
        inlet_temp_range_c=tuple(pick(sc, "INLET_TEMP_RANGE", defaults.inlet_temp_range_c)),
        cpu_idle_w=float(hp[0]),
        cpu_full_w=float(hp[1]),
        gpu_idle_w=float(v100[0]),
        gpu_full_w=float(v100[1]),
        fan_airflow_ratio_lb=tuple(pick(sc, "IT_FAN_AIRFLOW_RATIO_LB", defaults.fan_airflow_ratio_lb)),
        fan_airflow_ratio_ub=tuple(pick(sc, "IT_FAN_AIRFLOW_RATIO_UB", defaults.fan_airflow_ratio_ub)),
        fan_full_load_v_m3s=float(pick(sc, "IT_FAN_FULL_LOAD_V", defaults.fan_full_load_v_m3s)),
        fan_ref_ratio=float(pick(sc, "ITFAN_REF_V_RATIO", defaults.fan_ref_ratio)),
        fan_ref_w=float(pick(sc, "ITFAN_REF_P", defaults.fan_ref_w)),
        fan_power_exponent=float(pick(sc, "IT_FAN_POWER_EXPONENT", defaults.fan_power_exponent)),
        mem_w_per_gb=float(pick(sc, "MEM_POWER_PER_GB", defaults.mem_w_per_gb)),
        design_it_load_w=float(pick(sc, "DESIGN_IT_LOAD_W", defaults.design_it_load_w)),
        thermal_coeffs=tuple(pick(sc, "THERMAL_COEFFS", defaults.thermal_coeffs)),
        c_air=float(pick(hc, "C_AIR", defaults.c_air)),
        rho_air=float(pick(hc, "RHO_AIR", defaults.rho_air)),
        crac_fan_ref_w=float(pick(hc, "CRAC_FAN_REF_P", defaults.crac_fan_ref_w)),
        crac_supply_flow_pu=float(pick(hc, "CRAC_SUPPLY_AIR_FLOW_RATE_pu", defaults.crac_supply_flow_pu)),
        crac_ref_flow_pu=float(pick(hc, "CRAC_REFERENCE_AIR_FLOW_RATE_pu", defaults.crac_ref_flow_pu)),
        ct_fan_ref_w=float(pick(hc, "CT_FAN_REF_P", defaults.ct_fan_ref_w)),
        ct_ref_air_flow_m3s=float(pick(hc, "CT_REFERENCE_AIR_FLOW_RATE", defaults.ct_ref_air_flow_m3s)),
        ct_delta_t_k=float(pick(hc, "CT_DELTA_T", defaults.ct_delta_t_k)),
        cw_pressure_drop_pa=float(pick(hc, "CW_PRESSURE_DROP", defaults.cw_pressure_drop_pa)),
        ct_pressure_drop_pa=float(pick(hc, "CT_PRESSURE_DROP", defaults.ct_pressure_drop_pa)),
        cw_pump_eff=float(pick(hc, "CW_PUMP_EFFICIENCY", defaults.cw_pump_eff)),
        ct_pump_eff=float(pick(hc, "CT_PUMP_EFFICIENCY", defaults.ct_pump_eff)),
        cw_flow_m3s=float(pick(hc, "CW_WATER_FLOW_RATE", defaults.cw_flow_m3s)),
        ct_flow_m3s=float(pick(hc, "CT_WATER_FLOW_RATE", defaults.ct_flow_m3s)),
        chiller_cop_nominal=float(pick(hc, "CHILLER_COP_NOMINAL", defaults.chiller_cop_nominal)),
        chiller_cop_ambient_slope=float(pick(hc, "CHILLER_COP_AMBIENT_SLOPE", defaults.chiller_cop_ambient_slope)),
        chiller_cop_min=float(pick(hc, "CHILLER_COP_MIN", defaults.chiller_cop_min)),
        chiller_capacity_w=float(pick(hc, "CHILLER_CAPACITY_W", defaults.chiller_capacity_w)),
        chiller_min_load_fraction=float(pick(hc, "CHILLER_MIN_LOAD_FRACTION", defaults.chiller_min_load_fraction)),
        condenser_t_range_k=float(pick(hc, "CONDENSER_T_RANGE", defaults.condenser_t_range_k)),
        water_drift_rate=float(pick(hc, "WATER_DRIFT_RATE", defaults.water_drift_rate)),
        heat_reject_unit_w=float(pick(hc, "HEAT_REJECT_UNIT_W", defaults.heat_reject_unit_w)),
        setpoint_range_c=tuple(pick(hc, "SETPOINT_RANGE", defaults.setpoint_range_c)),
        hru_ave_hlp_w_m2k=float(hru.get("AVE_HLP", defaults.hru_ave_hlp_w_m2k)),
        hru_dc_area_pu_m2_per_w=float(hru.get("DC_AREA_PU", defaults.hru_dc_area_pu_m2_per_w)),
        hru_office_area_m2=float(hru.get("OFFICE_BUILDING_AREA", defaults.hru_office_area_m2)),
        hru_office_guide_temp_c=float(hru.get("OFFICE_GUIDE_TEMP", defaults.hru_office_guide_temp_c)),
        hru_it_load_cap_fraction=float(hru.get("IT_LOAD_CAP_FRACTION", defaults.hru_it_load_cap_fraction)),
    )


def load_dc_config(path) -> DcPhysicsParams:
    with open(path) as fh:
        return params_from_config(json.load(fh))


def save_dc_config(params: DcPhysicsParams, path) -> None:
    with open(path, "w") as fh:
        json.dump(params_to_config(params), fh, indent=2)


def desk_scale_params(**overrides) -> DcPhysicsParams:
    """A small plant sized for fast test scenarios (~50 kW design IT load)."""
    base = dict(
        num_racks=4,
        cpus_per_rack=50,
        gpus_per_rack=10,
        design_it_load_w=5.0e4,
        chiller_capacity_w=6.0e4,
    )
    base.update(overrides)
    return DcPhysicsParams(**base)
