"""
Per-actuator closed-loop control: displacement PID to target pressure, and
the inflate/hold/deflate valve decision
"""
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

from config import P_SUPPLY_KPA
from plant import ActuatorState, CalibrationCurve, PneumaticParams, ValveCommand, step_pneumatic
from utils.logger import get_logger
from utils.validators import ParameterError, SetpointError, validate_float

logger = get_logger(__name__)


@dataclass(frozen=True)
class PidState:
    """
    Gains and memory of one positional PID

    The integral only accumulates while |error| > integral_deadzone and is
    never committed while the output is saturated in the error's direction.
    """
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    integral: float = 0.0
    prev_error: Optional[float] = None
    integral_limit: float = 100.0
    integral_deadzone: float = 0.0
    output_limit: float = P_SUPPLY_KPA

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ParameterError("PID gains must be >= 0")
        if self.integral_limit < 0 or self.integral_deadzone < 0:
            raise ParameterError("integral_limit and integral_deadzone must be >= 0")
        if abs(self.integral) > self.integral_limit:
            raise ParameterError("|integral| exceeds integral_limit")

    @classmethod
    def from_config(cls, section: dict, p_supply: float = P_SUPPLY_KPA) -> "PidState":
        return cls(
            kp=section["kp"],
            ki=section["ki"],
            kd=section["kd"],
            integral_limit=section["integral_limit"],
            integral_deadzone=section["integral_deadzone"],
            output_limit=p_supply,
        )

    def reset(self) -> "PidState":
        return replace(self, integral=0.0, prev_error=None)


@dataclass(frozen=True)
class ValvePolicy:
    deadband: float = 1.5

    def __post_init__(self):
        if self.deadband <= 0:
            raise ParameterError("Valve deadband must be positive")

    @classmethod
    def from_config(cls, section: dict) -> "ValvePolicy":
        return cls(deadband=section["deadband_kpa"])


def pid_step(l_des: float, l_meas: float, pid: PidState, dt: float) -> Tuple[float, PidState]:
    """
    One positional PID update on error = l_des - l_meas

    Args:
        l_des: Desired displacement (mm or degrees)
        l_meas: Measured displacement
        pid: Controller state
        dt: Step in seconds

    Returns:
        (target pressure clamped to [0, output_limit], updated PidState)
    """
    if dt <= 0:
        raise ParameterError("dt must be positive")
    error = l_des - l_meas

    candidate = pid.integral
    if abs(error) > pid.integral_deadzone:
        candidate += error * dt
    candidate = min(max(candidate, -pid.integral_limit), pid.integral_limit)

    derivative = 0.0 if pid.prev_error is None else (error - pid.prev_error) / dt

    unclamped = pid.kp * error + pid.ki * candidate + pid.kd * derivative
    saturated = (unclamped > pid.output_limit and error > 0) or (unclamped < 0 and error < 0)
    integral = pid.integral if saturated else candidate

    output = pid.kp * error + pid.ki * integral + pid.kd * derivative
    output = min(max(output, 0.0), pid.output_limit)
    return output, replace(pid, integral=integral, prev_error=error)


def valve_command(p_target: float, p_meas: float, policy: ValvePolicy) -> ValveCommand:
    """Strict band edges: exactly at target +/- deadband holds."""
    if p_meas < p_target - policy.deadband:
        return ValveCommand.INFLATE
    if p_meas > p_target + policy.deadband:
        return ValveCommand.DEFLATE
    return ValveCommand.HOLD


def control_tick(state: ActuatorState, l_des: float, pid: PidState, policy: ValvePolicy,
                 params: PneumaticParams, curve: CalibrationCurve) -> Tuple[ActuatorState, PidState, float]:
    """measure -> pid_step -> valve_command -> step_pneumatic for one actuator."""
    p_target, pid = pid_step(l_des, state.displacement, pid, params.dt)
    valve = valve_command(p_target, state.pressure, policy)
    return step_pneumatic(replace(state, valve=valve), params, curve), pid, p_target


def track_setpoint(l_des: float, plant_state: ActuatorState, pid: PidState, policy: ValvePolicy,
                   params: PneumaticParams, curve: CalibrationCurve, max_ticks: int) -> List[ActuatorState]:
    """
    Run the closed loop toward l_des for max_ticks ticks

    Returns:
        Trajectory starting with plant_state; entry k+1 carries the valve
        command used during tick k

    Raises:
        SetpointError: If l_des lies outside the calibration range
    """
    l_des = validate_float(l_des, "Setpoint", error_cls=SetpointError)
    if l_des < curve.rest or l_des > curve.maximum:
        raise SetpointError(f"Setpoint {l_des} outside calibration range [{curve.rest}, {curve.maximum}]")
    if max_ticks < 0:
        raise ParameterError("max_ticks must be >= 0")

    trajectory = [plant_state]
    state = plant_state
    for _ in range(max_ticks):
        state, pid, _ = control_tick(state, l_des, pid, policy, params, curve)
        trajectory.append(state)
    logger.debug(f"Tracked {plant_state.kind.value} to {l_des}: final {state.displacement:.3f} "
                 f"after {max_ticks} ticks")
    return trajectory


def settling_tick(trajectory: List[ActuatorState], l_des: float, band: float) -> Optional[int]:
    """First index after which the displacement stays within +/- band of l_des; None if it never settles."""
    last_out = -1
    for i, s in enumerate(trajectory):
        if abs(s.displacement - l_des) > band:
            last_out = i
    if last_out == len(trajectory) - 1:
        return None
    return last_out + 1
