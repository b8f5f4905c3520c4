"""
Fixed-timestep simulation of the four palm and four finger actuators

Palm actuators always run the closed loop. Fingers either track an angle
setpoint or follow an open-loop pressure ramp that can be latched per
finger. A finger touching the object stops bending at its contact angle and
its bend sensor shows a sharp rise.
"""
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from control import PidState, ValvePolicy, control_tick, valve_command
from graspsim import FingerParams, Scene, bisector_distance, contact_angle, fingers_for
from plant import (
    ActuatorKind,
    ActuatorState,
    PneumaticParams,
    ValveCommand,
    default_curves,
    step_pneumatic,
)
from sensing import RISE_PROFILE
from utils.logger import get_logger
from utils.validators import ParameterError

logger = get_logger(__name__)

N_ACTUATORS = 4


class FingerMode(Enum):
    TRACK = "track"
    RAMP = "ramp"


@dataclass(frozen=True)
class SensorParams:
    offset: float = 2.0
    gain_per_deg: float = 0.05
    contact_gain: float = 25.0
    noise_sigma: float = 0.3

    @classmethod
    def from_config(cls, finger_section: dict) -> "SensorParams":
        return cls(
            offset=finger_section["sensor_offset"],
            gain_per_deg=finger_section["sensor_gain_per_deg"],
            contact_gain=finger_section["contact_gain"],
            noise_sigma=finger_section["noise_sigma"],
        )


@dataclass(frozen=True)
class GripperSnapshot:
    tick: int
    palm_pressures: tuple
    palm_lengths: tuple
    palm_valves: tuple
    finger_pressures: tuple
    finger_angles: tuple
    finger_valves: tuple
    ramp_setpoints: tuple
    sensor: tuple
    in_contact: tuple

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "palm_pressure_kpa": list(self.palm_pressures),
            "palm_length_mm": list(self.palm_lengths),
            "palm_valve": list(self.palm_valves),
            "finger_pressure_kpa": list(self.finger_pressures),
            "finger_angle_deg": list(self.finger_angles),
            "finger_valve": list(self.finger_valves),
            "ramp_setpoint_kpa": list(self.ramp_setpoints),
            "sensor": list(self.sensor),
            "in_contact": list(self.in_contact),
        }


class Gripper:
    """Eight actuators advanced in index order, one fixed step per tick."""

    def __init__(self, run_config, scene: Optional[Scene] = None, seed: Optional[int] = None):
        self.params = PneumaticParams.from_config(run_config.plant)
        self.palm_curve, self.finger_curve = default_curves(run_config.plant)
        self.finger_params = FingerParams.from_config(run_config.finger, run_config.plant)
        self.sensor_params = SensorParams.from_config(run_config.finger)

        self._palm_pid0 = PidState.from_config(run_config.palm_control, self.params.p_supply)
        self._finger_pid0 = PidState.from_config(run_config.finger_control, self.params.p_supply)
        self.palm_policy = ValvePolicy.from_config(run_config.palm_control)
        self.finger_policy = ValvePolicy.from_config(run_config.finger_control)

        self.palm = [ActuatorState.at_pressure(ActuatorKind.PALM, 0.0, self.palm_curve)
                     for _ in range(N_ACTUATORS)]
        self.fingers = [ActuatorState.at_pressure(ActuatorKind.FINGER, 0.0, self.finger_curve)
                        for _ in range(N_ACTUATORS)]
        self.palm_pids = [self._palm_pid0] * N_ACTUATORS
        self.finger_pids = [self._finger_pid0] * N_ACTUATORS
        self.palm_setpoints = [self.palm_curve.rest] * N_ACTUATORS
        self.finger_setpoints = [0.0] * N_ACTUATORS

        self.finger_mode = FingerMode.TRACK
        self.ramp_step = 0.0
        self.pressure_setpoints = [0.0] * N_ACTUATORS
        self.latched = [False] * N_ACTUATORS

        self.tick_count = 0
        self.seed = seed
        children = np.random.SeedSequence(seed).spawn(N_ACTUATORS)
        self._rngs = [np.random.default_rng(c) for c in children]

        self.scene = None
        self.contact_angles: List[Optional[float]] = [None] * N_ACTUATORS
        self.contact_distances: List[Optional[float]] = [None] * N_ACTUATORS
        self.contact_start: List[Optional[int]] = [None] * N_ACTUATORS
        self.last_readings = (0.0,) * N_ACTUATORS
        if scene is not None:
            self.set_scene(scene)

    # ---- scene and setpoints ----

    def set_scene(self, scene: Optional[Scene]) -> None:
        """Attach a palm/object scene and precompute every finger's contact angle."""
        self.scene = scene
        self.contact_angles = [None] * N_ACTUATORS
        self.contact_distances = [None] * N_ACTUATORS
        self.contact_start = [None] * N_ACTUATORS
        if scene is None or not scene.has_object:
            return
        polygon = np.asarray(scene.object_vertices)
        for finger in fingers_for(scene.palm, self.finger_params):
            d = bisector_distance(finger, polygon)
            self.contact_distances[finger.corner] = d
            if d is not None:
                self.contact_angles[finger.corner] = contact_angle(
                    self.finger_params.arc_length, d, self.finger_params.theta_max_deg)

    def set_palm_setpoints(self, lengths: Sequence[float]) -> None:
        if len(lengths) != N_ACTUATORS:
            raise ParameterError(f"Expected {N_ACTUATORS} palm setpoints")
        self.palm_setpoints = [float(v) for v in lengths]

    def set_finger_setpoints(self, angles: Sequence[float]) -> None:
        if len(angles) != N_ACTUATORS:
            raise ParameterError(f"Expected {N_ACTUATORS} finger setpoints")
        self.finger_mode = FingerMode.TRACK
        self.finger_setpoints = [float(v) for v in angles]
        self.finger_pids = [self._finger_pid0] * N_ACTUATORS
        self.latched = [False] * N_ACTUATORS

    def start_ramp(self, inflate_step: float) -> None:
        """Switch fingers to the open-loop pressure ramp starting from their current pressures."""
        if inflate_step <= 0:
            raise ParameterError("inflate_step must be positive")
        self.finger_mode = FingerMode.RAMP
        self.ramp_step = float(inflate_step)
        self.pressure_setpoints = [f.pressure for f in self.fingers]
        self.latched = [False] * N_ACTUATORS

    def latch(self, i: int) -> None:
        self.latched[i] = True

    # ---- queries ----

    def in_contact(self, i: int) -> bool:
        theta_c = self.contact_angles[i]
        return theta_c is not None and self.fingers[i].displacement >= theta_c

    def saturated(self, i: int) -> bool:
        return (not self.latched[i]
                and self.pressure_setpoints[i] >= self.params.p_supply
                and self.fingers[i].valve is ValveCommand.HOLD)

    def palm_settled(self, tolerance: float) -> bool:
        return all(abs(s.displacement - sp) <= tolerance and s.valve is ValveCommand.HOLD
                   for s, sp in zip(self.palm, self.palm_setpoints))

    def effective_angle(self, i: int) -> float:
        theta = self.fingers[i].displacement
        theta_c = self.contact_angles[i]
        return min(theta, theta_c) if theta_c is not None else theta

    # ---- stepping ----

    def _step_finger(self, i: int) -> None:
        state = self.fingers[i]
        if self.finger_mode is FingerMode.TRACK:
            self.fingers[i], self.finger_pids[i], _ = control_tick(
                state, self.finger_setpoints[i], self.finger_pids[i], self.finger_policy, self.params,
                self.finger_curve)
            return
        if self.latched[i]:
            valve = ValveCommand.HOLD
        else:
            self.pressure_setpoints[i] = min(self.pressure_setpoints[i] + self.ramp_step, self.params.p_supply)
            valve = valve_command(self.pressure_setpoints[i], state.pressure, self.finger_policy)
        self.fingers[i] = step_pneumatic(replace(state, valve=valve), self.params, self.finger_curve)

    def _read_sensor(self, i: int) -> float:
        sp = self.sensor_params
        rise = 0.0
        if self.in_contact(i):
            if self.contact_start[i] is None:
                self.contact_start[i] = self.tick_count
            k = self.tick_count - self.contact_start[i]
            rise = RISE_PROFILE[min(k, len(RISE_PROFILE) - 1)]
        else:
            self.contact_start[i] = None
        noise = self._rngs[i].normal(0.0, sp.noise_sigma) if sp.noise_sigma > 0 else 0.0
        return sp.offset + sp.gain_per_deg * self.effective_angle(i) + sp.contact_gain * rise + noise

    def tick(self) -> GripperSnapshot:
        for i in range(N_ACTUATORS):
            self.palm[i], self.palm_pids[i], _ = control_tick(
                self.palm[i], self.palm_setpoints[i], self.palm_pids[i], self.palm_policy, self.params,
                self.palm_curve)
        for i in range(N_ACTUATORS):
            self._step_finger(i)
        self.last_readings = tuple(float(self._read_sensor(i)) for i in range(N_ACTUATORS))
        snapshot = self.snapshot()
        self.tick_count += 1
        return snapshot

    def run(self, ticks: int) -> List[GripperSnapshot]:
        return [self.tick() for _ in range(ticks)]

    def snapshot(self) -> GripperSnapshot:
        return GripperSnapshot(
            tick=self.tick_count,
            palm_pressures=tuple(s.pressure for s in self.palm),
            palm_lengths=tuple(s.displacement for s in self.palm),
            palm_valves=tuple(s.valve.value for s in self.palm),
            finger_pressures=tuple(s.pressure for s in self.fingers),
            finger_angles=tuple(self.effective_angle(i) for i in range(N_ACTUATORS)),
            finger_valves=tuple(s.valve.value for s in self.fingers),
            ramp_setpoints=tuple(self.pressure_setpoints),
            sensor=self.last_readings,
            in_contact=tuple(self.in_contact(i) for i in range(N_ACTUATORS)),
        )
