"""
Simulated pneumatic plant: calibration curves and first-order pressure dynamics
"""
import csv
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from config import P_SUPPLY_KPA
from utils.logger import get_logger
from utils.validators import ParameterError, RangeError, TraceParseError, validate_float

logger = get_logger(__name__)

# Allowed float slack when checking a pressure against [0, P_supply]
PRESSURE_EPS = 1e-9


class ActuatorKind(Enum):
    PALM = "Palm"
    FINGER = "Finger"


class CurveKind(Enum):
    PALM_LENGTH = "PalmLength"
    FINGER_ANGLE = "FingerAngle"


class ValveCommand(Enum):
    INFLATE = "Inflate"
    HOLD = "Hold"
    DEFLATE = "Deflate"


@dataclass(frozen=True)
class CalibrationCurve:
    """
    Piecewise-linear pressure to displacement map

    points are (pressure kPa, displacement mm or degrees), pressures strictly
    increasing from 0 to the supply pressure, displacements non-decreasing.
    """
    points: Tuple[Tuple[float, float], ...]
    kind: CurveKind

    def __post_init__(self):
        if len(self.points) < 2:
            raise ParameterError("A calibration curve needs at least two points")
        pressures = np.array([p for p, _ in self.points], dtype=float)
        values = np.array([v for _, v in self.points], dtype=float)
        if not np.all(np.isfinite(pressures)) or not np.all(np.isfinite(values)):
            raise ParameterError("Calibration points must be finite")
        if np.any(np.diff(pressures) <= 0):
            raise ParameterError("Calibration pressures must be strictly increasing")
        if np.any(np.diff(values) < 0):
            raise ParameterError("Calibration displacements must be non-decreasing")
        if abs(pressures[0]) > PRESSURE_EPS:
            raise ParameterError("Calibration curve must start at 0 kPa")

    @property
    def pressures(self) -> np.ndarray:
        return np.array([p for p, _ in self.points], dtype=float)

    @property
    def displacements(self) -> np.ndarray:
        return np.array([v for _, v in self.points], dtype=float)

    @property
    def p_max(self) -> float:
        return float(self.points[-1][0])

    @property
    def rest(self) -> float:
        return float(self.points[0][1])

    @property
    def maximum(self) -> float:
        return float(self.points[-1][1])

    def __call__(self, pressure: float) -> float:
        p = validate_float(pressure, "Pressure", error_cls=RangeError)
        if p < -PRESSURE_EPS or p > self.p_max + PRESSURE_EPS:
            raise RangeError(f"Pressure {p:.3f} kPa outside [0, {self.p_max}] kPa")
        return float(np.interp(p, self.pressures, self.displacements))

    def check_supply(self, p_supply: float) -> "CalibrationCurve":
        """
        Require the top knot at the supply pressure

        Raises:
            ParameterError: If the last pressure differs from p_supply
        """
        if abs(self.p_max - p_supply) > PRESSURE_EPS * max(1.0, p_supply):
            raise ParameterError(f"{self.kind.value} curve ends at {self.p_max} kPa, "
                                 f"expected the supply pressure {p_supply} kPa")
        return self

    @classmethod
    def linear(cls, kind: CurveKind, rest: float, maximum: float,
               p_supply: float = P_SUPPLY_KPA) -> "CalibrationCurve":
        return cls(points=((0.0, float(rest)), (float(p_supply), float(maximum))), kind=kind)

    @classmethod
    def from_csv(cls, path: str, kind: CurveKind, p_supply: Optional[float] = P_SUPPLY_KPA) -> "CalibrationCurve":
        """
        Load a curve from a `pressure_kpa,displacement` CSV

        Raises:
            TraceParseError: On a bad header, a short row, a non-numeric cell, or
                a last knot other than p_supply (None skips that check)
        """
        points = []
        with open(path, 'r', newline='', encoding='utf-8') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["pressure_kpa", "displacement"]:
                raise TraceParseError("expected header 'pressure_kpa,displacement'", 1)
            for line_number, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != 2:
                    raise TraceParseError(f"expected 2 columns, got {len(row)}", line_number)
                try:
                    points.append((float(row[0]), float(row[1])))
                except ValueError:
                    raise TraceParseError(f"non-numeric value in {row}", line_number)
        try:
            curve = cls(points=tuple(points), kind=kind)
            if p_supply is not None:
                curve.check_supply(p_supply)
        except ParameterError as e:
            raise TraceParseError(str(e)) from e
        logger.info(f"Loaded {kind.value} calibration curve with {len(points)} points from {path}")
        return curve

    def to_csv(self, path: str) -> None:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(["pressure_kpa", "displacement"])
            for p, v in self.points:
                writer.writerow([repr(float(p)), repr(float(v))])


@dataclass(frozen=True)
class PneumaticParams:
    p_supply: float = P_SUPPLY_KPA
    k_in: float = 2.0
    k_out: float = 2.0
    leak: float = 0.0
    dt: float = 0.01

    def __post_init__(self):
        for name in ("p_supply", "k_in", "k_out", "leak"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0")
        if self.dt <= 0:
            raise ParameterError("dt must be positive")
        if self.dt * max(self.k_in, self.k_out) >= 1.0:
            raise ParameterError("dt * max(k_in, k_out) must be below 1")

    @classmethod
    def from_config(cls, plant_section: dict) -> "PneumaticParams":
        return cls(
            p_supply=plant_section["p_supply_kpa"],
            k_in=plant_section["k_in"],
            k_out=plant_section["k_out"],
            leak=plant_section["leak"],
            dt=plant_section["dt_s"],
        )


@dataclass(frozen=True)
class ActuatorState:
    pressure: float
    valve: ValveCommand
    displacement: float
    kind: ActuatorKind

    @classmethod
    def at_pressure(cls, kind: ActuatorKind, pressure: float, curve: CalibrationCurve,
                    valve: ValveCommand = ValveCommand.HOLD) -> "ActuatorState":
        return cls(pressure=float(pressure), valve=valve, displacement=curve(pressure), kind=kind)


def default_curves(plant_section: dict) -> Tuple[CalibrationCurve, CalibrationCurve]:
    """Palm and finger curves from the plant config section (CSV paths win over the linear default)."""
    p_supply = plant_section["p_supply_kpa"]
    if plant_section.get("palm_curve_csv"):
        palm = CalibrationCurve.from_csv(plant_section["palm_curve_csv"], CurveKind.PALM_LENGTH, p_supply)
    else:
        palm = CalibrationCurve.linear(CurveKind.PALM_LENGTH, plant_section["palm_rest_mm"],
                                       plant_section["palm_max_mm"], p_supply)
    if plant_section.get("finger_curve_csv"):
        finger = CalibrationCurve.from_csv(plant_section["finger_curve_csv"], CurveKind.FINGER_ANGLE,
                                           p_supply)
    else:
        finger = CalibrationCurve.linear(CurveKind.FINGER_ANGLE, 0.0,
                                         plant_section["finger_theta_max_deg"], p_supply)
    return palm, finger


def palm_length_from_pressure(p: float, curve: CalibrationCurve) -> float:
    """
    Palm actuator length for a pressure

    Args:
        p: Pressure in kPa, within [0, P_supply]
        curve: PalmLength calibration curve

    Returns:
        Length in mm

    Raises:
        RangeError: If the pressure is outside the curve's range
    """
    if curve.kind is not CurveKind.PALM_LENGTH:
        raise ParameterError(f"Expected a PalmLength curve, got {curve.kind.value}")
    return curve(p)


def finger_angle_from_pressure(p: float, curve: CalibrationCurve) -> float:
    """Finger bend angle in degrees for a pressure in kPa."""
    if curve.kind is not CurveKind.FINGER_ANGLE:
        raise ParameterError(f"Expected a FingerAngle curve, got {curve.kind.value}")
    return curve(p)


def step_pneumatic(s: ActuatorState, params: PneumaticParams, curve: CalibrationCurve) -> ActuatorState:
    """One explicit Euler step of the valve-driven pressure ODE."""
    p = s.pressure
    if s.valve is ValveCommand.INFLATE:
        p = p + params.k_in * (params.p_supply - p) * params.dt
    elif s.valve is ValveCommand.DEFLATE:
        p = p - params.k_out * p * params.dt
    else:
        p = p - params.leak * p * params.dt
    p = min(max(p, 0.0), params.p_supply)
    return replace(s, pressure=p, displacement=curve(min(p, curve.p_max)))


def characterize(curve: CalibrationCurve, points: int = 21) -> Sequence[Tuple[float, float]]:
    """Evenly spaced (pressure, displacement) samples from 0 to the curve's top pressure."""
    if points < 2:
        raise ParameterError("A characterization sweep needs at least two points")
    pressures = np.linspace(0.0, curve.p_max, points)
    return [(float(p), curve(float(p))) for p in pressures]


def closed_form_pressure(p0: float, valve: ValveCommand, params: PneumaticParams, t: float) -> float:
    """Exact solution of the pressure ODE after t seconds under a constant valve."""
    if valve is ValveCommand.INFLATE:
        return params.p_supply - (params.p_supply - p0) * float(np.exp(-params.k_in * t))
    rate = params.k_out if valve is ValveCommand.DEFLATE else params.leak
    return p0 * float(np.exp(-rate * t))


def run_valve_sequence(s: ActuatorState, commands: Iterable[ValveCommand], params: PneumaticParams,
                       curve: CalibrationCurve, limit: Optional[int] = None):
    """Apply a sequence of valve commands and return every intermediate state."""
    states = [s]
    for i, cmd in enumerate(commands):
        if limit is not None and i >= limit:
            break
        states.append(step_pneumatic(replace(states[-1], valve=cmd), params, curve))
    return states
