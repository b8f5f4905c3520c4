"""
Palm framework geometry

The four palm actuators form a closed four-bar loop. Its residual degree of
freedom is fixed by the length of the diagonal between vertices 0 and 2;
resolve_embedding picks the diagonal whose embedding has the largest
minimum internal angle.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from config import PALM_MAX_MM, PALM_MIN_MM
from utils import geometry
from utils.logger import get_logger
from utils.validators import (
    DegenerateGeometryError,
    InfeasibleGeometryError,
    RangeError,
    validate_float,
    validate_integer,
)

logger = get_logger(__name__)

ACTUATOR_RANGE = (PALM_MIN_MM, PALM_MAX_MM)
# Coarse diagonal samples before the bounded refinement
SCAN_POINTS = 400


class TemplateKind(Enum):
    KITE = "Kite"
    RECTANGLE = "Rectangle"
    TRAPEZOID = "Trapezoid"


class ShapeClass(Enum):
    KITE = "Kite"
    RECTANGLE = "Rectangle"
    TRAPEZOID = "Trapezoid"
    GENERAL = "General"


@dataclass(frozen=True)
class PalmConfiguration:
    sides: Tuple[float, float, float, float]
    diagonal: float
    vertices: Tuple[Tuple[float, float], ...] = field(default=(), compare=False)
    angles: Tuple[float, float, float, float] = field(default=(), compare=False)

    @classmethod
    def build(cls, sides: Sequence[float], diagonal: float,
              actuator_range: Optional[Tuple[float, float]] = ACTUATOR_RANGE) -> "PalmConfiguration":
        """
        Embed and freeze a palm

        Raises:
            RangeError: If a side is outside actuator_range (pass None to skip)
            InfeasibleGeometryError: If no convex embedding exists for the diagonal
        """
        sides = _check_sides(sides, actuator_range)
        verts = embed_quadrilateral(sides, diagonal)
        return cls(
            sides=sides,
            diagonal=float(diagonal),
            vertices=tuple((float(x), float(y)) for x, y in verts),
            angles=internal_angles(verts),
        )

    @property
    def vertex_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @property
    def min_angle(self) -> float:
        return min(self.angles)

    @property
    def centroid(self) -> np.ndarray:
        return geometry.centroid(self.vertices)

    def to_dict(self) -> dict:
        return {
            "sides_mm": list(self.sides),
            "diagonal_mm": self.diagonal,
            "vertices_mm": [list(v) for v in self.vertices],
            "angles_deg": list(self.angles),
        }


@dataclass(frozen=True)
class ShapeTemplate:
    kind: TemplateKind
    param_x: float
    param_y: float


@dataclass
class ManifoldGrid:
    """min_angle[j, i] belongs to (x_values[i], y_values[j]); NaN where infeasible."""
    kind: TemplateKind
    x_values: np.ndarray
    y_values: np.ndarray
    min_angle: np.ndarray
    feasible: np.ndarray

    def rows(self):
        for j, y in enumerate(self.y_values):
            for i, x in enumerate(self.x_values):
                yield float(x), float(y), float(self.min_angle[j, i]), bool(self.feasible[j, i])

    @property
    def feasible_count(self) -> int:
        return int(self.feasible.sum())


def _check_sides(sides, actuator_range=None) -> Tuple[float, float, float, float]:
    values = list(sides)
    if len(values) != 4:
        raise InfeasibleGeometryError(f"A palm needs 4 sides, got {len(values)}", "side count")
    checked = tuple(validate_float(s, f"Side {i}", error_cls=InfeasibleGeometryError)
                    for i, s in enumerate(values))
    if min(checked) <= 0:
        raise InfeasibleGeometryError("Side lengths must be positive", "positive sides")
    if actuator_range is not None:
        lo, hi = actuator_range
        for i, s in enumerate(checked):
            if s < lo - 1e-9 or s > hi + 1e-9:
                raise RangeError(f"Side {i} = {s:.3f} mm outside actuator range [{lo}, {hi}] mm")
    return checked


def _polygon_inequality(sides) -> None:
    total = sum(sides)
    for i, s in enumerate(sides):
        if s >= total - s:
            raise InfeasibleGeometryError(
                f"Side {i} = {s} mm is not shorter than the sum of the other three ({total - s} mm)",
                "polygon inequality",
            )


def diagonal_interval(sides) -> Tuple[float, float]:
    a, b, c, d = sides
    return max(abs(a - b), abs(c - d)), min(a + b, c + d)


def _embed_many(sides, diagonals: np.ndarray) -> np.ndarray:
    a, b, c, d = sides
    e = np.asarray(diagonals, dtype=float)
    alpha = np.arccos(np.clip((a * a + e * e - b * b) / (2 * a * e), -1.0, 1.0))
    beta = np.arccos(np.clip((e * e + d * d - c * c) / (2 * e * d), -1.0, 1.0))
    verts = np.zeros(e.shape + (4, 2))
    verts[..., 1, 0] = a
    verts[..., 2, 0] = e * np.cos(alpha)
    verts[..., 2, 1] = e * np.sin(alpha)
    verts[..., 3, 0] = d * np.cos(alpha + beta)
    verts[..., 3, 1] = d * np.sin(alpha + beta)
    return verts


def _min_angle_many(verts: np.ndarray) -> np.ndarray:
    """Minimum internal angle of each embedding; -inf where the quadrilateral is not strictly convex."""
    to_prev = np.roll(verts, 1, axis=-2) - verts
    to_next = np.roll(verts, -1, axis=-2) - verts
    cross = to_next[..., 0] * to_prev[..., 1] - to_next[..., 1] * to_prev[..., 0]
    dot = np.sum(to_next * to_prev, axis=-1)
    angles = np.degrees(np.arctan2(np.abs(cross), dot))
    convex = np.all(cross > 1e-9, axis=-1)
    return np.where(convex, angles.min(axis=-1), -np.inf)


def embed_quadrilateral(sides: Sequence[float], diagonal: float) -> np.ndarray:
    """
    Place a convex quadrilateral with the given sides and 0-2 diagonal

    Vertex 0 sits at the origin, vertex 1 on +x, orientation counterclockwise.

    Raises:
        InfeasibleGeometryError: Names the violated constraint
    """
    sides = _check_sides(sides)
    _polygon_inequality(sides)
    a, b, c, d = sides
    e = validate_float(diagonal, "Diagonal", error_cls=InfeasibleGeometryError)
    if not abs(a - b) < e < a + b:
        raise InfeasibleGeometryError(
            f"Diagonal {e} mm violates |a-b| < diagonal < a+b for a={a}, b={b}", "triangle inequality (a, b)")
    if not abs(c - d) < e < c + d:
        raise InfeasibleGeometryError(
            f"Diagonal {e} mm violates |c-d| < diagonal < c+d for c={c}, d={d}", "triangle inequality (c, d)")
    verts = _embed_many(sides, np.array(e))
    if not geometry.is_convex_ccw(verts):
        raise InfeasibleGeometryError(f"Diagonal {e} mm gives a non-convex embedding", "convexity")
    return verts


def internal_angles(vertices) -> Tuple[float, float, float, float]:
    """Interior angles in degrees; raises DegenerateGeometryError on collinear vertices."""
    angles = geometry.interior_angles(vertices)
    if len(angles) != 4:
        raise DegenerateGeometryError(f"Expected 4 vertices, got {len(angles)}")
    return tuple(float(a) for a in angles)


def resolve_embedding(sides: Sequence[float],
                      actuator_range: Optional[Tuple[float, float]] = ACTUATOR_RANGE) -> PalmConfiguration:
    """
    Choose the diagonal that maximises the minimum internal angle

    A coarse scan over the open feasible interval brackets the optimum, and a
    bounded scalar search refines it.

    Raises:
        InfeasibleGeometryError: On the polygon inequality or when no diagonal gives a convex embedding
    """
    sides = _check_sides(sides, actuator_range)
    _polygon_inequality(sides)
    lo, hi = diagonal_interval(sides)
    if lo >= hi:
        raise InfeasibleGeometryError(f"Empty diagonal interval [{lo}, {hi}]", "diagonal interval")

    grid = np.linspace(lo, hi, SCAN_POINTS + 2)[1:-1]
    scores = _min_angle_many(_embed_many(sides, grid))
    best = int(np.argmax(scores))
    if not np.isfinite(scores[best]):
        raise InfeasibleGeometryError(f"No convex embedding for sides {sides}", "convexity")

    step = grid[1] - grid[0] if len(grid) > 1 else (hi - lo) / 2
    left, right = max(grid[best] - step, lo), min(grid[best] + step, hi)

    def objective(e):
        value = float(_min_angle_many(_embed_many(sides, np.array(e))))
        return -value if np.isfinite(value) else 1e6

    result = minimize_scalar(objective, bounds=(left, right), method='bounded', options={'xatol': 1e-7})
    diagonal = float(result.x) if -result.fun >= scores[best] else float(grid[best])
    return PalmConfiguration.build(sides, diagonal, actuator_range=None)


def shape_template_to_lengths(t: ShapeTemplate,
                              actuator_range: Tuple[float, float] = ACTUATOR_RANGE) -> Tuple[Tuple[float, ...], float]:
    """
    Side lengths and 0-2 diagonal of a template

    Kite: (x, x, y, y), right angles at vertices 0 and 2.
    Rectangle: (x, y, x, y).
    Trapezoid: bottom x, top y, equal legs at mean(x, y).

    Raises:
        RangeError: If a parameter or derived side is outside actuator_range
    """
    lo, hi = actuator_range
    x = validate_float(t.param_x, "param_x", min_value=lo, max_value=hi, error_cls=RangeError)
    y = validate_float(t.param_y, "param_y", min_value=lo, max_value=hi, error_cls=RangeError)

    if t.kind is TemplateKind.RECTANGLE:
        return (x, y, x, y), math.hypot(x, y)
    if t.kind is TemplateKind.KITE:
        return (x, x, y, y), 2.0 * x * y / math.hypot(x, y)

    leg = min(max(0.5 * (x + y), lo), hi)
    half_gap = 0.5 * (x - y)
    height = math.sqrt(leg * leg - half_gap * half_gap)
    return (x, leg, y, leg), math.hypot(0.5 * (x + y), height)


def template_configuration(t: ShapeTemplate) -> PalmConfiguration:
    sides, diagonal = shape_template_to_lengths(t)
    return PalmConfiguration.build(sides, diagonal)


def _parallel(u: np.ndarray, v: np.ndarray, angle_tol: float) -> bool:
    cos = abs(float(np.dot(u, v))) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.degrees(math.acos(min(cos, 1.0))) <= angle_tol


def classify_shape(vertices, angle_tol: float = 2.0, length_tol: float = 2.0) -> ShapeClass:
    """Rectangle beats Kite beats Trapezoid; anything else is General."""
    verts = geometry.as_array(vertices)
    angles = geometry.interior_angles(verts)
    if np.all(np.abs(angles - 90.0) <= angle_tol):
        return ShapeClass.RECTANGLE

    s = geometry.side_lengths(verts)

    def close(i, j):
        return abs(s[i] - s[j]) <= length_tol

    if (close(0, 1) and close(2, 3)) or (close(1, 2) and close(3, 0)):
        return ShapeClass.KITE

    edges = np.roll(verts, -1, axis=0) - verts
    first = _parallel(edges[0], edges[2], angle_tol)
    second = _parallel(edges[1], edges[3], angle_tol)
    if first != second:
        return ShapeClass.TRAPEZOID
    return ShapeClass.GENERAL


def classify_palm(palm: PalmConfiguration, kinematics_section: dict) -> ShapeClass:
    """classify_shape with the tolerances from the kinematics config section."""
    return classify_shape(palm.vertices, kinematics_section["angle_tol_deg"], kinematics_section["length_tol_mm"])


def sweep_manifold(kind: TemplateKind, x_range: Tuple[float, float] = ACTUATOR_RANGE,
                   y_range: Tuple[float, float] = ACTUATOR_RANGE, n: int = 21) -> ManifoldGrid:
    """Minimum internal angle over an n x n template grid; per-point infeasibility is recorded, not raised."""
    n = validate_integer(n, "Grid size", min_value=2)
    for lo, hi in (x_range, y_range):
        if lo < PALM_MIN_MM or hi > PALM_MAX_MM or lo > hi:
            raise RangeError(f"Sweep range [{lo}, {hi}] outside actuator range {ACTUATOR_RANGE}")

    xs = np.linspace(x_range[0], x_range[1], n)
    ys = np.linspace(y_range[0], y_range[1], n)
    min_angle = np.full((n, n), np.nan)
    feasible = np.zeros((n, n), dtype=bool)
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            try:
                sides, _ = shape_template_to_lengths(ShapeTemplate(kind, float(x), float(y)))
                palm = resolve_embedding(sides)
            except (InfeasibleGeometryError, RangeError):
                continue
            min_angle[j, i] = palm.min_angle
            feasible[j, i] = True

    if not feasible.any():
        logger.warning(f"{kind.value} manifold sweep has no feasible point")
    return ManifoldGrid(kind=kind, x_values=xs, y_values=ys, min_angle=min_angle, feasible=feasible)
