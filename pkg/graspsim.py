"""
2D quasi-static grasp evaluation

Objects are convex cross-sections at the grasp plane. A grasp needs the
object to fit inside the palm (the arm can descend) and a majority of the
four corner fingers to reach it along their interior bisectors.
"""
import csv
import json
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from config import DATA_DIR, PALM_MAX_MM
from kinematics import PalmConfiguration, ShapeTemplate, TemplateKind, template_configuration
from utils import geometry
from utils.logger import get_logger
from utils.validators import CatalogError, ParameterError

logger = get_logger(__name__)

OBJECTS_FILE = os.path.join(DATA_DIR, 'objects.json')
FIXED_CONFIGS_FILE = os.path.join(DATA_DIR, 'fixed_configs.json')
PUBLISHED_FILES = {
    "table2": os.path.join(DATA_DIR, 'table2_published.csv'),
    "table3": os.path.join(DATA_DIR, 'table3_published.csv'),
}
TABLE3_OBJECTS = ("Pear", "6-Face Cube", "Cup Noodles")
TABLE3_TEMPLATES = (TemplateKind.RECTANGLE, TemplateKind.TRAPEZOID, TemplateKind.KITE)
UNROTATED_SHAPES = ("Round", "Octagon")


class FailureReason(Enum):
    NO_DESCEND = "NoDescend"
    INSUFFICIENT_CONTACTS = "InsufficientContacts"
    SLIP = "Slip"
    OVERSIZE = "Oversize"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    shape: str
    cross_section: Tuple[Tuple[float, float], ...]
    height: float
    dims: str = ""
    abbrev: str = ""
    category: str = "standard"

    def __post_init__(self):
        verts = geometry.as_array(self.cross_section)
        if len(verts) < 3 or geometry.signed_area(verts) <= 0:
            raise ParameterError(f"Object {self.name} needs a counterclockwise polygon with positive area")
        if not geometry.is_convex_ccw(verts, eps=-1e-9):
            raise ParameterError(f"Object {self.name} cross-section is not convex")

    @property
    def vertex_array(self) -> np.ndarray:
        return np.asarray(self.cross_section, dtype=float)

    @property
    def rotatable(self) -> bool:
        return self.shape not in UNROTATED_SHAPES

    @property
    def footprint(self) -> Tuple[float, float]:
        return geometry.extents(self.cross_section)

    def scaled(self, factor: float) -> "ObjectSpec":
        verts = self.vertex_array * float(factor)
        return ObjectSpec(name=f"{self.name} x{factor:g}", shape=self.shape,
                          cross_section=tuple(map(tuple, verts)), height=self.height * factor,
                          dims=self.dims, abbrev=self.abbrev, category=self.category)

    def to_dict(self) -> dict:
        width, depth = self.footprint
        return {
            "name": self.name,
            "abbrev": self.abbrev,
            "shape": self.shape,
            "category": self.category,
            "dims": self.dims,
            "height_mm": self.height,
            "footprint_mm": [width, depth],
            "cross_section_mm": [list(v) for v in self.cross_section],
        }


@dataclass(frozen=True)
class FingerParams:
    arc_length: float = 64.5
    theta_max_deg: float = 160.0

    @classmethod
    def from_config(cls, finger_section: dict, plant_section: dict) -> "FingerParams":
        return cls(arc_length=finger_section["arc_length_mm"],
                   theta_max_deg=plant_section["finger_theta_max_deg"])

    @property
    def max_reach(self) -> float:
        return max_projected_reach(self.arc_length, self.theta_max_deg)[0]


@dataclass(frozen=True)
class FingerModel:
    """A finger mounted at a palm corner, bending inward along the corner's interior bisector."""
    corner: int
    origin: Tuple[float, float]
    direction: Tuple[float, float]
    arc_length: float
    theta_max_deg: float

    def curvature(self, theta_deg: float) -> float:
        """1/mm; theta = arc_length * curvature."""
        return math.radians(theta_deg) / self.arc_length


@dataclass(frozen=True)
class Contact:
    corner: int
    point: Tuple[float, float]
    distance: float
    theta_deg: float
    curvature: float = 0.0


@dataclass(frozen=True)
class GraspOutcome:
    feasible_approach: bool
    contacts: Tuple[bool, bool, bool, bool]
    contact_points: Tuple[Optional[Tuple[float, float]], ...]
    distances: Tuple[Optional[float], ...]
    success: bool
    failure_reason: Optional[FailureReason] = None

    @property
    def contact_count(self) -> int:
        return sum(self.contacts)

    @property
    def cell(self) -> str:
        return "S" if self.success else f"F:{self.failure_reason.value}"

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "feasible_approach": self.feasible_approach,
            "contacts": list(self.contacts),
            "contact_points": [list(p) if p is not None else None for p in self.contact_points],
            "distances_mm": list(self.distances),
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
        }


@dataclass(frozen=True)
class Scene:
    """A palm and an object polygon in palm (world) coordinates."""
    palm: PalmConfiguration
    object_vertices: Optional[Tuple[Tuple[float, float], ...]]
    obj: Optional[ObjectSpec] = field(default=None, compare=False)

    @classmethod
    def placed(cls, palm: PalmConfiguration, obj: ObjectSpec, offset=(0.0, 0.0)) -> "Scene":
        verts = place_object(palm, obj, offset)
        return cls(palm=palm, object_vertices=tuple(map(tuple, verts)), obj=obj)

    @classmethod
    def explicit(cls, palm: PalmConfiguration, polygon) -> "Scene":
        """Object polygon given directly in palm coordinates."""
        verts = geometry.as_array(polygon)
        if geometry.signed_area(verts) < 0:
            verts = verts[::-1]
        return cls(palm=palm, object_vertices=tuple(map(tuple, verts)))

    @classmethod
    def empty(cls, palm: PalmConfiguration) -> "Scene":
        return cls(palm=palm, object_vertices=None)

    @property
    def has_object(self) -> bool:
        return self.object_vertices is not None


# ================= CATALOG =================

def _kite_section(width: float, depth: float, cross_fraction: float):
    e = cross_fraction * width
    return ((-e, 0.0), (0.0, -depth / 2), (width - e, 0.0), (0.0, depth / 2))


def _rect_section(width: float, depth: float):
    return ((-width / 2, -depth / 2), (width / 2, -depth / 2), (width / 2, depth / 2), (-width / 2, depth / 2))


def _trapezoid_section(bottom: float, top: float, depth: float):
    """Isosceles trapezoid scaled so its bottom equals the mid-height width of the original."""
    k = (bottom + top) / (2 * bottom)
    b, t, d = bottom * k, top * k, depth * k
    return ((-b / 2, 0.0), (b / 2, 0.0), (t / 2, d), (-t / 2, d))


def _cross_section(entry: dict, kite_cross_fraction: float, circle_segments: int):
    shape = entry["shape"]
    width, depth = float(entry["width_mm"]), float(entry["depth_mm"])
    if shape == "Kite":
        return _kite_section(width, depth, kite_cross_fraction)
    if shape == "Rectangle":
        return _rect_section(width, depth)
    if shape == "Trapezoid":
        return _trapezoid_section(width, float(entry["top_mm"]), depth)
    if shape == "Round":
        return tuple(map(tuple, geometry.regular_polygon(circle_segments, width / 2)))
    if shape == "Octagon":
        radius = (width / 2) / math.cos(math.pi / 8)
        return tuple(map(tuple, geometry.regular_polygon(8, radius, phase=math.pi / 8)))
    raise CatalogError(f"Unknown cross-section shape '{shape}' for {entry.get('name')}")


@lru_cache(maxsize=8)
def _catalog_entries(path: str = OBJECTS_FILE) -> Tuple[Tuple[str, dict], ...]:
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    entries = []
    for category in ("standard", "real"):
        for entry in data.get(category, []):
            entries.append((category, entry))
    return tuple(entries)


def catalog_names(kind: Optional[str] = None) -> List[str]:
    """Object names in catalog order; kind is 'standard', 'real' or None for both."""
    return [e["name"] for category, e in _catalog_entries() if kind is None or category == kind]


def object_from_table(name: str, kite_cross_fraction: float = 0.46, circle_segments: int = 64) -> ObjectSpec:
    """
    Build the cross-section of a catalog object

    Args:
        name: Catalog name or abbreviation, case-insensitive

    Raises:
        CatalogError: If the name is unknown
    """
    key = str(name).strip().lower()
    for category, entry in _catalog_entries():
        if key in (entry["name"].lower(), entry.get("abbrev", "").lower()):
            return ObjectSpec(
                name=entry["name"],
                shape=entry["shape"],
                cross_section=_cross_section(entry, kite_cross_fraction, circle_segments),
                height=float(entry["height_mm"]),
                dims=entry.get("dims", ""),
                abbrev=entry.get("abbrev", ""),
                category=category,
            )
    raise CatalogError(f"Unknown object '{name}'. Known objects: {', '.join(catalog_names())}")


def catalog_from_config(graspsim_section: dict, kind: Optional[str] = None) -> List[ObjectSpec]:
    return [object_from_table(n, graspsim_section["kite_cross_fraction"], graspsim_section["circle_segments"])
            for n in catalog_names(kind)]


# ================= FINGER REACH =================

def projected_reach(arc_length: float, theta_rad: float) -> float:
    """Distance the tip of a constant-curvature arc advances across the palm: s(1 - cos t)/t."""
    if abs(theta_rad) < 1e-12:
        return 0.0
    return arc_length * (1.0 - math.cos(theta_rad)) / theta_rad


@lru_cache(maxsize=64)
def max_projected_reach(arc_length: float, theta_max_deg: float) -> Tuple[float, float]:
    """(largest projected reach, bend angle in degrees where it occurs) over [0, theta_max]."""
    t_max = math.radians(theta_max_deg)
    result = minimize_scalar(lambda t: -projected_reach(arc_length, t), bounds=(0.0, t_max),
                             method='bounded', options={'xatol': 1e-10})
    best_t, best = float(result.x), -float(result.fun)
    edge = projected_reach(arc_length, t_max)
    if edge >= best:
        best_t, best = t_max, edge
    return best, math.degrees(best_t)


def contact_angle(arc_length: float, distance: float, theta_max_deg: float) -> Optional[float]:
    """Smallest bend angle (degrees) whose projected reach covers distance; None if out of reach."""
    if distance <= 0:
        return 0.0
    reach, theta_peak = max_projected_reach(arc_length, theta_max_deg)
    if distance > reach:
        return None
    t_peak = math.radians(theta_peak)
    if projected_reach(arc_length, t_peak) - distance <= 0:
        return theta_peak
    root = brentq(lambda t: projected_reach(arc_length, t) - distance, 1e-12, t_peak, xtol=1e-12)
    return math.degrees(root)


# ================= PLACEMENT AND CONTACT =================

def place_object(palm: PalmConfiguration, obj: ObjectSpec, offset=(0.0, 0.0)) -> np.ndarray:
    """
    Centre the object on the palm centroid with symmetry axes aligned

    The object's principal reflection axis is turned onto the palm's; a palm
    without one uses its first side. Round objects keep their orientation.
    """
    palm_verts = palm.vertex_array
    palm_axis = geometry.symmetry_axis(palm_verts)
    if palm_axis is None:
        first = palm_verts[1] - palm_verts[0]
        palm_axis = math.atan2(first[1], first[0])

    obj_verts = obj.vertex_array
    obj_axis = geometry.symmetry_axis(obj_verts) if obj.rotatable else None
    rotation = palm_axis - obj_axis if obj_axis is not None else 0.0

    obj_centroid = geometry.centroid(obj_verts)
    target = palm.centroid + np.asarray(offset, dtype=float)
    return geometry.rotate(obj_verts, rotation, obj_centroid) - obj_centroid + target


def fingers_for(palm: PalmConfiguration, params: FingerParams) -> List[FingerModel]:
    directions = geometry.bisectors(palm.vertex_array)
    return [
        FingerModel(corner=i, origin=tuple(palm.vertices[i]), direction=(float(u[0]), float(u[1])),
                    arc_length=params.arc_length, theta_max_deg=params.theta_max_deg)
        for i, u in enumerate(directions)
    ]


def _object_polygon(obj: Union[ObjectSpec, Scene, np.ndarray, Sequence], palm: PalmConfiguration):
    if isinstance(obj, Scene):
        return None if obj.object_vertices is None else np.asarray(obj.object_vertices)
    if isinstance(obj, ObjectSpec):
        return place_object(palm, obj)
    return geometry.as_array(obj)


def bisector_distance(finger: FingerModel, polygon) -> Optional[float]:
    if polygon is None:
        return None
    return geometry.ray_distance(polygon, finger.origin, finger.direction)


def finger_contact(finger: FingerModel, obj, palm: PalmConfiguration) -> Optional[Contact]:
    """
    Where the curling finger first touches the object, if it can

    The arc's footprint advances along the bisector by its projected reach;
    contact is inclusive at exactly the maximum reach.
    """
    d = bisector_distance(finger, _object_polygon(obj, palm))
    if d is None:
        return None
    theta = contact_angle(finger.arc_length, d, finger.theta_max_deg)
    if theta is None:
        return None
    point = np.asarray(finger.origin) + d * np.asarray(finger.direction)
    return Contact(corner=finger.corner, point=(float(point[0]), float(point[1])), distance=d, theta_deg=theta,
                   curvature=finger.curvature(theta))


def approach_feasible(palm: PalmConfiguration, obj, margin: float = 2.0) -> bool:
    """Object (centred on the palm unless already placed) strictly inside with margin at every vertex."""
    polygon = _object_polygon(obj, palm)
    if polygon is None:
        return True
    return geometry.contains_with_margin(palm.vertex_array, polygon, margin)


def _largest_palm() -> PalmConfiguration:
    return template_configuration(ShapeTemplate(TemplateKind.RECTANGLE, PALM_MAX_MM, PALM_MAX_MM))


def is_oversize(obj: ObjectSpec, margin: float = 2.0) -> bool:
    """True when the object cannot fit even the fully extended square palm."""
    return not approach_feasible(_largest_palm(), obj, margin)


def evaluate_grasp(palm_config: PalmConfiguration, obj, finger_params: FingerParams = FingerParams(),
                   margin: float = 2.0, majority: int = 3) -> GraspOutcome:
    """
    Gate order: approach, then finger majority

    obj may be an ObjectSpec (centred on the palm) or a Scene.
    """
    scene = obj if isinstance(obj, Scene) else Scene.placed(palm_config, obj)
    polygon = _object_polygon(scene, palm_config)
    feasible = approach_feasible(palm_config, scene, margin) if scene.has_object else True

    contacts, points, distances = [], [], []
    for finger in fingers_for(palm_config, finger_params):
        d = bisector_distance(finger, polygon)
        hit = finger_contact(finger, scene, palm_config)
        contacts.append(hit is not None)
        points.append(hit.point if hit else None)
        distances.append(d)

    reason = None
    if not feasible:
        oversize = scene.obj is not None and is_oversize(scene.obj, margin)
        reason = FailureReason.OVERSIZE if oversize else FailureReason.NO_DESCEND
    elif sum(contacts) < majority:
        reason = FailureReason.INSUFFICIENT_CONTACTS
    return GraspOutcome(
        feasible_approach=feasible,
        contacts=tuple(contacts),
        contact_points=tuple(points),
        distances=tuple(distances),
        success=reason is None,
        failure_reason=reason,
    )


# ================= FIXED CONFIGURATIONS AND MATRICES =================

@lru_cache(maxsize=4)
def _fixed_entries(path: str = FIXED_CONFIGS_FILE) -> Tuple[dict, ...]:
    with open(path, 'r', encoding='utf-8') as f:
        return tuple(json.load(f)["configurations"])


def fixed_configuration_names() -> List[str]:
    return [e["name"] for e in _fixed_entries()]


def fixed_configuration(name: str, clearance: float = 16.0, template_min_aspect: float = 1.3,
                        kite_cross_fraction: float = 0.46) -> PalmConfiguration:
    """
    Palm of a fixed baseline: the plan for the object it was built around

    Raises:
        CatalogError: If the configuration name is unknown
    """
    from policy import estimate_object, phase1_plan

    key = str(name).strip().lower()
    for entry in _fixed_entries():
        if key in (entry["name"].lower(), entry["row"].lower()):
            anchor = object_from_table(entry["anchor"], kite_cross_fraction)
            return phase1_plan(estimate_object(anchor), clearance, template_min_aspect)
    raise CatalogError(f"Unknown configuration '{name}'. Known: {', '.join(fixed_configuration_names())}")


PalmSource = Union[PalmConfiguration, Callable[[ObjectSpec], PalmConfiguration]]


@dataclass
class GraspMatrix:
    rows: List[str]
    cols: List[str]
    cells: List[List[GraspOutcome]]

    def pattern(self) -> Dict[str, Dict[str, str]]:
        return {r: {c: ("S" if self.cells[i][j].success else "F") for j, c in enumerate(self.cols)}
                for i, r in enumerate(self.rows)}

    @property
    def success_count(self) -> int:
        return sum(o.success for row in self.cells for o in row)

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "cells": [[dict(o.to_dict(), config=r, object=c) for c, o in zip(self.cols, row)]
                      for r, row in zip(self.rows, self.cells)],
        }


@dataclass
class MatrixComparison:
    table: str
    matches: int
    total: int
    mismatches: List[Tuple[str, str, str, str]]

    def to_dict(self) -> dict:
        return {
            "table": self.table,
            "matches": self.matches,
            "total": self.total,
            "mismatch_count": len(self.mismatches),
            "mismatches": [{"config": r, "object": c, "published": e, "simulated": a}
                           for r, c, e, a in self.mismatches],
        }


def run_matrix(configs: Sequence[Tuple[str, PalmSource]], objects: Sequence[ObjectSpec],
               finger_params: FingerParams = FingerParams(), margin: float = 2.0,
               majority: int = 3) -> GraspMatrix:
    """Cross-product of evaluate_grasp, assembled in (config, object) order."""
    cells = []
    for _, source in configs:
        row = []
        for obj in objects:
            palm = source(obj) if callable(source) else source
            row.append(evaluate_grasp(palm, obj, finger_params, margin, majority))
        cells.append(row)
    matrix = GraspMatrix(rows=[n for n, _ in configs], cols=[o.name for o in objects], cells=cells)
    logger.info(f"Grasp matrix {len(matrix.rows)}x{len(matrix.cols)}: {matrix.success_count} successes")
    return matrix


def template_planner(kind: TemplateKind, clearance: float, template_min_aspect: float):
    """Palm source planning the given template around each object."""
    from policy import estimate_object, phase1_plan

    def plan(obj: ObjectSpec) -> PalmConfiguration:
        return phase1_plan(estimate_object(obj, hint=kind), clearance, template_min_aspect)
    return plan


def table2_matrix(run_config) -> GraspMatrix:
    policy, gs = run_config.policy, run_config.graspsim
    configs = [(n, fixed_configuration(n, policy["clearance_mm"], policy["template_min_aspect"],
                                       gs["kite_cross_fraction"]))
               for n in fixed_configuration_names()]
    objects = catalog_from_config(gs, "standard")
    return run_matrix(configs, objects, FingerParams.from_config(run_config.finger, run_config.plant),
                      gs["approach_margin_mm"], policy["majority"])


def table3_matrix(run_config) -> GraspMatrix:
    policy, gs = run_config.policy, run_config.graspsim
    configs = [(k.value, template_planner(k, policy["clearance_mm"], policy["template_min_aspect"]))
               for k in TABLE3_TEMPLATES]
    objects = [object_from_table(n, gs["kite_cross_fraction"], gs["circle_segments"]) for n in TABLE3_OBJECTS]
    return run_matrix(configs, objects, FingerParams.from_config(run_config.finger, run_config.plant),
                      gs["approach_margin_mm"], policy["majority"])


def load_published(table: str) -> Dict[str, Dict[str, str]]:
    """Published S/F pattern keyed by config then object."""
    if table not in PUBLISHED_FILES:
        raise CatalogError(f"Unknown table '{table}'. Known: {', '.join(PUBLISHED_FILES)}")
    with open(PUBLISHED_FILES[table], 'r', newline='', encoding='utf-8') as f:
        reader = csv.DictReader(f)
        return {row["config"]: {k: v for k, v in row.items() if k != "config"} for row in reader}


def compare_to_published(matrix: GraspMatrix, table: str) -> MatrixComparison:
    published = load_published(table)
    simulated = matrix.pattern()
    mismatches = []
    total = 0
    for r in matrix.rows:
        for c in matrix.cols:
            expected = published.get(r, {}).get(c)
            if expected is None:
                continue
            total += 1
            if expected != simulated[r][c]:
                mismatches.append((r, c, expected, simulated[r][c]))
    for r, c, e, a in mismatches:
        logger.info(f"{table} mismatch {r} / {c}: published {e}, simulated {a}")
    return MatrixComparison(table=table, matches=total - len(mismatches), total=total, mismatches=mismatches)


def arc_sweep_reach(arc_length: float, theta_max_deg: float, samples: int = 1000) -> float:
    """Numerical oracle: farthest projected point of any arc with bend in [0, theta_max]."""
    best = 0.0
    for theta in np.linspace(0.0, math.radians(theta_max_deg), samples)[1:]:
        phi = np.linspace(0.0, theta, samples)
        radius = arc_length / theta
        best = max(best, float(np.max(radius * (1.0 - np.cos(phi)))))
    return best
