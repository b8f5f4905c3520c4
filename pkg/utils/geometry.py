"""
Planar polygon helpers shared by kinematics and the grasp evaluator
"""
import math
from typing import Optional, Sequence, Tuple

import numpy as np
import shapely
from shapely.geometry import LineString, Point, Polygon

from utils.validators import DegenerateGeometryError

# Reflection axes must map every vertex onto a vertex within this distance (mm)
SYMMETRY_TOL = 1e-3
# Longest-chord ties are broken in favour of the first candidate
CHORD_TIE = 1e-6
RAY_LENGTH = 1e5


def as_array(vertices) -> np.ndarray:
    arr = np.asarray(vertices, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DegenerateGeometryError(f"Expected an (n, 2) vertex array, got shape {arr.shape}")
    return arr


def to_polygon(vertices) -> Polygon:
    return Polygon(as_array(vertices))


def signed_area(vertices) -> float:
    v = as_array(vertices)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def centroid(vertices) -> np.ndarray:
    """Area centroid."""
    c = to_polygon(vertices).centroid
    return np.array([c.x, c.y])


def is_convex_ccw(vertices, eps: float = 1e-9) -> bool:
    v = as_array(vertices)
    edges = np.roll(v, -1, axis=0) - v
    nxt = np.roll(edges, -1, axis=0)
    cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    return bool(np.all(cross > eps))


def interior_angles(vertices) -> np.ndarray:
    """
    Interior angle at every vertex of a simple polygon, in degrees

    Raises:
        DegenerateGeometryError: If two consecutive vertices coincide or three are collinear
    """
    v = as_array(vertices)
    to_prev = np.roll(v, 1, axis=0) - v
    to_next = np.roll(v, -1, axis=0) - v
    n_prev = np.linalg.norm(to_prev, axis=1)
    n_next = np.linalg.norm(to_next, axis=1)
    if np.any(n_prev < 1e-12) or np.any(n_next < 1e-12):
        raise DegenerateGeometryError("Coincident vertices")
    cross = to_next[:, 0] * to_prev[:, 1] - to_next[:, 1] * to_prev[:, 0]
    dot = np.sum(to_next * to_prev, axis=1)
    if np.any(np.abs(cross) <= 1e-9 * n_prev * n_next):
        raise DegenerateGeometryError("Collinear vertices")
    angles = np.degrees(np.arctan2(np.abs(cross), dot))
    # reflex vertices turn the other way
    orientation = 1.0 if signed_area(v) > 0 else -1.0
    reflex = orientation * cross < 0
    angles[reflex] = 360.0 - angles[reflex]
    return angles


def bisectors(vertices) -> np.ndarray:
    """Unit interior bisector at every vertex of a convex polygon."""
    v = as_array(vertices)
    to_prev = np.roll(v, 1, axis=0) - v
    to_next = np.roll(v, -1, axis=0) - v
    u = to_prev / np.linalg.norm(to_prev, axis=1)[:, None] + to_next / np.linalg.norm(to_next, axis=1)[:, None]
    return u / np.linalg.norm(u, axis=1)[:, None]


def ray_distance(vertices, origin, direction) -> Optional[float]:
    """Distance along a ray to the first crossing of the polygon boundary, None if it misses."""
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    ray = LineString([o, o + RAY_LENGTH * d])
    hit = ray.intersection(to_polygon(vertices).exterior)
    if hit.is_empty:
        return None
    coords = shapely.get_coordinates(hit)
    along = (coords - o) @ d
    along = along[along >= -1e-9]
    if along.size == 0:
        return None
    return float(max(along.min(), 0.0))


def rotate(vertices, angle_rad: float, about) -> np.ndarray:
    v = as_array(vertices)
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    rot = np.array([[c, -s], [s, c]])
    pivot = np.asarray(about, dtype=float)
    return (v - pivot) @ rot.T + pivot


def _is_reflection_axis(rel: np.ndarray, u: np.ndarray) -> bool:
    along = rel @ u
    mirrored = 2.0 * along[:, None] * u[None, :] - rel
    gaps = np.linalg.norm(mirrored[:, None, :] - rel[None, :, :], axis=2)
    return bool(np.all(gaps.min(axis=1) < SYMMETRY_TOL))


def symmetry_axis(vertices) -> Optional[float]:
    """
    Direction (radians) of the principal reflection axis through the centroid

    Candidates are centroid-to-vertex directions, then centroid-to-edge-midpoint
    directions. Among reflection axes the longest chord wins; it points toward
    the farther boundary crossing. None when the polygon has no reflection axis.
    """
    v = as_array(vertices)
    c = centroid(v)
    rel = v - c
    midpoints = 0.5 * (v + np.roll(v, -1, axis=0)) - c
    best_chord, best_angle = -1.0, None
    for p in np.vstack([rel, midpoints]):
        length = float(np.linalg.norm(p))
        if length < 1e-9:
            continue
        u = p / length
        if not _is_reflection_axis(rel, u):
            continue
        forward = ray_distance(v, c, u) or 0.0
        backward = ray_distance(v, c, -u) or 0.0
        chord = forward + backward
        if chord > best_chord + CHORD_TIE:
            best_chord = chord
            if backward > forward + CHORD_TIE:
                u = -u
            best_angle = math.atan2(u[1], u[0])
    return best_angle


def contains_with_margin(outer, inner, margin: float) -> bool:
    """Every inner vertex strictly inside outer and at least margin from its boundary."""
    poly = to_polygon(outer)
    for p in as_array(inner):
        pt = Point(p)
        if not poly.contains(pt):
            return False
        if poly.exterior.distance(pt) < margin:
            return False
    return True


def regular_polygon(n: int, radius: float, phase: float = 0.0) -> np.ndarray:
    k = np.arange(n)
    ang = phase + 2.0 * np.pi * k / n
    return np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])


def extents(vertices) -> Tuple[float, float]:
    v = as_array(vertices)
    span = v.max(axis=0) - v.min(axis=0)
    return float(span[0]), float(span[1])


def side_lengths(vertices: Sequence) -> np.ndarray:
    v = as_array(vertices)
    return np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
