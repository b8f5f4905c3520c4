"""
API blueprint for REST API endpoints
"""
from functools import wraps

import numpy as np
from flask import Blueprint, current_app, jsonify, request

from config import APP_VERSION, load_run_config
from utils.logger import get_logger
from utils.validators import ValidationError, validate_choice, validate_float, validate_integer

logger = get_logger(__name__)
api_bp = Blueprint('api', __name__, url_prefix='/api')


def _run_config():
    run_config = current_app.config.get('RUN_CONFIG')
    if run_config is None:
        run_config = load_run_config()
        current_app.config['RUN_CONFIG'] = run_config
    return run_config


def api_errors(f):
    """Decorator mapping ValidationError to 400 and anything else to 500"""
    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except ValidationError as e:
            logger.warning(f"{request.path}: {e}")
            return jsonify({"success": False, "error": str(e)}), 400
        except Exception as e:
            logger.error(f"Error in {request.path}: {str(e)}", exc_info=True)
            return jsonify({"success": False, "error": "Internal server error"}), 500
    return wrapper


def _json_body() -> dict:
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise ValidationError("Request body must be a JSON object")
    return data


@api_bp.route("/health")
def health():
    return jsonify({"success": True, "status": "ok", "version": APP_VERSION})


@api_bp.route("/objects")
@api_errors
def objects():
    """Standard and real catalog objects"""
    from graspsim import catalog_from_config

    gs = _run_config().graspsim
    return jsonify({
        "success": True,
        "standard": [o.to_dict() for o in catalog_from_config(gs, "standard")],
        "real": [o.to_dict() for o in catalog_from_config(gs, "real")],
    })


@api_bp.route("/characterize")
@api_errors
def characterize_curves():
    from plant import characterize, default_curves

    points = validate_integer(request.args.get("points", 21), "points", min_value=2, max_value=10_000)
    palm_curve, finger_curve = default_curves(_run_config().plant)
    return jsonify({
        "success": True,
        "palm": [{"pressure_kpa": p, "length_mm": v} for p, v in characterize(palm_curve, points)],
        "finger": [{"pressure_kpa": p, "angle_deg": v} for p, v in characterize(finger_curve, points)],
    })


@api_bp.route("/manifold/<kind>")
@api_errors
def manifold(kind):
    """Minimum internal angle grid; infeasible points are null"""
    from kinematics import TemplateKind, sweep_manifold

    kind = TemplateKind(validate_choice(kind, "Template", [k.value for k in TemplateKind]))
    kin = _run_config().kinematics
    n = validate_integer(request.args.get("n", kin["manifold_grid_n"]), "n", min_value=2, max_value=201)
    span = (kin["manifold_min_mm"], kin["manifold_max_mm"])
    grid = sweep_manifold(kind, span, span, n)
    min_angle = [[None if np.isnan(v) else float(v) for v in row] for row in grid.min_angle]
    return jsonify({
        "success": True,
        "kind": grid.kind.value,
        "x_mm": grid.x_values.tolist(),
        "y_mm": grid.y_values.tolist(),
        "min_angle_deg": min_angle,
        "feasible": grid.feasible.tolist(),
        "feasible_count": grid.feasible_count,
    })


@api_bp.route("/matrix/<table>")
@api_errors
def matrix(table):
    from graspsim import PUBLISHED_FILES, compare_to_published, table2_matrix, table3_matrix

    table = validate_choice(table, "Table", PUBLISHED_FILES)
    run_config = _run_config()
    result = table2_matrix(run_config) if table == "table2" else table3_matrix(run_config)
    comparison = compare_to_published(result, table)
    return jsonify({"success": True, "matrix": result.to_dict(), "comparison": comparison.to_dict()})


@api_bp.route("/grasp", methods=["POST"])
@api_errors
def grasp():
    """Run the grasping policy; body: {"object": name, "mode": "adaptive", "seed": 0}"""
    from policy import run_named_grasp

    data = _json_body()
    name = data.get("object")
    if not name:
        raise ValidationError("'object' is required")
    seed = data.get("seed")
    if seed is not None:
        seed = validate_integer(seed, "seed", min_value=0)
    run = run_named_grasp(str(name), str(data.get("mode", "adaptive")), _run_config(), seed)
    logger.info(f"API grasp {name}: {run.outcome.cell}")
    return jsonify({"success": True, "run": run.summary()})


@api_bp.route("/detect", methods=["POST"])
@api_errors
def detect():
    """Contact detection; body: {"channels": [[...] x 4], "dt": 0.01, "threshold": 5, "kernel": 5}"""
    from sensing import SensorTrace, detect_transit_point

    data = _json_body()
    sensing = _run_config().sensing
    channels = data.get("channels")
    if not isinstance(channels, list) or not channels:
        raise ValidationError("'channels' must be a list of four sample lists")
    try:
        array = np.asarray(channels, dtype=float)
    except (TypeError, ValueError):
        raise ValidationError("'channels' must be rectangular and numeric")
    dt = validate_float(data.get("dt", _run_config().plant["dt_s"]), "dt", min_value=1e-9)
    threshold = validate_float(data.get("threshold", sensing["threshold"]), "threshold", min_value=1e-12)
    kernel = validate_integer(data.get("kernel", sensing["kernel"]), "kernel", min_value=1)
    result = detect_transit_point(SensorTrace(dt=dt, channels=array), threshold, kernel)
    return jsonify({"success": True, "detection": result.to_dict()})
