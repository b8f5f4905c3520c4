"""
Command-line scenario runner

Every subcommand loads the run configuration, runs one experiment family
and writes its artifacts under --out (default: the config's output_dir).

Exit codes: 0 success, 2 validation error, 3 published-matrix mismatch
beyond the gate, 1 I/O failure.
"""
import argparse
import os
import re
import sys
from typing import List, Optional

from config import EXIT_MISMATCH, EXIT_OK, EXIT_VALIDATION, HOST, PORT, DEBUG, load_run_config
from utils.logger import get_logger
from utils.validators import ValidationError

logger = get_logger(__name__)

EXIT_IO = 1
TEMPLATE_CHOICES = ("kite", "rectangle", "trapezoid")
TABLE_CHOICES = ("table2", "table3")
# Minimum matching cells before `matrix` reports a mismatch exit
MATCH_GATES = {"table2": 33, "table3": 7}


def slugify(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", str(text).lower()).strip("_")


def _template_kinds(choice: str):
    from kinematics import TemplateKind
    if choice == "all":
        return list(TemplateKind)
    return [TemplateKind(choice.capitalize())]


def _artifact_header(run_config, command: str) -> dict:
    return {"command": command, "seed": run_config.seed, "config": run_config.to_dict()}


# ================= SUBCOMMANDS =================

def cmd_characterize(run_config, out_dir: str, points: int = 21) -> List[str]:
    """Pressure sweep 0 -> P_supply for the palm and finger calibration curves."""
    from exports import write_characterization_csv
    from plant import characterize, default_curves

    palm_curve, finger_curve = default_curves(run_config.plant)
    paths = [
        write_characterization_csv(characterize(palm_curve, points), "length_mm",
                                   os.path.join(out_dir, "characterize_palm.csv")),
        write_characterization_csv(characterize(finger_curve, points), "angle_deg",
                                   os.path.join(out_dir, "characterize_finger.csv")),
    ]
    logger.info(f"Characterization ({points} points) written to {out_dir}")
    return paths


def cmd_manifold(run_config, out_dir: str, template: str = "all", grid_n: Optional[int] = None,
                 x_range=None, y_range=None, png: bool = False) -> List[str]:
    from exports import write_manifold_csv, write_manifold_png
    from kinematics import sweep_manifold

    kin = run_config.kinematics
    default_range = (kin["manifold_min_mm"], kin["manifold_max_mm"])
    n = grid_n or kin["manifold_grid_n"]
    paths = []
    for kind in _template_kinds(template):
        grid = sweep_manifold(kind, tuple(x_range or default_range), tuple(y_range or default_range), n)
        base = os.path.join(out_dir, f"manifold_{kind.value.lower()}")
        paths.append(write_manifold_csv(grid, base + ".csv"))
        if png:
            paths.append(write_manifold_png(grid, base + ".png"))
        logger.info(f"{kind.value} manifold: {grid.feasible_count}/{n * n} feasible points")
    return paths


def cmd_detect(run_config, out_dir: str, trace_csv: str, threshold: Optional[float] = None,
               kernel: Optional[int] = None) -> str:
    from exports import write_json
    from sensing import detect_transit_point, ingest_csv

    sensing = run_config.sensing
    trace = ingest_csv(trace_csv)
    result = detect_transit_point(trace, threshold if threshold is not None else sensing["threshold"],
                                  kernel if kernel is not None else sensing["kernel"])
    payload = _artifact_header(run_config, "detect")
    payload.update({
        "trace": os.path.basename(trace_csv),
        "samples": trace.n_samples,
        "dt_s": trace.dt,
        "detection": result.to_dict(),
    })
    path = os.path.join(out_dir, f"detect_{slugify(os.path.splitext(os.path.basename(trace_csv))[0])}.json")
    write_json(payload, path)
    logger.info(f"Transit point for {trace_csv}: {result.transit_point}")
    return path


def cmd_grasp(run_config, out_dir: str, object_name: str, mode: str = "adaptive"):
    """Run phases 0-2 on one catalog object; writes the tick log (JSON lines) and the outcome."""
    from exports import write_json, write_jsonl
    from policy import run_named_grasp

    run = run_named_grasp(object_name, mode, run_config)
    base = os.path.join(out_dir, f"grasp_{slugify(object_name)}_{slugify(mode)}")
    payload = _artifact_header(run_config, "grasp")
    payload.update(run.summary())
    return [write_jsonl(run.log, base + ".jsonl"), write_json(payload, base + ".json")], run


def run_table(run_config, table: str):
    from graspsim import compare_to_published, table2_matrix, table3_matrix

    matrix = table2_matrix(run_config) if table == "table2" else table3_matrix(run_config)
    return matrix, compare_to_published(matrix, table)


def cmd_matrix(run_config, out_dir: str, table: str, min_matches: Optional[int] = None):
    """
    Grasp matrix plus its cell-by-cell comparison against the published one

    Returns:
        (paths, comparison, gate_passed)
    """
    from exports import write_json, write_matrix_csv

    matrix, comparison = run_table(run_config, table)
    gate = MATCH_GATES[table] if min_matches is None else min_matches
    payload = _artifact_header(run_config, "matrix")
    payload.update({"matrix": matrix.to_dict(), "comparison": comparison.to_dict(), "gate": gate})
    paths = [
        write_matrix_csv(matrix, os.path.join(out_dir, f"matrix_{table}.csv")),
        write_json(payload, os.path.join(out_dir, f"matrix_{table}.json")),
    ]
    passed = comparison.matches >= gate
    logger.info(f"{table}: {comparison.matches}/{comparison.total} cells match the published matrix "
                f"(gate {gate})")
    return paths, comparison, passed


def cmd_sensors(run_config, out_dir: str, mode: str = "adaptive") -> List[str]:
    """Adaptive grasps of the standard objects; one envelop-phase bend trace per object plus detections."""
    from exports import write_json
    from graspsim import catalog_names
    from policy import run_named_grasp
    from sensing import detect_transit_point, traces_from_samples, write_trace_csv

    sensing = run_config.sensing
    dt = run_config.plant["dt_s"]
    paths = []
    detections = {}
    for name in catalog_names("standard"):
        run = run_named_grasp(name, mode, run_config)
        samples = [record["sensor"] for record in run.log if record["phase"] == "Envelop"]
        entry = {"outcome": run.outcome.cell, "contact_ticks": run.phase.contact_ticks,
                 "detection_ticks": run.phase.detection_ticks}
        if samples:
            trace = traces_from_samples(samples, dt)
            path = os.path.join(out_dir, f"sensors_{slugify(name)}.csv")
            write_trace_csv(trace, path)
            paths.append(path)
            entry["trace"] = os.path.basename(path)
            entry["detection"] = detect_transit_point(trace, sensing["threshold"], sensing["kernel"]).to_dict()
        detections[name] = entry
    payload = _artifact_header(run_config, "sensors")
    payload["objects"] = detections
    paths.append(write_json(payload, os.path.join(out_dir, "sensors_detection.json")))
    return paths


def cmd_export(run_config, out_dir: str, table: Optional[str] = None, formats=("xlsx", "pdf"),
               manifold_csv: Optional[str] = None, template: Optional[str] = None) -> List[str]:
    from exports import read_manifold_csv, write_manifold_png, write_matrix_pdf, write_matrix_workbook
    from kinematics import TemplateKind

    if table is None and manifold_csv is None:
        raise ValidationError("export needs --table and/or --manifold-csv")
    paths = []
    if table is not None:
        matrix, comparison = run_table(run_config, table)
        if "xlsx" in formats:
            paths.append(write_matrix_workbook(matrix, comparison, os.path.join(out_dir, f"matrix_{table}.xlsx")))
        if "pdf" in formats:
            title = "Fixed configurations vs standard objects" if table == "table2" else \
                "Adaptive templates vs real objects"
            paths.append(write_matrix_pdf(matrix, comparison, os.path.join(out_dir, f"matrix_{table}.pdf"),
                                          title=title))
    if manifold_csv is not None:
        if template is None:
            raise ValidationError("--template is required with --manifold-csv")
        grid = read_manifold_csv(manifold_csv, TemplateKind(template.capitalize()))
        stem = os.path.splitext(os.path.basename(manifold_csv))[0]
        paths.append(write_manifold_png(grid, os.path.join(out_dir, stem + ".png")))
    return paths


def cmd_serve(run_config, host: str = HOST, port: int = PORT) -> None:
    from app import create_app
    app = create_app({"RUN_CONFIG": run_config})
    logger.info(f"Serving results API on http://{host}:{port}")
    app.run(host=host, port=port, debug=DEBUG)


# ================= ARGUMENT PARSING =================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gripper-sim", description="Morphing soft gripper simulator")
    parser.add_argument("--config", help="JSON run configuration merged over the defaults")
    parser.add_argument("--seed", type=int, help="Seed for every stochastic scenario")
    parser.add_argument("--out", help="Output directory (default: output_dir from the config)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("characterize", help="Pressure-length and pressure-angle tables")
    p.add_argument("--points", type=int, default=21, help="Sweep points from 0 to P_supply")

    p = sub.add_parser("manifold", help="Minimum-internal-angle grid per palm template")
    p.add_argument("--template", choices=TEMPLATE_CHOICES + ("all",), default="all")
    p.add_argument("--n", type=int, dest="grid_n", help="Grid points per axis")
    p.add_argument("--x-range", type=float, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--y-range", type=float, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--png", action="store_true", help="Also write a heatmap image")

    p = sub.add_parser("detect", help="Contact detection on a t_s,f0..f3 trace CSV")
    p.add_argument("trace_csv")
    p.add_argument("--threshold", type=float)
    p.add_argument("--kernel", type=int)

    p = sub.add_parser("grasp", help="Run the grasping policy on one catalog object")
    p.add_argument("--object", required=True, dest="object_name")
    p.add_argument("--mode", default="adaptive", help="'adaptive' or 'fixed:<configuration>'")

    p = sub.add_parser("matrix", help="Grasp matrix and comparison with the published one")
    p.add_argument("table", choices=TABLE_CHOICES)
    p.add_argument("--min-matches", type=int, help="Matching cells required for exit code 0")
    p.add_argument("--strict", action="store_true", help="Any mismatch fails")

    p = sub.add_parser("sensors", help="Bend traces and transit points for the standard objects")
    p.add_argument("--mode", default="adaptive")

    p = sub.add_parser("export", help="XLSX/PDF matrix reports and manifold heatmaps")
    p.add_argument("--table", choices=TABLE_CHOICES)
    p.add_argument("--formats", nargs="+", choices=("xlsx", "pdf"), default=["xlsx", "pdf"])
    p.add_argument("--manifold-csv")
    p.add_argument("--template", choices=TEMPLATE_CHOICES)

    p = sub.add_parser("serve", help="Start the results API")
    p.add_argument("--host", default=HOST)
    p.add_argument("--port", type=int, default=PORT)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {"seed": args.seed} if args.seed is not None else None
        run_config = load_run_config(args.config, overrides)
        out_dir = args.out or run_config.output_dir
        os.makedirs(out_dir, exist_ok=True)

        if args.command == "characterize":
            paths = cmd_characterize(run_config, out_dir, args.points)
        elif args.command == "manifold":
            paths = cmd_manifold(run_config, out_dir, args.template, args.grid_n, args.x_range,
                                 args.y_range, args.png)
        elif args.command == "detect":
            paths = [cmd_detect(run_config, out_dir, args.trace_csv, args.threshold, args.kernel)]
        elif args.command == "grasp":
            paths, run = cmd_grasp(run_config, out_dir, args.object_name, args.mode)
            print(f"{run.object_name} ({run.mode}): {run.outcome.cell}, "
                  f"{run.outcome.contact_count} contact(s)")
        elif args.command == "matrix":
            paths, comparison, passed = cmd_matrix(run_config, out_dir, args.table, args.min_matches)
            print(f"{args.table}: {comparison.matches}/{comparison.total} cells match")
            for r, c, expected, actual in comparison.mismatches:
                print(f"  {r} / {c}: published {expected}, simulated {actual}")
            if args.strict:
                passed = not comparison.mismatches
            for path in paths:
                print(path)
            return EXIT_OK if passed else EXIT_MISMATCH
        elif args.command == "sensors":
            paths = cmd_sensors(run_config, out_dir, args.mode)
        elif args.command == "export":
            paths = cmd_export(run_config, out_dir, args.table, args.formats, args.manifold_csv, args.template)
        else:
            cmd_serve(run_config, args.host, args.port)
            return EXIT_OK
    except ValidationError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_VALIDATION
    except OSError as e:
        logger.error(f"{args.command}: I/O error: {e}", exc_info=True)
        return EXIT_IO

    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
