"""
Artifact writers: CSV/JSON for data, XLSX/PDF reports for grasp matrices,
PNG heatmaps for shape manifolds
"""
import csv
import json
import os
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from graspsim import GraspMatrix, MatrixComparison
from kinematics import ManifoldGrid, TemplateKind
from utils.logger import get_logger
from utils.validators import TraceParseError

logger = get_logger(__name__)

HEADER_COLOR = "366092"
SUCCESS_COLOR = "C6EFCE"
FAILURE_COLOR = "FFC7CE"
MANIFOLD_HEADER = ["x_mm", "y_mm", "min_angle_deg", "feasible"]


def ensure_dir(path: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return path


def _num(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def write_json(data, path: str) -> str:
    with open(ensure_dir(path), 'w', encoding='utf-8') as f:
        json.dump(data, f, sort_keys=True, indent=2)
        f.write("\n")
    return path


def write_jsonl(records: Iterable[dict], path: str) -> str:
    """One JSON object per line, keys sorted."""
    with open(ensure_dir(path), 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True))
            f.write("\n")
    return path


def write_table_csv(header: Sequence[str], rows: Iterable[Sequence], path: str) -> str:
    with open(ensure_dir(path), 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_characterization_csv(samples: Sequence[Tuple[float, float]], column: str, path: str) -> str:
    return write_table_csv(["pressure_kpa", column], samples, path)


def read_characterization_csv(path: str) -> List[Tuple[float, float]]:
    with open(path, 'r', newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        next(reader)
        return [(float(p), float(v)) for p, v in reader]


def write_manifold_csv(grid: ManifoldGrid, path: str) -> str:
    rows = ((x, y, "" if not ok else angle, "true" if ok else "false") for x, y, angle, ok in grid.rows())
    return write_table_csv(MANIFOLD_HEADER, rows, path)


def read_manifold_csv(path: str, kind: TemplateKind) -> ManifoldGrid:
    """
    Rebuild a ManifoldGrid from its CSV

    Raises:
        TraceParseError: On a bad header or an inconsistent grid
    """
    with open(path, 'r', newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != MANIFOLD_HEADER:
            raise TraceParseError(f"expected header '{','.join(MANIFOLD_HEADER)}'", 1)
        rows = []
        for line_number, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise TraceParseError(f"expected 4 columns, got {len(row)}", line_number)
            try:
                rows.append((float(row[0]), float(row[1]), float(row[2]) if row[2] else np.nan,
                             row[3] == "true"))
            except ValueError:
                raise TraceParseError(f"non-numeric value in {row}", line_number)
    xs = sorted({r[0] for r in rows})
    ys = sorted({r[1] for r in rows})
    if len(xs) * len(ys) != len(rows):
        raise TraceParseError(f"{len(rows)} rows do not form a {len(xs)}x{len(ys)} grid")
    min_angle = np.full((len(ys), len(xs)), np.nan)
    feasible = np.zeros((len(ys), len(xs)), dtype=bool)
    for x, y, angle, ok in rows:
        j, i = ys.index(y), xs.index(x)
        min_angle[j, i] = angle
        feasible[j, i] = ok
    return ManifoldGrid(kind=kind, x_values=np.array(xs), y_values=np.array(ys), min_angle=min_angle,
                        feasible=feasible)


def write_matrix_csv(matrix: GraspMatrix, path: str) -> str:
    rows = ([r] + [o.cell for o in row] for r, row in zip(matrix.rows, matrix.cells))
    return write_table_csv(["config"] + list(matrix.cols), rows, path)


def read_matrix_csv(path: str) -> dict:
    """{config: {object: cell}} where cell is 'S' or 'F:<reason>'."""
    with open(path, 'r', newline='', encoding='utf-8') as f:
        return {row["config"]: {k: v for k, v in row.items() if k != "config"} for row in csv.DictReader(f)}


def write_matrix_workbook(matrix: GraspMatrix, comparison: Optional[MatrixComparison], path: str) -> str:
    """Matrix sheet with coloured S/F cells plus a comparison sheet."""
    from openpyxl import Workbook
    from openpyxl.styles import Alignment, Font, PatternFill

    wb = Workbook()
    ws = wb.active
    ws.title = "Matrix"

    header_fill = PatternFill(start_color=HEADER_COLOR, end_color=HEADER_COLOR, fill_type="solid")
    header_font = Font(bold=True, color="FFFFFF")
    ok_fill = PatternFill(start_color=SUCCESS_COLOR, end_color=SUCCESS_COLOR, fill_type="solid")
    bad_fill = PatternFill(start_color=FAILURE_COLOR, end_color=FAILURE_COLOR, fill_type="solid")

    def header_row(sheet, headers):
        for col_num, header in enumerate(headers, 1):
            cell = sheet.cell(row=1, column=col_num, value=header)
            cell.fill = header_fill
            cell.font = header_font
            cell.alignment = Alignment(horizontal='center', vertical='center')

    header_row(ws, ["Configuration"] + list(matrix.cols))
    for row_num, (name, row) in enumerate(zip(matrix.rows, matrix.cells), 2):
        ws.cell(row=row_num, column=1, value=name)
        for col_num, outcome in enumerate(row, 2):
            cell = ws.cell(row=row_num, column=col_num, value=outcome.cell)
            cell.fill = ok_fill if outcome.success else bad_fill
            cell.alignment = Alignment(horizontal='center')

    if comparison is not None:
        cs = wb.create_sheet("Comparison")
        header_row(cs, ["Configuration", "Object", "Published", "Simulated"])
        for row_num, (r, c, expected, actual) in enumerate(comparison.mismatches, 2):
            for col_num, value in enumerate((r, c, expected, actual), 1):
                cs.cell(row=row_num, column=col_num, value=value)
        summary_row = len(comparison.mismatches) + 3
        cs.cell(row=summary_row, column=1, value="Matches")
        cs.cell(row=summary_row, column=2, value=f"{comparison.matches}/{comparison.total}")

    for sheet in wb.worksheets:
        for col in sheet.columns:
            max_length = max(len(str(cell.value)) if cell.value is not None else 0 for cell in col)
            sheet.column_dimensions[col[0].column_letter].width = min(max_length + 2, 50)

    wb.save(ensure_dir(path))
    logger.info(f"Wrote matrix workbook {path}")
    return path


def write_matrix_pdf(matrix: GraspMatrix, comparison: Optional[MatrixComparison], path: str,
                     title: str = "Grasp Success Matrix") -> str:
    from reportlab.lib import colors
    from reportlab.lib.pagesizes import A4, landscape
    from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
    from reportlab.lib.units import inch
    from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

    doc = SimpleDocTemplate(ensure_dir(path), pagesize=landscape(A4), topMargin=0.5 * inch,
                            bottomMargin=0.5 * inch, invariant=1)
    styles = getSampleStyleSheet()
    title_style = ParagraphStyle('MatrixTitle', parent=styles['Heading1'], fontSize=16,
                                 textColor=colors.HexColor('#1f2937'), spaceAfter=20, alignment=1)
    elements = [Paragraph(title, title_style), Spacer(1, 0.2 * inch)]

    data = [["Configuration"] + list(matrix.cols)]
    for name, row in zip(matrix.rows, matrix.cells):
        data.append([name] + [o.cell for o in row])
    table = Table(data)
    style = [
        ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#' + HEADER_COLOR)),
        ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
        ('ALIGN', (0, 0), (-1, -1), 'CENTER'),
        ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
        ('FONTSIZE', (0, 0), (-1, -1), 8),
        ('GRID', (0, 0), (-1, -1), 1, colors.black),
    ]
    for i, row in enumerate(matrix.cells, 1):
        for j, outcome in enumerate(row, 1):
            shade = '#' + (SUCCESS_COLOR if outcome.success else FAILURE_COLOR)
            style.append(('BACKGROUND', (j, i), (j, i), colors.HexColor(shade)))
    table.setStyle(TableStyle(style))
    elements.append(table)

    if comparison is not None:
        elements.append(Spacer(1, 0.3 * inch))
        elements.append(Paragraph(
            f"Published pattern: {comparison.matches}/{comparison.total} cells match", styles['Normal']))
        if comparison.mismatches:
            rows = [["Configuration", "Object", "Published", "Simulated"]] + [list(m) for m in comparison.mismatches]
            mismatch_table = Table(rows)
            mismatch_table.setStyle(TableStyle([
                ('BACKGROUND', (0, 0), (-1, 0), colors.HexColor('#' + HEADER_COLOR)),
                ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
                ('FONTSIZE', (0, 0), (-1, -1), 8),
                ('GRID', (0, 0), (-1, -1), 1, colors.black),
                ('ROWBACKGROUNDS', (0, 1), (-1, -1), [colors.white, colors.lightgrey]),
            ]))
            elements.append(mismatch_table)

    doc.build(elements)
    logger.info(f"Wrote matrix report {path}")
    return path


def manifold_image_array(grid: ManifoldGrid, vmin: float = 0.0, vmax: float = 90.0) -> np.ndarray:
    """RGB array, blue (small min angle) to red (90 degrees), grey where infeasible; row 0 is the top y."""
    values = np.clip((np.nan_to_num(grid.min_angle, nan=vmin) - vmin) / (vmax - vmin), 0.0, 1.0)
    rgb = np.zeros(values.shape + (3,), dtype=np.uint8)
    rgb[..., 0] = (255 * values).astype(np.uint8)
    rgb[..., 1] = (255 * (1.0 - np.abs(2.0 * values - 1.0))).astype(np.uint8)
    rgb[..., 2] = (255 * (1.0 - values)).astype(np.uint8)
    rgb[~grid.feasible] = (160, 160, 160)
    return rgb[::-1]


def write_manifold_png(grid: ManifoldGrid, path: str, scale: int = 16) -> str:
    from PIL import Image

    image = Image.fromarray(manifold_image_array(grid), mode="RGB")
    image = image.resize((image.width * scale, image.height * scale), resample=Image.NEAREST)
    image.save(ensure_dir(path), format="PNG")
    logger.info(f"Wrote manifold heatmap {path}")
    return path
