"""
Unit tests for artifact writers
"""
import json
import os
import shutil
import tempfile
import unittest

import numpy as np

from exports import (
    HEADER_COLOR,
    manifold_image_array,
    read_characterization_csv,
    read_manifold_csv,
    read_matrix_csv,
    write_characterization_csv,
    write_json,
    write_jsonl,
    write_manifold_csv,
    write_manifold_png,
    write_matrix_csv,
    write_matrix_pdf,
    write_matrix_workbook,
)
from graspsim import compare_to_published, fixed_configuration, object_from_table, run_matrix
from kinematics import TemplateKind, sweep_manifold
from utils.validators import TraceParseError


def small_matrix():
    objects = [object_from_table(n) for n in ("RS", "RL")]
    configs = [("Gripper-Rec-S", fixed_configuration("Rec-S")), ("Gripper-Rec-L", fixed_configuration("Rec-L"))]
    return run_matrix(configs, objects)


class TestExports(unittest.TestCase):
    """Test cases for CSV, JSON, XLSX, PDF and PNG output"""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def path(self, name):
        return os.path.join(self.tmp, name)

    def test_json_sorted_and_stable(self):
        """Test JSON output has sorted keys and identical bytes across writes"""
        data = {"b": 1, "a": {"z": 0.1, "y": [1, 2]}}
        write_json(data, self.path("one.json"))
        write_json(dict(reversed(list(data.items()))), self.path("two.json"))
        with open(self.path("one.json"), 'rb') as f1, open(self.path("two.json"), 'rb') as f2:
            first = f1.read()
            self.assertEqual(first, f2.read())
        self.assertTrue(first.endswith(b"\n"))
        self.assertLess(first.index(b'"a"'), first.index(b'"b"'))

    def test_jsonl(self):
        """Test one record per line"""
        write_jsonl([{"tick": 0}, {"tick": 1}], self.path("log.jsonl"))
        with open(self.path("log.jsonl"), encoding='utf-8') as f:
            lines = f.read().splitlines()
        self.assertEqual([json.loads(line)["tick"] for line in lines], [0, 1])

    def test_characterization_csv(self):
        """Test characterization samples read back exactly"""
        samples = [(0.0, 68.0), (51.7, 101.5), (103.4, 135.0)]
        write_characterization_csv(samples, "length_mm", self.path("c.csv"))
        with open(self.path("c.csv"), encoding='utf-8') as f:
            self.assertEqual(f.readline().strip(), "pressure_kpa,length_mm")
        self.assertEqual(read_characterization_csv(self.path("c.csv")), samples)

    def test_manifold_csv(self):
        """Test a manifold grid survives its CSV, infeasible cells included"""
        grid = sweep_manifold(TemplateKind.TRAPEZOID, n=6)
        write_manifold_csv(grid, self.path("m.csv"))
        back = read_manifold_csv(self.path("m.csv"), TemplateKind.TRAPEZOID)
        np.testing.assert_array_equal(back.x_values, grid.x_values)
        np.testing.assert_array_equal(back.y_values, grid.y_values)
        np.testing.assert_array_equal(back.feasible, grid.feasible)
        np.testing.assert_allclose(back.min_angle, grid.min_angle, equal_nan=True)

    def test_manifold_csv_bad_header(self):
        """Test a foreign CSV is rejected at line 1"""
        with open(self.path("bad.csv"), 'w', encoding='utf-8') as f:
            f.write("a,b,c,d\n1,2,3,true\n")
        with self.assertRaises(TraceParseError) as ctx:
            read_manifold_csv(self.path("bad.csv"), TemplateKind.RECTANGLE)
        self.assertEqual(ctx.exception.line_number, 1)

    def test_manifold_csv_not_a_grid(self):
        """Test a partial grid is rejected"""
        with open(self.path("partial.csv"), 'w', encoding='utf-8') as f:
            f.write("x_mm,y_mm,min_angle_deg,feasible\n68,68,90,true\n135,68,90,true\n68,135,90,true\n")
        with self.assertRaises(TraceParseError):
            read_manifold_csv(self.path("partial.csv"), TemplateKind.RECTANGLE)

    def test_matrix_csv(self):
        """Test matrix cells are written as S or F with the reason"""
        matrix = small_matrix()
        write_matrix_csv(matrix, self.path("matrix.csv"))
        cells = read_matrix_csv(self.path("matrix.csv"))
        self.assertEqual(cells["Gripper-Rec-S"]["Rectangle (Small)"], "S")
        self.assertEqual(cells["Gripper-Rec-S"]["Rectangle (Large)"], "F:NoDescend")
        self.assertEqual(cells["Gripper-Rec-L"]["Rectangle (Large)"], "S")

    def test_workbook(self):
        """Test the workbook has a styled header and a comparison sheet"""
        from openpyxl import load_workbook

        matrix = small_matrix()
        comparison = compare_to_published(matrix, "table2")
        write_matrix_workbook(matrix, comparison, self.path("matrix.xlsx"))
        wb = load_workbook(self.path("matrix.xlsx"))
        self.assertEqual(wb.sheetnames, ["Matrix", "Comparison"])
        ws = wb["Matrix"]
        self.assertEqual(ws["A1"].value, "Configuration")
        self.assertTrue(ws["A1"].fill.start_color.rgb.endswith(HEADER_COLOR))
        self.assertTrue(ws["A1"].font.bold)
        self.assertEqual(ws["B2"].value, "S")
        summary = [row for row in wb["Comparison"].iter_rows(values_only=True) if row[0] == "Matches"]
        self.assertEqual(summary[0][1], "4/4")

    def test_pdf(self):
        """Test the PDF report is written and reproducible"""
        matrix = small_matrix()
        comparison = compare_to_published(matrix, "table2")
        write_matrix_pdf(matrix, comparison, self.path("a.pdf"))
        write_matrix_pdf(matrix, comparison, self.path("b.pdf"))
        with open(self.path("a.pdf"), 'rb') as fa, open(self.path("b.pdf"), 'rb') as fb:
            first = fa.read()
            self.assertEqual(first, fb.read())
        self.assertTrue(first.startswith(b"%PDF"))

    def test_manifold_png(self):
        """Test the heatmap is scaled and coloured by minimum angle"""
        from PIL import Image

        grid = sweep_manifold(TemplateKind.RECTANGLE, n=5)
        write_manifold_png(grid, self.path("m.png"), scale=16)
        with Image.open(self.path("m.png")) as image:
            self.assertEqual(image.size, (80, 80))
            red, _, blue = image.convert("RGB").getpixel((0, 0))
            self.assertGreaterEqual(red, 250)
            self.assertLessEqual(blue, 5)

    def test_infeasible_cells_grey(self):
        """Test infeasible cells are painted grey and rows run top-down"""
        grid = sweep_manifold(TemplateKind.RECTANGLE, n=3)
        grid.feasible[0, 0] = False
        grid.min_angle[0, 0] = np.nan
        rgb = manifold_image_array(grid)
        self.assertEqual(tuple(rgb[-1, 0]), (160, 160, 160))
        self.assertGreaterEqual(int(rgb[0, 0, 0]), 250)


if __name__ == '__main__':
    unittest.main()
