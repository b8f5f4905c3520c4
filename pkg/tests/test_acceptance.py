"""
End-to-end regression suite: actuator range, settling, detection fidelity,
kinematics, grasp matrices against the published ones, and determinism
"""
import unittest

import numpy as np

from config import load_run_config
from control import PidState, ValvePolicy, settling_tick, track_setpoint
from graspsim import (
    FingerParams,
    compare_to_published,
    evaluate_grasp,
    object_from_table,
    table2_matrix,
    table3_matrix,
)
from kinematics import resolve_embedding
from plant import ActuatorKind, ActuatorState, PneumaticParams, characterize, default_curves
from policy import estimate_object, phase1_plan, run_named_grasp
from sensing import synthesize_trace, detect_transit_point
from tests.test_kinematics import brute_force_min_angle
from utils.geometry import side_lengths

SMALL_OBJECTS = ("Kite (Small)", "Rectangle (Small)", "Trapezoid (Small)")
LARGE_OBJECTS = ("Kite (Large)", "Rectangle (Large)", "Trapezoid (Large)")
SHAPE_MATCHED = {
    "Gripper-Rec-S": "Rectangle (Small)",
    "Gripper-Rec-L": "Rectangle (Large)",
    "Gripper-Trapez-S": "Trapezoid (Small)",
    "Gripper-Trapez-L": "Trapezoid (Large)",
    "Gripper-Kite-S": "Kite (Small)",
    "Gripper-Kite-L": "Kite (Large)",
}


class TestAcceptance(unittest.TestCase):
    """Regression against the reference behaviour"""

    @classmethod
    def setUpClass(cls):
        cls.cfg = load_run_config()
        cls.table2 = table2_matrix(cls.cfg)
        cls.table3 = table3_matrix(cls.cfg)

    def test_actuator_range(self):
        """Test the palm sweep runs exactly from 68 mm to 135 mm"""
        palm_curve, _ = default_curves(self.cfg.plant)
        samples = characterize(palm_curve, 21)
        self.assertEqual(samples[0], (0.0, 68.0))
        self.assertEqual(samples[-1], (103.4, 135.0))

    def test_palm_settling(self):
        """Test palm setpoints settle within 1 mm inside 5 s and end on Hold"""
        plant = self.cfg.plant
        params = PneumaticParams.from_config(plant)
        curve, _ = default_curves(plant)
        pid = PidState.from_config(self.cfg.palm_control, params.p_supply)
        policy = ValvePolicy.from_config(self.cfg.palm_control)
        rest = ActuatorState.at_pressure(ActuatorKind.PALM, 0.0, curve)
        for l_des in (75.0, 100.0, 135.0):
            trajectory = track_setpoint(l_des, rest, pid, policy, params, curve, 800)
            k = settling_tick(trajectory, l_des, 1.0)
            self.assertIsNotNone(k, f"{l_des} mm never settled")
            self.assertLessEqual(k * params.dt, 5.0, f"{l_des} mm settled after {k} ticks")
            self.assertEqual(trajectory[-1].valve.value, "Hold")

    def test_detection_fidelity(self):
        """Test seeded step traces are found within two samples and flat ones never trigger"""
        rng = np.random.default_rng(2024)
        for trial in range(100):
            step = int(rng.integers(20, 180))
            height = float(rng.uniform(15.0, 40.0))
            sigma = float(rng.uniform(0.0, 1.0))
            base = float(rng.uniform(-10.0, 10.0))
            trace = synthesize_trace(base, base + height, step, sigma, 200, 0.01, seed=trial)
            result = detect_transit_point(trace, 5.0, 5)
            self.assertEqual(result.detected_count, 4)
            for index in result.per_finger:
                self.assertLessEqual(abs(index - step), 2, f"trial {trial}: {index} vs {step}")

            flat = synthesize_trace(base, base, step, sigma, 200, 0.01, seed=1000 + trial)
            self.assertIsNone(detect_transit_point(flat, 5.0, 5).transit_point)

    def test_kinematics_oracle(self):
        """Test 100 random palms against a brute-force diagonal scan"""
        rng = np.random.default_rng(7)
        for sides in rng.uniform(68.0, 135.0, size=(100, 4)):
            sides = tuple(float(s) for s in sides)
            palm = resolve_embedding(sides)
            np.testing.assert_allclose(side_lengths(palm.vertex_array), sides, atol=1e-9)
            self.assertAlmostEqual(sum(palm.angles), 360.0, delta=1e-6)
            self.assertAlmostEqual(palm.min_angle, brute_force_min_angle(sides), delta=0.1)

    def test_fixed_configuration_matrix(self):
        """Test the fixed-configuration matrix against the published pattern"""
        comparison = compare_to_published(self.table2, "table2")
        self.assertEqual(comparison.total, 36)
        self.assertGreaterEqual(comparison.matches, 33)

        pattern = self.table2.pattern()
        for config, row in pattern.items():
            allowed = SMALL_OBJECTS if config.endswith("-S") else LARGE_OBJECTS
            for obj, cell in row.items():
                if cell == "S":
                    self.assertIn(obj, allowed, f"{config} should not grasp {obj}")
            self.assertEqual(row[SHAPE_MATCHED[config]], "S", config)

    def test_adaptive_template_matrix(self):
        """Test the adaptive-template matrix against the published real-object pattern"""
        comparison = compare_to_published(self.table3, "table3")
        self.assertEqual(comparison.total, 9)
        self.assertGreaterEqual(comparison.matches, 7)
        pattern = self.table3.pattern()
        for template in ("Rectangle", "Trapezoid"):
            self.assertEqual(pattern[template]["6-Face Cube"], "S")
            self.assertEqual(pattern[template]["Pear"], "S")

    def test_adaptive_dominance(self):
        """Test the adaptive policy grasps every object some fixed configuration grasps"""
        pattern = self.table2.pattern()
        for obj in self.table2.cols:
            if any(row[obj] == "S" for row in pattern.values()):
                run = run_named_grasp(obj, "adaptive", self.cfg)
                self.assertTrue(run.outcome.success, f"adaptive grasp of {obj}: {run.outcome.cell}")

    def test_scale_span(self):
        """Test adaptive grasps span seven to one across the catalog and every size between"""
        spans = []
        for obj in self.table2.cols:
            run = run_named_grasp(obj, "adaptive", self.cfg)
            if run.outcome.success:
                spans.append(max(object_from_table(obj).footprint))
        self.assertGreaterEqual(max(spans) / min(spans), 7.0)

        finger_params = FingerParams.from_config(self.cfg.finger, self.cfg.plant)
        policy = self.cfg.policy
        square, disc = object_from_table("RS"), object_from_table("Pear")
        for size in np.linspace(20.0, 120.0, 11):
            for obj in (square.scaled(size / 20.0), disc.scaled(size / 95.0)):
                palm = phase1_plan(estimate_object(obj), policy["clearance_mm"], policy["template_min_aspect"])
                outcome = evaluate_grasp(palm, obj, finger_params, self.cfg.graspsim["approach_margin_mm"],
                                         policy["majority"])
                self.assertTrue(outcome.success, f"{obj.name}: {outcome.cell}")

    def test_deterministic_runs(self):
        """Test a seeded grasp repeats exactly"""
        first = run_named_grasp("TS", "adaptive", self.cfg, seed=9)
        second = run_named_grasp("TS", "adaptive", self.cfg, seed=9)
        self.assertEqual(first.log, second.log)
        self.assertEqual(first.summary(), second.summary())


if __name__ == '__main__':
    unittest.main()
