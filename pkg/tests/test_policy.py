"""
Unit tests for the three-phase grasping policy
"""
import unittest

from config import load_run_config
from graspsim import FailureReason, Scene, object_from_table
from kinematics import ShapeClass, ShapeTemplate, TemplateKind, classify_palm, template_configuration
from policy import (
    GraspPhase,
    GraspState,
    PhaseTransitionError,
    estimate_object,
    grasp_success,
    phase1_plan,
    plan_for_mode,
    run_grasp,
    run_named_grasp,
)
from utils.validators import ParameterError

OFFSET_PENTAGON = [(20, 20), (110, 20), (110, 70), (70, 110), (20, 110)]


def square_palm(side=130.0):
    return template_configuration(ShapeTemplate(TemplateKind.RECTANGLE, side, side))


class TestGraspPhase(unittest.TestCase):
    """Test cases for phase bookkeeping"""

    def test_forward_transitions(self):
        """Test the normal phase order is accepted and recorded"""
        phase = GraspPhase()
        phase.advance(GraspState.RECONFIGURE, 10)
        phase.advance(GraspState.ENVELOP, 20)
        phase.advance(GraspState.HOLD, 30)
        phase.advance(GraspState.DONE, 40)
        self.assertEqual([s for s, _ in phase.transitions], ["Init", "Reconfigure", "Envelop", "Hold", "Done"])
        self.assertTrue(phase.state.terminal)

    def test_backward_transition_rejected(self):
        """Test phases never move backwards"""
        phase = GraspPhase()
        phase.advance(GraspState.ENVELOP, 5)
        with self.assertRaises(PhaseTransitionError):
            phase.advance(GraspState.RECONFIGURE, 6)

    def test_done_only_from_hold(self):
        """Test Done cannot skip the hold window"""
        phase = GraspPhase()
        phase.advance(GraspState.ENVELOP, 5)
        with self.assertRaises(PhaseTransitionError):
            phase.advance(GraspState.DONE, 6)

    def test_terminal_is_final(self):
        """Test nothing follows Failed"""
        phase = GraspPhase()
        phase.fail(FailureReason.TIMEOUT, 3)
        self.assertIs(phase.failure_reason, FailureReason.TIMEOUT)
        with self.assertRaises(PhaseTransitionError):
            phase.fail(FailureReason.SLIP, 4)

    def test_mark_contact_keeps_first_tick(self):
        """Test a second detection does not move the contact tick"""
        phase = GraspPhase()
        phase.mark_contact(1, 12)
        phase.mark_contact(1, 30)
        self.assertEqual(phase.contact_ticks[1], 12)
        self.assertEqual(phase.contact_count, 1)
        self.assertEqual(phase.to_dict()["finger_contacts"], [False, True, False, False])


class TestPlanning(unittest.TestCase):
    """Test cases for object estimation and palm pre-shaping"""

    def test_round_object_has_no_hint(self):
        """Test a round object falls back to the rectangle template"""
        est = estimate_object(object_from_table("Pear"))
        self.assertIsNone(est.shape_hint)
        self.assertAlmostEqual(est.footprint_width, 95.0, places=6)

    def test_small_object_clamped(self):
        """Test a small object gets the shortest palm"""
        palm = phase1_plan(estimate_object(object_from_table("RS")))
        self.assertEqual(palm.sides, (68.0, 68.0, 68.0, 68.0))

    def test_sizing_rule(self):
        """Test each side is the extent plus twice the clearance"""
        palm = phase1_plan(estimate_object(object_from_table("RL")), clearance=10.0)
        self.assertEqual(palm.sides, (130.0, 130.0, 130.0, 130.0))
        palm = phase1_plan(estimate_object(object_from_table("RS")), clearance=10.0)
        self.assertEqual(palm.sides, (68.0, 68.0, 68.0, 68.0))

    def test_kite_plan(self):
        """Test a kite object plans a kite palm with clearance on both axes"""
        palm = phase1_plan(estimate_object(object_from_table("KS")))
        self.assertEqual(palm, template_configuration(ShapeTemplate(TemplateKind.KITE, 112.0, 82.0)))

    def test_aspect_stretch(self):
        """Test a squat kite estimate is widened to the minimum aspect first"""
        est = estimate_object(object_from_table("KS"))
        narrow = type(est)(footprint_width=40.0, footprint_depth=50.0, shape_hint=TemplateKind.KITE)
        palm = phase1_plan(narrow, clearance=10.0)
        for side, expected in zip(palm.sides, (85.0, 85.0, 70.0, 70.0)):
            self.assertAlmostEqual(side, expected, places=9)

    def test_round_plan(self):
        """Test the pear gets a square palm of footprint plus clearance"""
        palm = phase1_plan(estimate_object(object_from_table("Pear")))
        for side in palm.sides:
            self.assertAlmostEqual(side, 127.0, places=6)

    def test_negative_clearance(self):
        """Test clearance must be non-negative"""
        with self.assertRaises(ParameterError):
            phase1_plan(estimate_object(object_from_table("RS")), clearance=-1.0)

    def test_oversize_warning_only_for_oversize_objects(self):
        """Test clamping the clearance is quiet and only a too-large object warns"""
        with self.assertNoLogs("policy", level="WARNING"):
            phase1_plan(estimate_object(object_from_table("RL")))
        with self.assertLogs("policy", level="WARNING"):
            phase1_plan(estimate_object(object_from_table("Tray")))

    def test_palm_shape_uses_config_tolerances(self):
        """Test the planned palm is classified with the configured tolerances"""
        cfg = load_run_config()
        palm = plan_for_mode("adaptive", object_from_table("TS"), cfg)
        self.assertIs(classify_palm(palm, cfg.kinematics), ShapeClass.TRAPEZOID)
        loose = cfg.with_overrides({"kinematics": {"length_tol_mm": 25.0}})
        self.assertIs(classify_palm(palm, loose.kinematics), ShapeClass.KITE)

    def test_plan_for_mode_errors(self):
        """Test unknown modes and adaptive without an object are rejected"""
        cfg = load_run_config()
        with self.assertRaises(ParameterError):
            plan_for_mode("grab", object_from_table("RS"), cfg)
        with self.assertRaises(ParameterError):
            plan_for_mode("adaptive", None, cfg)

    def test_fixed_mode(self):
        """Test a fixed mode ignores the object"""
        cfg = load_run_config()
        a = plan_for_mode("fixed:Gripper-Rec-L", object_from_table("RS"), cfg)
        b = plan_for_mode("fixed:Gripper-Rec-L", object_from_table("KL"), cfg)
        self.assertEqual(a, b)


class TestGraspVerdict(unittest.TestCase):
    """Test cases for grasp_success"""

    def contacts(self, *fingers):
        phase = GraspPhase()
        for i in fingers:
            phase.mark_contact(i, 0)
        return phase

    def test_success(self):
        """Test three persistent contacts over the full hold succeed"""
        phase = self.contacts(0, 1, 3)
        phase.held_ticks = 500
        verdict = grasp_success(phase, 500)
        self.assertTrue(verdict.success)
        self.assertIsNone(verdict.failure_reason)

    def test_insufficient(self):
        """Test two contacts are not a majority"""
        phase = self.contacts(0, 1)
        phase.held_ticks = 500
        self.assertIs(grasp_success(phase, 500).failure_reason, FailureReason.INSUFFICIENT_CONTACTS)

    def test_slip(self):
        """Test a dropped contact is a slip"""
        phase = self.contacts(0, 1, 2)
        phase.dropped[2] = True
        phase.held_ticks = 120
        self.assertIs(grasp_success(phase, 500).failure_reason, FailureReason.SLIP)

    def test_short_hold(self):
        """Test an unfinished hold window times out"""
        phase = self.contacts(0, 1, 2, 3)
        phase.held_ticks = 499
        self.assertIs(grasp_success(phase, 500).failure_reason, FailureReason.TIMEOUT)

    def test_recorded_failure_wins(self):
        """Test an earlier failure reason is reported unchanged"""
        phase = self.contacts(0, 1, 2, 3)
        phase.fail(FailureReason.NO_DESCEND, 0)
        self.assertIs(grasp_success(phase, 0).failure_reason, FailureReason.NO_DESCEND)


class TestRunGrasp(unittest.TestCase):
    """End-to-end policy runs"""

    def setUp(self):
        self.cfg = load_run_config()

    def test_adaptive_small_rectangle(self):
        """Test the adaptive policy grasps the small rectangle through every phase"""
        run = run_named_grasp("RS", "adaptive", self.cfg)
        self.assertTrue(run.outcome.success)
        self.assertEqual([s for s, _ in run.phase.transitions],
                         ["Init", "Reconfigure", "Envelop", "Hold", "Done"])
        self.assertEqual(run.outcome.contacts, (True,) * 4)
        self.assertEqual({r["phase"] for r in run.log}, {"Init", "Reconfigure", "Envelop", "Hold"})
        self.assertEqual(run.summary()["ticks"], len(run.log))
        self.assertEqual(run.summary()["palm_shape"], "Rectangle")

    def test_fixed_small_palm_large_object(self):
        """Test the large rectangle cannot enter the small rectangular palm"""
        run = run_named_grasp("RL", "fixed:Gripper-Rec-S", self.cfg)
        self.assertFalse(run.outcome.success)
        self.assertIs(run.outcome.failure_reason, FailureReason.NO_DESCEND)
        self.assertIs(run.phase.state, GraspState.FAILED)

    def test_oversize(self):
        """Test the tray exceeds the largest palm"""
        run = run_named_grasp("Tray", "adaptive", self.cfg)
        self.assertIs(run.outcome.failure_reason, FailureReason.OVERSIZE)

    def test_leak_causes_slip(self):
        """Test latched fingers lose contact when the chambers leak"""
        cfg = self.cfg.with_overrides({"plant": {"leak": 0.02}})
        run = run_named_grasp("RS", "adaptive", cfg)
        self.assertIs(run.outcome.failure_reason, FailureReason.SLIP)
        self.assertTrue(any(run.phase.dropped))

    def test_empty_palm_times_out(self):
        """Test saturating every finger without contact is a timeout"""
        run = run_grasp(None, "adaptive", self.cfg, scene=Scene.empty(square_palm()))
        self.assertIs(run.outcome.failure_reason, FailureReason.TIMEOUT)
        self.assertEqual(run.phase.contact_count, 0)
        self.assertTrue(all(run.phase.saturated))

    def test_offset_scene(self):
        """Test three contacts of four still make a grasp"""
        scene = Scene.explicit(square_palm(), OFFSET_PENTAGON)
        run = run_grasp(None, "adaptive", self.cfg, scene=scene)
        self.assertTrue(run.outcome.success)
        self.assertEqual(run.outcome.contacts, (True, True, False, True))
        self.assertTrue(run.phase.saturated[2])
        self.assertIsNone(run.outcome.contact_points[2])

    def test_setpoint_flat_after_contact(self):
        """Test a latched finger's pressure setpoint never rises after its contact tick"""
        for name in ("RS", "KS", "RL", "TL"):
            run = run_named_grasp(name, "adaptive", self.cfg)
            by_tick = {r["tick"]: r for r in run.log}
            for i, tick in enumerate(run.phase.contact_ticks):
                if tick is None:
                    continue
                self.assertLessEqual(run.phase.detection_ticks[i], tick)
                held = by_tick[tick]["ramp_setpoint_kpa"][i]
                later = [r["ramp_setpoint_kpa"][i] for r in run.log if r["tick"] >= tick]
                self.assertLessEqual(max(later), held, f"{name} finger {i}")

    def test_deterministic(self):
        """Test equal seeds give identical runs"""
        a = run_named_grasp("KS", "adaptive", self.cfg, seed=3)
        b = run_named_grasp("KS", "adaptive", self.cfg, seed=3)
        self.assertEqual(a.summary(), b.summary())
        self.assertEqual(a.log, b.log)


if __name__ == '__main__':
    unittest.main()
