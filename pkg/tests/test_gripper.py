"""
Unit tests for the eight-actuator gripper simulation
"""
import unittest

from config import load_run_config
from graspsim import Scene
from gripper import FingerMode, Gripper
from kinematics import ShapeTemplate, TemplateKind, template_configuration
from plant import ValveCommand
from utils.validators import ParameterError

OFFSET_PENTAGON = [(20, 20), (110, 20), (110, 70), (70, 110), (20, 110)]


def offset_scene():
    palm = template_configuration(ShapeTemplate(TemplateKind.RECTANGLE, 130.0, 130.0))
    return Scene.explicit(palm, OFFSET_PENTAGON)


class TestGripper(unittest.TestCase):
    """Test cases for Gripper stepping"""

    def setUp(self):
        self.cfg = load_run_config(overrides={"finger": {"noise_sigma": 0.0}})

    def test_initial_state(self):
        """Test a new gripper rests at zero pressure"""
        gripper = Gripper(self.cfg)
        snap = gripper.snapshot()
        self.assertEqual(snap.tick, 0)
        self.assertEqual(snap.palm_lengths, (68.0,) * 4)
        self.assertEqual(snap.finger_angles, (0.0,) * 4)
        self.assertIs(gripper.finger_mode, FingerMode.TRACK)

    def test_palm_settles(self):
        """Test all four palm sides settle on their setpoints"""
        gripper = Gripper(self.cfg)
        gripper.set_palm_setpoints([80.0, 100.0, 120.0, 135.0])
        gripper.run(800)
        self.assertTrue(gripper.palm_settled(1.0))

    def test_setpoint_count(self):
        """Test setpoints need one value per actuator"""
        gripper = Gripper(self.cfg)
        with self.assertRaises(ParameterError):
            gripper.set_palm_setpoints([100.0] * 3)
        with self.assertRaises(ParameterError):
            gripper.set_finger_setpoints([10.0] * 5)

    def test_ramp_step_positive(self):
        """Test the ramp needs a positive step"""
        with self.assertRaises(ParameterError):
            Gripper(self.cfg).start_ramp(0.0)

    def test_finger_tracking(self):
        """Test fingers follow angle setpoints in track mode"""
        gripper = Gripper(self.cfg)
        gripper.set_finger_setpoints([40.0] * 4)
        gripper.run(800)
        for angle in gripper.snapshot().finger_angles:
            self.assertAlmostEqual(angle, 40.0, delta=2.0)

    def test_scene_contact_angles(self):
        """Test fingers that reach the object get a contact angle"""
        gripper = Gripper(self.cfg, scene=offset_scene())
        self.assertIsNone(gripper.contact_angles[2])
        for i in (0, 1, 3):
            self.assertIsNotNone(gripper.contact_angles[i])
            self.assertGreater(gripper.contact_angles[i], 0.0)

    def test_ramp_stops_at_contact(self):
        """Test a ramped finger stops bending at the object and its sensor jumps"""
        gripper = Gripper(self.cfg, scene=offset_scene())
        gripper.start_ramp(0.5)
        gripper.run(400)
        theta_c = gripper.contact_angles[0]
        self.assertTrue(gripper.in_contact(0))
        self.assertEqual(gripper.effective_angle(0), theta_c)
        sp = gripper.sensor_params
        self.assertAlmostEqual(gripper.last_readings[0], sp.offset + sp.gain_per_deg * theta_c + sp.contact_gain,
                               places=9)
        self.assertFalse(gripper.in_contact(2))

    def test_unreached_finger_saturates(self):
        """Test a finger with nothing to touch ends saturated on Hold"""
        gripper = Gripper(self.cfg, scene=offset_scene())
        gripper.start_ramp(0.5)
        gripper.run(800)
        self.assertTrue(gripper.saturated(2))
        self.assertIs(gripper.fingers[2].valve, ValveCommand.HOLD)

    def test_latch_holds_pressure(self):
        """Test a latched finger keeps its pressure without leak"""
        gripper = Gripper(self.cfg)
        gripper.start_ramp(0.5)
        gripper.run(50)
        gripper.latch(1)
        pressure = gripper.fingers[1].pressure
        gripper.run(50)
        self.assertEqual(gripper.fingers[1].pressure, pressure)
        self.assertGreater(gripper.fingers[0].pressure, pressure)

    def test_seeded_noise(self):
        """Test identical seeds give identical sensor streams"""
        cfg = load_run_config()
        a = [s.sensor for s in Gripper(cfg, seed=5).run(30)]
        b = [s.sensor for s in Gripper(cfg, seed=5).run(30)]
        c = [s.sensor for s in Gripper(cfg, seed=6).run(30)]
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)

    def test_snapshot_dict(self):
        """Test the per-tick record keys"""
        record = Gripper(self.cfg).tick().to_dict()
        self.assertEqual(set(record), {"tick", "palm_pressure_kpa", "palm_length_mm", "palm_valve",
                                       "finger_pressure_kpa", "finger_angle_deg", "finger_valve",
                                       "ramp_setpoint_kpa", "sensor", "in_contact"})
        self.assertEqual(record["tick"], 0)


if __name__ == '__main__':
    unittest.main()
