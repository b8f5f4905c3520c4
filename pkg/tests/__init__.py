"""
Unit tests for the morphing gripper simulator
"""
