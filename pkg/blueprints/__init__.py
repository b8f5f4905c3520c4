"""
Blueprints for the morphing gripper results API
"""
from .api import api_bp

__all__ = ['api_bp']
