"""
Shared pytest setup: keep test runs off the rotating log files
"""
import os

os.environ.setdefault('LOG_TO_FILE', 'false')
