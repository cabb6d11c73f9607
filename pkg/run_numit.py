#!/usr/bin/env python3
"""
NuMIT PID
Entry point for running the command line from a source checkout
"""

import sys
from pathlib import Path

# Add the project root to the path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from harness.cli import main

if __name__ == "__main__":
    main()
