"""
Box-Guided 3D Instance Fusion
Command-line entry point

Usage:
    python app.py synth --objects 5..5 --frames 30 --size 320x240 --seed 7 --out /tmp/s
    python app.py run /tmp/s --out /tmp/pred
    python app.py eval --pred /tmp/pred --gt /tmp/s/gt.txt
"""

import sys
from pathlib import Path

# Add packages to path
sys.path.append(str(Path(__file__).parent))

from pipeline.cli import main

if __name__ == "__main__":
    sys.exit(main())
