"""
Cut-Paste Synthesizer
=====================

Deterministic synthetic dataset generator for instance detection:
object cutouts are pasted onto background scenes under occlusion and
truncation constraints and rendered with several blending modes.

Subcommands:
- extract-masks: segment object views shot on a uniform background
- synthesize: generate images, VOC/COCO annotations and the manifest
- verify / stats: re-check and summarize a generated dataset
- evaluate: AP/mAP of detector output at IoU 0.5

Usage:
    python main.py synthesize --config configs/default.json --workers 8
"""

import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from apps.synth_cli.main import main

if __name__ == "__main__":
    sys.exit(main())
