"""gridgame: attacker-vs-defender campaign simulation over smart-grid networks.

Produces labeled synthetic intrusion-alert datasets (sensor alert streams in
unified2 format plus per-event ground-truth labels) from declarative scenario
documents.  See the README for the CLI and service entry points.
"""

__version__ = "0.1.0"
