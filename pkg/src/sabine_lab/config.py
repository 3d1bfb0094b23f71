"""Centralized numeric tolerances.

One record controls the geometric solves and the comparison thresholds so
precision studies can tighten or relax everything through a single knob.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Tolerance knobs shared across geometry and billiards.

    geometric: residual targets for closures, ray solves and parametrization
        inversions.
    comparison: looser threshold for membership and reversibility checks.
    glancing: margin below which |xi| is treated as glancing and rejected.
    """

    geometric: float = 1e-12
    comparison: float = 1e-9
    glancing: float = 1e-10


DEFAULT_TOLERANCES = Tolerances()
