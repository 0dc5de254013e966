"""Numerical tolerances shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    absolute: float = 1e-9
    identity: float = 1e-12
    # ||sum of blocks|| <= diag_orth * (1 + ||v||)
    diag_orth: float = 1e-9
    # slack for indicator-domain membership, scaled by (1 + |reference|)
    domain: float = 1e-9
    # per-block ascent slack, scaled by (1 + |F|)
    monotone: float = 1e-12


DEFAULT = Tolerances()
