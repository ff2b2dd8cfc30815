"""Numerics for the Heisenberg group H^n and its sharp Trudinger-Moser functional."""

from heisenberg_tm.hgroup import (
    Box,
    GroupDim,
    HBall,
    HPoint,
    ball_volume,
    compose,
    dilate,
    hdist,
    hnorm,
    inverse,
    quasi_triangle_defect,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "GroupDim",
    "HBall",
    "HPoint",
    "ball_volume",
    "compose",
    "dilate",
    "hdist",
    "hnorm",
    "inverse",
    "quasi_triangle_defect",
]
