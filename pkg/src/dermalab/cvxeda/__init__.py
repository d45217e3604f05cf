"""Convex tonic/phasic decomposition of electrodermal traces."""

from .decompose import (CvxEdaParams, Decomposition, SolveInfo, decompose,
                        noise_matched_alpha)
from .model import BatemanArma, TonicBasis, bateman_discretization, tonic_basis

__all__ = [
    "CvxEdaParams",
    "Decomposition",
    "SolveInfo",
    "decompose",
    "noise_matched_alpha",
    "BatemanArma",
    "TonicBasis",
    "bateman_discretization",
    "tonic_basis",
]
