"""dermalab: batch analysis of electrodermal activity against microclimate.

Pipeline stages: ingest session CSVs -> clean/normalize/filter -> convex
tonic/phasic decomposition -> per-window sympathetic indices -> random-forest
modeling with exact Shapley attributions -> nonparametric statistics and
reports. See the `cli` module (or the `dermalab` console script) for the
end-to-end surface.
"""

from ._native import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
