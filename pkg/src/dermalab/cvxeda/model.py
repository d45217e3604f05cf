"""Discrete model pieces for the convex decomposition: the sudomotor-response
ARMA kernel and the spline-plus-drift tonic basis.

The response kernel h(t) = exp(-t/tau0) - exp(-t/tau1) is discretized by
impulse invariance, so the digital filter's impulse response equals h sampled
on the grid and its poles sit exactly at exp(-dt/tau0) and exp(-dt/tau1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .._native import iir2_backward, iir2_forward
from ..errors import InvalidTimeConstants

__all__ = ["BatemanArma", "bateman_discretization", "TonicBasis", "tonic_basis"]


@dataclass(frozen=True)
class BatemanArma:
    """Second-order ARMA mapping a nonnegative driver to the phasic wave.

    Transfer function (p0 - p1) z^-1 / (1 - (p0 + p1) z^-1 + p0 p1 z^-2)
    with p0 = exp(-dt/tau0), p1 = exp(-dt/tau1); h[0] = 0 by construction.
    """

    tau0: float
    tau1: float
    sample_rate: float
    pole_slow: float = field(init=False)
    pole_fast: float = field(init=False)

    def __post_init__(self):
        if not (self.tau0 > self.tau1 > 0):
            raise InvalidTimeConstants(
                f"need tau0 > tau1 > 0, got tau0={self.tau0}, tau1={self.tau1}"
            )
        if self.sample_rate <= 0:
            raise InvalidTimeConstants("sample_rate must be positive")
        dt = 1.0 / self.sample_rate
        object.__setattr__(self, "pole_slow", math.exp(-dt / self.tau0))
        object.__setattr__(self, "pole_fast", math.exp(-dt / self.tau1))

    # AR polynomial 1 + a1 z^-1 + a2 z^-2
    @property
    def a1(self) -> float:
        return -(self.pole_slow + self.pole_fast)

    @property
    def a2(self) -> float:
        return self.pole_slow * self.pole_fast

    @property
    def ma_gain(self) -> float:
        return self.pole_slow - self.pole_fast

    @property
    def dc_gain(self) -> float:
        return self.ma_gain / (1.0 + self.a1 + self.a2)

    @property
    def kernel_norm(self) -> float:
        """l2 norm of the infinite sampled impulse response (closed form)."""
        p0, p1 = self.pole_slow, self.pole_fast
        return math.sqrt(
            1.0 / (1.0 - p0 * p0) + 1.0 / (1.0 - p1 * p1) - 2.0 / (1.0 - p0 * p1)
        )

    @property
    def peak_time_s(self) -> float:
        """Continuous-time argmax of h."""
        return math.log(self.tau0 / self.tau1) * self.tau0 * self.tau1 / (self.tau0 - self.tau1)

    @property
    def peak_value(self) -> float:
        t = self.peak_time_s
        return math.exp(-t / self.tau0) - math.exp(-t / self.tau1)

    def impulse_response(self, n: int) -> np.ndarray:
        k = np.arange(n)
        return self.pole_slow ** k - self.pole_fast ** k

    def apply(self, driver) -> np.ndarray:
        """Phasic wave for a driver sequence (zero initial conditions)."""
        driver = np.ascontiguousarray(driver, dtype=np.float64)
        u = iir2_forward(self.a1, self.a2, driver)
        out = np.empty_like(u)
        out[0] = 0.0
        out[1:] = self.ma_gain * u[:-1]
        return out

    def apply_adjoint(self, r) -> np.ndarray:
        """Transpose of :meth:`apply` (needed by the QP solver's gradient)."""
        r = np.asarray(r, dtype=np.float64)
        s = np.empty_like(r)
        s[:-1] = self.ma_gain * r[1:]
        s[-1] = 0.0
        return iir2_backward(self.a1, self.a2, np.ascontiguousarray(s))

    def ar_apply(self, q) -> np.ndarray:
        """Driver from the latent state: (Aq)_i = q_i + a1 q_{i-1} + a2 q_{i-2}."""
        q = np.asarray(q, dtype=np.float64)
        out = q.copy()
        out[1:] += self.a1 * q[:-1]
        out[2:] += self.a2 * q[:-2]
        return out

    def ar_apply_t(self, v) -> np.ndarray:
        """(A^T v)_i = v_i + a1 v_{i+1} + a2 v_{i+2}."""
        v = np.asarray(v, dtype=np.float64)
        out = v.copy()
        out[:-1] += self.a1 * v[1:]
        out[:-2] += self.a2 * v[2:]
        return out

    def ar_solve(self, p) -> np.ndarray:
        """q with Aq = p (A is unit lower triangular, hence invertible)."""
        return iir2_forward(self.a1, self.a2, np.ascontiguousarray(p, dtype=np.float64))


def bateman_discretization(tau0: float, tau1: float, sample_rate: float) -> BatemanArma:
    return BatemanArma(tau0=tau0, tau1=tau1, sample_rate=sample_rate)


def _bspline3(u):
    """Cardinal cubic B-spline on support (-2, 2); shifted copies sum to 1."""
    u = np.abs(np.asarray(u, dtype=np.float64))
    out = np.zeros_like(u)
    inner = u <= 1.0
    out[inner] = 2.0 / 3.0 - u[inner] ** 2 + 0.5 * u[inner] ** 3
    outer = (u > 1.0) & (u < 2.0)
    out[outer] = (2.0 - u[outer]) ** 3 / 6.0
    return out


@dataclass(frozen=True)
class TonicBasis:
    """Slow-varying basis: cubic B-spline bumps plus constant and ramp."""

    spline: sp.csr_matrix      # (n, n_spline); may have zero columns
    drift: np.ndarray          # (n, 2)
    knot_spacing: float

    @property
    def n_spline(self) -> int:
        return self.spline.shape[1]

    def evaluate(self, spline_coef, drift_coef) -> np.ndarray:
        out = self.drift @ np.asarray(drift_coef, dtype=np.float64)
        if self.n_spline:
            out = out + self.spline @ np.asarray(spline_coef, dtype=np.float64)
        return np.asarray(out).ravel()


def tonic_basis(n: int, sample_rate: float, knot_spacing: float) -> TonicBasis:
    """Build the tonic regressors for n samples.

    Knots sit every ``knot_spacing`` seconds with enough flanking bumps that
    the spline columns sum to exactly 1 at every sample. Spans shorter than
    one knot interval get drift columns only.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    if knot_spacing <= 0:
        raise ValueError("knot_spacing must be positive")
    t = np.arange(n) / sample_rate
    span = t[-1]
    ramp = t / span if span > 0 else t
    drift = np.column_stack([np.ones(n), ramp])

    if span < knot_spacing:
        spline = sp.csr_matrix((n, 0))
        return TonicBasis(spline=spline, drift=drift, knot_spacing=knot_spacing)

    u = span / knot_spacing
    k_min = -1
    k_max = math.ceil(u) + 1
    cols, rows, vals = [], [], []
    grid = t / knot_spacing
    for col, k in enumerate(range(k_min, k_max + 1)):
        lo = np.searchsorted(grid, k - 2.0, side="right")
        hi = np.searchsorted(grid, k + 2.0, side="left")
        if hi <= lo:
            continue
        idx = np.arange(lo, hi)
        v = _bspline3(grid[idx] - k)
        nz = v > 0
        rows.append(idx[nz])
        cols.append(np.full(nz.sum(), col))
        vals.append(v[nz])
    n_cols = k_max - k_min + 1
    spline = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n_cols),
    )
    return TonicBasis(spline=spline, drift=drift, knot_spacing=knot_spacing)
