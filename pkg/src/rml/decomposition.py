"""The bilinear kernel of the time-averaged operator, its convolution
majorant, and the far-field / dyadic-diagonal / near-origin split.

The bilinear kernel

    K(r, s)[g] = int_0^inf ( int_I m(rho/t) g(t) dt ) b_d(r rho) b_d(s rho)
                 rho^(d-1) drho

is integrated over the swept band [lo, 2*hi] with panels bounded by a quarter
phase of the product oscillation (frequency r + s).  Its majorant evaluates

    W[f(s)](x) = ( |curly_K[f(s)]| * w_N )(x),
    curly_K[f(s)](x) = int_I f_t(s) kappa_t(x) dt

on a uniform symmetric grid, where the convolution with w_N(x) = (1+|x|)^-N
is an FFT product (w_N is truncated at |u| = 40, below machine precision for
the default N = 10).

The split integrates s over (4r, inf) for the far field E, over (0, r/4) for
the near field H, and over each dyadic interval I_m = [2^m, 2^(m+1)) with r
restricted to the envelope I_m* = [2^(m-2), 2^(m+3)) for the diagonal sum of
S_m, each term carrying the fourfold W(+-r +- s) sum and the
[(1+r)(1+s)]^-(d-1)/2 weight.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .bessel import kernel_b
from .errors import DomainError, ExponentRangeError
from .hankel import RadialProfile
from .lorentz import (SampledFunction, LorentzExponents, half_line_measure,
                      line_measure, lorentz_norm)
from .multipliers import one_dim_kernel, smooth_step, symmetric_grid
from .operators import geometric_t_grid
from .quadrature import band_rule

RATIO_ATOL = 1e-12
CONV_MARGIN = 40.0  # (1 + 40)^-10 ~ 7e-17: the w_N tail beyond is machine noise


@dataclass(frozen=True)
class CutoffFunction:
    """Smooth eta: supported in [1/8, 8], identically 1 on [1/4, 4], so that
    eta(rho) m(rho/t) = m(rho/t) for every band multiplier and t in [1, 2]."""

    lo: float = 0.125
    lo_plateau: float = 0.25
    hi_plateau: float = 4.0
    hi: float = 8.0

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        rise = smooth_step((rho - self.lo) / (self.lo_plateau - self.lo))
        fall = smooth_step((self.hi - rho) / (self.hi - self.hi_plateau))
        out = rise * fall
        return out if rho.ndim else float(out)


@dataclass(frozen=True)
class MajorantWeight:
    """w_N(x) = (1 + |x|)^-N, N > 1: even, decreasing in |x|, integrable."""

    N: float = 10.0

    def __post_init__(self):
        if not (self.N > 1.0):
            raise DomainError("majorant weight requires N > 1")

    def __call__(self, x):
        return (1.0 + np.abs(np.asarray(x, dtype=float))) ** (-self.N)


@dataclass(frozen=True)
class DyadicBlock:
    """I_m = [2^m, 2^(m+1)) with envelope I_m* = [2^(m-2), 2^(m+3))."""

    m: int

    @property
    def interval(self):
        return (2.0**self.m, 2.0 ** (self.m + 1))

    @property
    def envelope(self):
        return (2.0 ** (self.m - 2), 2.0 ** (self.m + 3))

    def contains(self, s):
        lo, hi = self.interval
        return (np.asarray(s, dtype=float) >= lo) & (np.asarray(s, dtype=float) < hi)

    def indicator_pieces(self, r):
        """(left, envelope, right) indicators at r; they sum to 1 exactly."""
        r = np.asarray(r, dtype=float)
        lo, hi = self.envelope
        left = (r < lo).astype(float)
        env = ((r >= lo) & (r < hi)).astype(float)
        right = (r >= hi).astype(float)
        return left, env, right


def block_index(s):
    """The m with s in I_m (floor of log2)."""
    return int(math.floor(math.log2(s)))


# ---------------------------------------------------------------------------
# bilinear kernel


class BilinearKernelEngine:
    """Quadrature for K(r, s)[g] over a probe set with r + s <= phase_bound."""

    def __init__(self, m, d, *, phase_bound, refine=1, gl_order=6):
        self.m = m
        self.d = float(d)
        lo = m.support[0]
        hi = 2.0 * m.support[1]
        max_len = np.pi / (4.0 * float(phase_bound) * float(refine))
        self.nodes, self.weights = band_rule(lo, hi, max_len, order=gl_order,
                                             density_exponent=self.d - 1.0)
        self._m_rows = {}

    def _multiplier_rows(self, t_grid):
        key = hash(t_grid.tobytes())
        rows = self._m_rows.get(key)
        if rows is None:
            rows = np.stack([self.m(self.nodes / t) for t in t_grid])
            self._m_rows[key] = rows
        return rows

    def averaged_multiplier(self, t_grid, g_values):
        """int_I m(rho/t) g(t) dt at the nodes (trapezoid in t).

        ``g_values`` may be (n_t,) for one weight or (n_t, k) for a batch;
        returns (n_nodes,) or (k, n_nodes).
        """
        t_grid = np.asarray(t_grid, dtype=float)
        g = np.asarray(g_values, dtype=float)
        w = np.zeros_like(t_grid)
        w[:-1] += np.diff(t_grid) / 2.0
        w[1:] += np.diff(t_grid) / 2.0
        rows = self._multiplier_rows(t_grid)
        if g.ndim == 1:
            return (w * g) @ rows
        return (w[:, None] * g).T @ rows

    def kernel_b_rows(self, points):
        return kernel_b(self.d, np.multiply.outer(np.asarray(points, dtype=float),
                                                  self.nodes))

    def kernel_values(self, r_values, s_values, averaged):
        """K(r_i, s_j)[g] for one fixed averaged multiplier (n_nodes,)."""
        Br = self.kernel_b_rows(r_values)
        Bs = self.kernel_b_rows(s_values)
        return np.einsum("in,jn,n->ij", Br, Bs, averaged * self.weights)

    def kernel_columns(self, r_values, s_values, averaged_per_s):
        """K(r_i, s_j)[g_j] where the weight varies per column (n_s, n_nodes)."""
        Br = self.kernel_b_rows(r_values)
        Bs = self.kernel_b_rows(s_values)
        return np.einsum("in,jn->ij", Br, Bs * (averaged_per_s * self.weights))


def bilinear_kernel(m, r, s, g, d, *, t_grid=None, engine=None):
    """K(r, s)[g] for a weight g on I = [1, 2] (callable or samples)."""
    r, s = float(r), float(s)
    if r <= 0 or s <= 0:
        raise DomainError("r and s must be positive")
    if t_grid is None:
        t_grid = geometric_t_grid()
    t_grid = np.asarray(t_grid, dtype=float)
    g_values = np.asarray(g(t_grid) if callable(g) else g, dtype=float)
    if engine is None:
        engine = BilinearKernelEngine(m, d, phase_bound=r + s)
    averaged = engine.averaged_multiplier(t_grid, g_values)
    return float(engine.kernel_values([r], [s], averaged)[0, 0])


# ---------------------------------------------------------------------------
# majorant


class MajorantEngine:
    """The dilated line kernels, curly_K rows, and W = |curly_K| * w_N."""

    def __init__(self, m, t_grid, *, N=10.0, halfwidth=442.0, spacing=0.05):
        self.m = m
        self.t_grid = np.asarray(t_grid, dtype=float)
        self.weight = MajorantWeight(float(N))
        self.x_grid = symmetric_grid(halfwidth, spacing)
        self.spacing = float(self.x_grid[1] - self.x_grid[0])
        base = one_dim_kernel(m, grid=self.x_grid)
        self.base_kernel = base
        # kappa_t(x) = t * kappa(t x); zero beyond the stored span
        self.kernel_rows = np.stack([
            t * np.interp(t * self.x_grid, self.x_grid, base.values,
                          left=0.0, right=0.0)
            for t in self.t_grid])
        n_side = int(math.ceil(CONV_MARGIN / self.spacing))
        u = self.spacing * np.arange(-n_side, n_side + 1)
        self.conv_kernel = self.weight(u)

    def t_weights(self):
        t = self.t_grid
        w = np.zeros_like(t)
        w[:-1] += np.diff(t) / 2.0
        w[1:] += np.diff(t) / 2.0
        return w

    def curly_rows(self, fam, s_values):
        """curly_K[f(s)](x) for each s: rows over the x grid."""
        F = fam.values_at(s_values)  # (n_t, n_s)
        return (self.t_weights()[:, None] * F).T @ self.kernel_rows

    def w_rows(self, curly):
        """W rows: |curly_K| convolved with w_N (trapezoid via FFT)."""
        curly = np.atleast_2d(curly)
        return fftconvolve(np.abs(curly), self.conv_kernel[None, :],
                           mode="same", axes=1) * self.spacing

    def rows_at(self, rows, x_points):
        """Evaluate precomputed rows at off-grid points (linear interpolation)."""
        return np.stack([np.interp(x_points, self.x_grid, row) for row in rows])


def majorant_W(m, fam, s, x_targets, *, N=10.0, engine=None):
    """W[f(s)] at the given points (builds a throwaway engine if none given)."""
    x_targets = np.asarray(x_targets, dtype=float)
    if engine is None:
        halfwidth = float(np.max(np.abs(x_targets), initial=1.0)) + CONV_MARGIN + 2.0
        engine = MajorantEngine(m, fam.t_grid, N=N, halfwidth=halfwidth)
    rows = engine.w_rows(engine.curly_rows(fam, [float(s)]))
    return np.interp(x_targets, engine.x_grid, rows[0])


def safe_ratio(numerator, denominator, atol=RATIO_ATOL):
    """ratio with the 0/0 -> 0 convention; flags a positive/zero division."""
    if denominator > atol:
        return numerator / denominator, False
    if numerator <= atol:
        return 0.0, False
    return math.inf, True


# ---------------------------------------------------------------------------
# the pointwise kernel bound


def kernel_bound_check(m, fam, probe, N=10.0, d=None, *, refine=1,
                       bilinear_engine=None, majorant_engine=None):
    """Ratios |K(r,s)[f(s)]| / majorant over a probe set.

    ``probe`` is a pair (r_values, s_values); the full product grid is
    checked.  Returns a report with the per-pair ratios, their maximum, and
    any bound violations (positive kernel against a vanishing majorant).
    """
    d = float(d if d is not None else fam.d)
    r_values = np.asarray(probe[0], dtype=float)
    s_values = np.asarray(probe[1], dtype=float)
    phase = float(np.max(r_values) + np.max(s_values))
    if bilinear_engine is None:
        bilinear_engine = BilinearKernelEngine(m, d, phase_bound=phase,
                                               refine=refine)
    F = fam.values_at(s_values)  # (n_t, n_s)
    averaged = bilinear_engine.averaged_multiplier(fam.t_grid, F)  # (n_s, n_nodes)
    lhs = np.abs(bilinear_engine.kernel_columns(r_values, s_values, averaged))

    if majorant_engine is None:
        halfwidth = phase + CONV_MARGIN + 2.0
        majorant_engine = MajorantEngine(m, fam.t_grid, N=N,
                                         halfwidth=halfwidth,
                                         spacing=0.05 / refine)
    w_rows = majorant_engine.w_rows(majorant_engine.curly_rows(fam, s_values))
    decay = ((1.0 + r_values)[:, None] * (1.0 + s_values)[None, :]) ** (-(d - 1.0) / 2.0)
    rhs = np.empty_like(lhs)
    for j, s in enumerate(s_values):
        pts = np.concatenate([r_values + s, r_values - s, -r_values + s,
                              -r_values - s])
        w4 = np.interp(pts, majorant_engine.x_grid, w_rows[j])
        rhs[:, j] = w4.reshape(4, -1).sum(axis=0)
    rhs = rhs * decay

    ratios = np.zeros_like(lhs)
    live = rhs > RATIO_ATOL
    ratios[live] = lhs[live] / rhs[live]
    violations = (~live) & (lhs > RATIO_ATOL)
    return {
        "max_ratio": float(np.max(ratios, initial=0.0)),
        "ratios": ratios,
        "n_violations": int(np.sum(violations)),
        "refine": int(refine),
    }


# ---------------------------------------------------------------------------
# the E / S / H split


def split_EHS(m, fam, d=None, N=10.0, *, s_stride=8, majorant_engine=None):
    """The far-field, dyadic-diagonal, and near-origin majorant profiles.

    Returns (E, S, H) as radial profiles on the family's grid, where S is the
    sum over the finitely many dyadic blocks meeting the truncated domain.
    """
    d = float(d if d is not None else fam.d)
    r_grid = fam.radial_grid
    s_nodes = r_grid[::s_stride]
    coarse = SampledFunction(s_nodes, np.zeros_like(s_nodes),
                             half_line_measure(d, float(r_grid[-1])))
    s_weights = coarse.cell_weights()

    if majorant_engine is None:
        halfwidth = 2.0 * float(r_grid[-1]) + CONV_MARGIN + 2.0
        majorant_engine = MajorantEngine(m, fam.t_grid, N=N, halfwidth=halfwidth)
    w_rows = majorant_engine.w_rows(majorant_engine.curly_rows(fam, s_nodes))

    weight_r = (1.0 + r_grid) ** (-(d - 1.0) / 2.0)
    E = np.zeros_like(r_grid)
    S = np.zeros_like(r_grid)
    H = np.zeros_like(r_grid)
    for k, s in enumerate(s_nodes):
        pts = np.concatenate([r_grid + s, r_grid - s, -r_grid + s, -r_grid - s])
        w4 = np.interp(pts, majorant_engine.x_grid, w_rows[k]).reshape(4, -1).sum(axis=0)
        term = w4 * weight_r * (s_weights[k] * (1.0 + s) ** (-(d - 1.0) / 2.0))
        E += term * (s > 4.0 * r_grid)
        H += term * (s < r_grid / 4.0)
        lo_env, hi_env = DyadicBlock(block_index(s)).envelope
        S += term * ((r_grid >= lo_env) & (r_grid < hi_env))
    return (RadialProfile(r_grid, E, d), RadialProfile(r_grid, S, d),
            RadialProfile(r_grid, H, d))


def proposition_checks(d, p, q, families, *, m=None, N=10.0, s_stride=8,
                       refined_families=None, a_values=None):
    """Suite ratios for the three split estimates.

    For each family: ||Hf|| / (A(p,q) ||f||_{p,inf;B}),
    ||sum S_m f|| / (A(p,inf) ||f||_{p,q;B}), and the same for E.  Reports the
    suite maxima; with ``refined_families`` (same seeds, finer t-grid) also
    the relative change of each maximum.
    """
    d = float(d)
    p, q = float(p), float(q)
    if not (1.0 < p < 2.0 * d / (d + 1.0)):
        raise ExponentRangeError(
            f"p must satisfy 1 < p < 2d/(d+1) = {2.0 * d / (d + 1.0):g}")
    if not (1.0 <= q):
        raise ExponentRangeError("q must satisfy 1 <= q <= inf")
    if m is None:
        from .multipliers import bochner_riesz

        m = bochner_riesz(1.0)
    if a_values is None:
        from .probes import compute_A

        a_pq = compute_A(m, d, p, q)
        a_pinf = compute_A(m, d, p, math.inf)
    else:
        a_pq, a_pinf = a_values

    e_pq = LorentzExponents(p, q)
    e_pinf = LorentzExponents(p, math.inf)

    def suite_ratios(fams):
        engines = {}
        rows = []
        for fam in fams:
            key = hash(fam.t_grid.tobytes())
            if key not in engines:
                halfwidth = 2.0 * float(fam.radial_grid[-1]) + CONV_MARGIN + 2.0
                engines[key] = MajorantEngine(m, fam.t_grid, N=N,
                                              halfwidth=halfwidth)
            E, S, H = split_EHS(m, fam, d, N, s_stride=s_stride,
                                majorant_engine=engines[key])
            measure = half_line_measure(d, float(fam.radial_grid[-1]))
            fB = SampledFunction(fam.radial_grid, fam.b_profile(), measure)
            norm_weak = lorentz_norm(fB, e_pinf)
            norm_pq = lorentz_norm(fB, e_pq)
            h_ratio, h_flag = safe_ratio(
                lorentz_norm(H.to_sampled(measure), e_pq), a_pq * norm_weak)
            s_ratio, s_flag = safe_ratio(
                lorentz_norm(S.to_sampled(measure), e_pq), a_pinf * norm_pq)
            e_ratio, e_flag = safe_ratio(
                lorentz_norm(E.to_sampled(measure), e_pq), a_pinf * norm_pq)
            rows.append({"H": h_ratio, "S": s_ratio, "E": e_ratio,
                         "flagged": bool(h_flag or s_flag or e_flag)})
        return rows

    rows = suite_ratios(families)
    report = {
        "d": d, "p": p, "q": q, "N": N, "multiplier": m.label,
        "A_pq": a_pq, "A_pinf": a_pinf,
        "per_family": rows,
        "max_H": max(r["H"] for r in rows),
        "max_S": max(r["S"] for r in rows),
        "max_E": max(r["E"] for r in rows),
        "n_flagged": sum(r["flagged"] for r in rows),
    }
    if refined_families is not None:
        fine = suite_ratios(refined_families)
        for key in ("H", "S", "E"):
            coarse_max = report[f"max_{key}"]
            fine_max = max(r[key] for r in fine)
            report[f"max_{key}_refined"] = fine_max
            report[f"delta_{key}"] = abs(fine_max - coarse_max) / max(coarse_max, RATIO_ATOL)
    return report
