"""Numerical probes of the norm equivalences tying the maximal operator to
Lorentz norms of kernels.

Operator norms are never claimed exactly: test suites give lower bounds
(labelled as such in every report), while kernel-side quantities are direct
quadratures.  The suites mix band-limited random profiles (images under the
radial transform of random smooth data on the band) with focusing profiles
b_d(r) * bump(r/R0) whose slowly decaying oscillation nearly extremizes the
maximal operator, so that two-sided ratio bands are informative.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .bessel import kernel_b
from .errors import DomainError, ExponentRangeError
from .hankel import HankelPlan, RadialProfile, default_radial_grid, hankel_transform
from .lorentz import (LorentzExponents, SampledFunction, half_line_measure,
                      line_measure, lorentz_norm, weighted_p_norm)
from .multipliers import (bochner_riesz, band_transform, kernel_of,
                          one_dim_kernel, smooth_step)
from .operators import (SpectralEngine, TimeFamily, averaged_dual_operator,
                        geometric_t_grid, maximal_operator)

BAND_SOURCE_POINTS = 1024


def _validate_pair(d, p, q):
    limit = 2.0 * d / (d + 1.0)
    if not (1.0 < p < limit):
        raise ExponentRangeError(f"p must be < 2d/(d+1) = {limit:g} and > 1")
    if not (p <= q):
        raise ExponentRangeError("q must satisfy p <= q <= inf")


@dataclass(frozen=True)
class ProbeConfig:
    """Resolved configuration of a probe run; seeds make reports reproducible."""

    d: float
    exponents: tuple  # ((p, q), ...)
    lambdas: tuple = (0.5, 0.75, 1.0, 1.5)
    seed: int = 7
    n_profiles: int = 6
    n_t: int = 64
    radius: float = 200.0
    grid_points: int = 4096

    def __post_init__(self):
        for p, q in self.exponents:
            _validate_pair(self.d, p, q)

    def grid(self):
        return default_radial_grid(self.radius, self.grid_points)

    def as_dict(self):
        return {"d": self.d, "exponents": [list(pq) for pq in self.exponents],
                "lambdas": list(self.lambdas), "seed": self.seed,
                "n_profiles": self.n_profiles, "n_t": self.n_t,
                "radius": self.radius, "grid_points": self.grid_points}


# ---------------------------------------------------------------------------
# test suites


def _band_window(xi):
    u = (np.asarray(xi, dtype=float) - 0.5) / 1.5
    return smooth_step((u - 0.03) / 0.07) * smooth_step((0.97 - u) / 0.07)


def _band_source_grid():
    return np.linspace(0.5005, 1.9995, BAND_SOURCE_POINTS)


def band_limited_profile(d, grid, seed, *, modes=5, plan=None):
    """f = H_d g for random smooth g supported in [1/2, 2]."""
    rng = np.random.default_rng(seed)
    src = _band_source_grid()
    u = (src - 0.5) / 1.5
    g = np.zeros_like(src)
    for k in range(1, modes + 1):
        a, b = rng.normal(size=2)
        g += a * np.cos(2 * np.pi * k * u) + b * np.sin(2 * np.pi * k * u)
    g *= _band_window(src)
    source = RadialProfile(src, g, float(d))
    if plan is None:
        plan = HankelPlan(float(d), src, grid)
    return RadialProfile(grid, hankel_transform(source, plan=plan), float(d))


def focusing_profile(d, grid, focus_radius):
    """b_d(r) times a smooth plateau cut at ``focus_radius``; a heuristic
    near-extremizer for the maximal operator (recorded, never assumed)."""
    cut = smooth_step((focus_radius - grid) / (0.2 * focus_radius))
    return RadialProfile(grid, kernel_b(d, grid) * cut, float(d))


def profile_suite(d, grid, seed, n_profiles):
    """Band-limited randoms plus two focusing profiles."""
    suite = []
    plan = HankelPlan(float(d), _band_source_grid(), grid)
    n_random = max(1, n_profiles - 2)
    for j in range(n_random):
        suite.append(band_limited_profile(d, grid, [seed, j], plan=plan))
    R = float(grid[-1])
    if n_profiles >= 2:
        suite.append(focusing_profile(d, grid, 0.25 * R))
    if n_profiles >= 3:
        suite.append(focusing_profile(d, grid, 0.5 * R))
    return suite[:n_profiles]


def family_suite(d, grid, t_grid, n_families, seed, *, rank=3, modes=4,
                 plan=None):
    """Random band-limited time families with analytic t-dependence.

    Each family is sum_i c_i(t) f_i(r) with quadratic c_i and band-limited
    f_i, so regenerating on a finer t-grid samples the same family.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if plan is None:
        plan = HankelPlan(float(d), _band_source_grid(), grid)
    fams = []
    for j in range(n_families):
        rng = np.random.default_rng([seed, j])
        rows = np.zeros((len(t_grid), len(grid)))
        for i in range(rank):
            f_i = band_limited_profile(d, grid, rng.integers(2**32), modes=modes,
                                       plan=plan)
            alpha, beta, gamma = rng.normal(size=3)
            c = alpha + beta * (t_grid - 1.0) + gamma * (t_grid - 1.0) ** 2
            rows += c[:, None] * f_i.values[None, :]
        fams.append(TimeFamily(t_grid, grid, rows, float(d)))
    return fams


# ---------------------------------------------------------------------------
# probes


def compute_A(m, d, p, q, *, line_kernel=None, with_flag=False):
    """A(p, q): the weighted Lorentz norm of the line kernel of m.

    The weight is (1+|x|)^-(d-1)/2 and the measure has density (1+|x|)^(d-1);
    the kernel itself does not depend on d.
    """
    if line_kernel is None:
        line_kernel = one_dim_kernel(m)
    x = line_kernel.grid
    weighted = (1.0 + np.abs(x)) ** (-(d - 1.0) / 2.0) * line_kernel.values
    sf = SampledFunction(x, weighted,
                         line_measure(float(d), line_kernel.measure.truncation_radius))
    value = lorentz_norm(sf, LorentzExponents(float(p), float(q)))
    if with_flag:
        return value, sf.tail_flag
    return value


def chain_check(m, d, p, q, suite, *, t_grid=None, engine=None,
                line_kernel=None, kernel_grid=None):
    """A(p,q), the kernel Lorentz norm, and suite lower bounds for T and M.

    The T and M columns are lower bounds (max over the suite of testing
    ratios); the report also records exact pointwise domination of the fixed
    scale by the maximal operator for every member.
    """
    d = float(d)
    _validate_pair(d, p, q)
    e = LorentzExponents(float(p), float(q))
    if t_grid is None:
        t_grid = geometric_t_grid()
    a_value, a_flag = compute_A(m, d, p, q, line_kernel=line_kernel,
                                with_flag=True)
    radial = kernel_of(m, d, grid=kernel_grid)
    hankel_norm = lorentz_norm(radial.profile.to_sampled(), e)

    if engine is None and suite:
        engine = SpectralEngine(m, d, suite[0].grid)
    p_prime = e.p_prime
    q_prime = e.q_prime
    rows = []
    for f in suite:
        spline = engine.forward_spline(f.values)
        single = engine.scale_row(spline, 1.0)
        fs = f.to_sampled()
        t_ratio = (lorentz_norm(f.with_values(single).to_sampled(), e)
                   / weighted_p_norm(fs, p))
        maximal = np.abs(single)
        for t in t_grid:
            maximal = np.maximum(maximal, np.abs(engine.scale_row(spline, float(t))))
        m_num = weighted_p_norm(f.with_values(maximal).to_sampled(), p_prime)
        m_den = lorentz_norm(fs, LorentzExponents(p_prime, q_prime))
        single_pprime = weighted_p_norm(f.with_values(np.abs(single)).to_sampled(),
                                        p_prime)
        rows.append({
            "T_ratio": t_ratio,
            "M_ratio": m_num / m_den if m_den > 0 else 0.0,
            "dominates": bool(m_num >= single_pprime),
        })
    return {
        "multiplier": m.label, "d": d, "p": float(p), "q": float(q),
        "A": a_value, "A_tail_flag": bool(a_flag),
        "hankel_norm": hankel_norm,
        "T_lower": max((r["T_ratio"] for r in rows), default=0.0),
        "M_lower": max((r["M_ratio"] for r in rows), default=0.0),
        "domination_exact": all(r["dominates"] for r in rows),
        "per_profile": rows,
        "columns": {"A": "exact quadrature", "hankel_norm": "exact quadrature",
                    "T_lower": "lower bound", "M_lower": "lower bound"},
    }


def equivalence_scan(lambdas, d, p, q, suite, *, t_grid=None):
    """M_lower / kernel-norm ratios across an order grid of truncated
    Bochner-Riesz multipliers, with the co-movement rank correlation."""
    d = float(d)
    _validate_pair(d, p, q)
    e = LorentzExponents(float(p), float(q))
    if t_grid is None:
        t_grid = geometric_t_grid()
    p_prime, q_prime = e.p_prime, e.q_prime
    dual = LorentzExponents(p_prime, q_prime)
    rows = []
    for lam in lambdas:
        m = bochner_riesz(float(lam))
        radial = kernel_of(m, d)
        h_norm = lorentz_norm(radial.profile.to_sampled(), e)
        engine = SpectralEngine(m, d, suite[0].grid)
        m_lower = 0.0
        for f in suite:
            mf = maximal_operator(m, f, d, t_grid, engine=engine)
            den = lorentz_norm(f.to_sampled(), dual)
            if den > 0:
                m_lower = max(m_lower,
                              weighted_p_norm(mf.to_sampled(), p_prime) / den)
        vacuous = m_lower == 0.0
        rows.append({"lambda": float(lam), "hankel_norm": h_norm,
                     "M_lower": m_lower,
                     "ratio": 0.0 if vacuous else m_lower / h_norm,
                     "vacuous": vacuous})
    live = [r for r in rows if not r["vacuous"]]
    ratios = [r["ratio"] for r in live]
    band = max(ratios) / min(ratios) if ratios else math.inf
    if len(live) >= 3:
        corr = float(spearmanr([r["M_lower"] for r in live],
                               [r["hankel_norm"] for r in live]).statistic)
    else:
        corr = math.nan
    return {"d": d, "p": float(p), "q": float(q), "rows": rows,
            "band_width": band, "rank_correlation": corr,
            "columns": {"hankel_norm": "exact quadrature",
                        "M_lower": "lower bound"}}


def critical_exponent_scan(lam, d, *, n_doublings=4, base_radius=100.0,
                           grid_points=16384):
    """Ball-restricted kernel norms at the critical exponent.

    At p_c = 2d/(d+1+2*lambda) the weak (q = inf) ball norms stabilize under
    radius doubling while the q = p_c norms keep growing; the report carries
    both growth-factor sequences.
    """
    lam, d = float(lam), float(d)
    p_c = 2.0 * d / (d + 1.0 + 2.0 * lam)
    limit = 2.0 * d / (d + 1.0)
    if not (1.0 <= p_c < limit):
        raise ExponentRangeError(
            f"critical exponent p_c = {p_c:g} outside [1, 2d/(d+1) = {limit:g})")
    R_max = base_radius * 2.0**n_doublings
    grid = default_radial_grid(R_max, grid_points)
    m = bochner_riesz(lam)
    values = band_transform(m, d, grid)
    rows = []
    for k in range(n_doublings + 1):
        R = base_radius * 2.0**k
        sel = grid <= R
        sf = SampledFunction(grid[sel], values[sel], half_line_measure(d, R))
        rows.append({
            "R": R,
            "weak": lorentz_norm(sf, LorentzExponents(p_c, math.inf)),
            "strong": lorentz_norm(sf, LorentzExponents(p_c, p_c)),
        })
    weak_growth = [rows[k + 1]["weak"] / rows[k]["weak"]
                   for k in range(n_doublings)]
    strong_growth = [rows[k + 1]["strong"] / rows[k]["strong"]
                     for k in range(n_doublings)]
    return {"lambda": lam, "d": d, "p_c": p_c, "rows": rows,
            "weak_growth": weak_growth, "strong_growth": strong_growth}


def dual_inequality_check(m, d, p, q, families, *, refined_families=None,
                          a_value=None):
    """Ratios of the time-averaged operator norm against A(p,q) times the
    L^p norm of the pointwise t-average."""
    d = float(d)
    _validate_pair(d, p, q)
    e = LorentzExponents(float(p), float(q))
    if a_value is None:
        a_value = compute_A(m, d, p, q)

    engines = {}

    def suite_ratios(fams):
        out = []
        for fam in fams:
            key = hash(fam.radial_grid.tobytes())
            if key not in engines:
                engines[key] = SpectralEngine(m, d, fam.radial_grid)
            avg = averaged_dual_operator(m, fam, d, engine=engines[key])
            lhs = lorentz_norm(avg.to_sampled(), e)
            measure = half_line_measure(d, float(fam.radial_grid[-1]))
            rhs = a_value * weighted_p_norm(
                SampledFunction(fam.radial_grid, fam.b_profile(), measure), p)
            out.append(lhs / rhs if rhs > 0 else 0.0)
        return out

    ratios = suite_ratios(families)
    report = {"multiplier": m.label, "d": d, "p": float(p), "q": float(q),
              "A": a_value, "ratios": ratios,
              "max_ratio": max(ratios, default=0.0)}
    if refined_families is not None:
        fine = suite_ratios(refined_families)
        fine_max = max(fine, default=0.0)
        report["max_ratio_refined"] = fine_max
        report["delta"] = (abs(fine_max - report["max_ratio"])
                           / max(report["max_ratio"], 1e-12))
    return report
