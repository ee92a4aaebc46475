"""Multipliers on the band [1/2, 2], their radial and line kernels, dilation,
and decay-exponent measurement.

The cutoff chi is a product of two smooth steps S((xi - 1/2)/w_lo) and
S((2 - xi)/w_hi), equal to 1 on [1/2 + w_lo, 2 - w_hi].  S is built from the
compactly supported bump family phi(u) = exp(-sigma / u**p); the default
modulus (p = 0.6, sigma = 2.0) is chosen so the cutoff's spectral tail stays
below the r**(-(d+1)/2-lambda) endpoint signal across the decay-fit window
[10, 200] (the literal exp(-1/u) profile does not clear it; every report
records the cutoff parameters).

Kernels are computed by Gauss panels on the multiplier's support with graded
stacks closing on each point of limited smoothness, so the same machinery is
accurate both for smooth bumps and for (1 - xi**2)_+**lambda endpoints.
"""

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .bessel import kernel_b
from .errors import DomainError, InsufficientDataError
from .hankel import RadialProfile, default_radial_grid
from .lorentz import SampledFunction, line_measure
from .quadrature import band_rule

BAND = (0.5, 2.0)
STEP_POWER = 0.6
STEP_STEEPNESS = 2.0
DEFAULT_LO_WIDTH = 0.1
DEFAULT_HI_WIDTH = 0.5
DEFAULT_LINE_RADIUS = 442.0
DEFAULT_LINE_SPACING = 0.054
GRADE_FLOOR = 1e-10


def smooth_step(u, power=STEP_POWER, steepness=STEP_STEEPNESS):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, strictly rising between."""
    u = np.asarray(u, dtype=float)
    out = np.zeros(u.shape)
    hi = u >= 1.0
    mid = (u > 0.0) & ~hi
    um = np.where(mid, u, 0.5)
    with np.errstate(over="ignore"):
        a = np.exp(-steepness / um**power)
        b = np.exp(-steepness / (1.0 - um) ** power)
    out = np.where(mid, a / (a + b), out)
    out = np.where(hi, 1.0, out)
    return out if u.ndim else float(out)


def smooth_cutoff(xi, lo=BAND[0], hi=BAND[1], lo_width=DEFAULT_LO_WIDTH,
                  hi_width=DEFAULT_HI_WIDTH):
    """The cutoff chi: supported in [lo, hi], identically 1 on
    [lo + lo_width, hi - hi_width]."""
    xi = np.asarray(xi, dtype=float)
    return smooth_step((xi - lo) / lo_width) * smooth_step((hi - xi) / hi_width)


@dataclass(frozen=True)
class Multiplier:
    """A bounded multiplier with an explicit support certificate.

    ``corners`` lists interior points of limited smoothness; kernel
    quadratures grade their panels into these points.  Evaluation outside the
    support certificate is clamped to zero.
    """

    evaluator: callable = field(compare=False)
    support: tuple
    sup_bound: float
    label: str
    corners: tuple = ()

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        lo, hi = self.support
        inside = (xi > lo) & (xi < hi)
        out = np.where(inside, self.evaluator(np.where(inside, xi, (lo + hi) / 2)), 0.0)
        return out if xi.ndim else float(out)


def dilate_multiplier(m, t):
    """The dilation xi -> m(xi / t) for t in [1, 2]."""
    t = float(t)
    if not (1.0 <= t <= 2.0):
        raise DomainError("dilation scale t must lie in [1, 2]")
    return Multiplier(
        evaluator=lambda xi: m(np.asarray(xi, dtype=float) / t),
        support=(m.support[0] * t, m.support[1] * t),
        sup_bound=m.sup_bound,
        label=f"{m.label}|t={t:g}",
        corners=tuple(c * t for c in m.corners),
    )


@dataclass(frozen=True)
class BochnerRieszParams:
    """Order lambda > 0 plus the cutoff profile of chi."""

    lam: float
    lo_width: float = DEFAULT_LO_WIDTH
    hi_width: float = DEFAULT_HI_WIDTH
    step_power: float = STEP_POWER
    step_steepness: float = STEP_STEEPNESS

    def __post_init__(self):
        if not (self.lam > 0):
            raise DomainError("lambda must be positive (lambda = 0 excluded)")

    def cutoff(self, xi):
        xi = np.asarray(xi, dtype=float)
        lo = smooth_step((xi - BAND[0]) / self.lo_width, self.step_power,
                         self.step_steepness)
        hi = smooth_step((BAND[1] - xi) / self.hi_width, self.step_power,
                         self.step_steepness)
        return lo * hi

    def as_dict(self):
        return {"lambda": self.lam, "lo_width": self.lo_width,
                "hi_width": self.hi_width, "step_power": self.step_power,
                "step_steepness": self.step_steepness}


def bochner_riesz(params):
    """The truncated multiplier (1 - xi**2)_+**lambda * chi(xi)."""
    if not isinstance(params, BochnerRieszParams):
        params = BochnerRieszParams(float(params))

    def evaluate(xi):
        xi = np.asarray(xi, dtype=float)
        return np.clip(1.0 - xi * xi, 0.0, None) ** params.lam * params.cutoff(xi)

    return Multiplier(
        evaluator=evaluate,
        support=(0.5, 1.0),
        sup_bound=1.0,
        label=f"bochner_riesz(lam={params.lam:g})",
        corners=(1.0,),
    )


def smooth_bump(lo_width=DEFAULT_LO_WIDTH, hi_width=DEFAULT_HI_WIDTH,
                label="bump"):
    """The cutoff chi itself as a multiplier: 1 on [0.5+lo_width, 2-hi_width]."""
    def evaluate(xi):
        return smooth_cutoff(xi, lo_width=lo_width, hi_width=hi_width)

    return Multiplier(evaluator=evaluate, support=BAND, sup_bound=1.0,
                      label=label)


def slab_multiplier(lo=0.5, hi=1.0):
    """Sharp indicator of [lo, hi] (a test multiplier; kernel in closed form)."""
    def evaluate(xi):
        xi = np.asarray(xi, dtype=float)
        return ((xi >= lo) & (xi <= hi)).astype(float)

    return Multiplier(evaluator=evaluate, support=(lo, hi), sup_bound=1.0,
                      label=f"slab[{lo:g},{hi:g}]")


def multiplier_from_config(cfg):
    """Build a multiplier from a definition record.

    Schema: {"label": str, "kind": "bochner_riesz" | "bump" | "sampled",
    "lambda"?: float, "samples"?: [[xi, value], ...]}.  Sampled multipliers
    are linearly interpolated and clamped to the band [1/2, 2].
    """
    kind = cfg.get("kind")
    label = cfg.get("label")
    if kind == "bochner_riesz":
        if "lambda" not in cfg:
            raise DomainError("bochner_riesz multiplier requires 'lambda'")
        m = bochner_riesz(BochnerRieszParams(
            float(cfg["lambda"]),
            lo_width=float(cfg.get("lo_width", DEFAULT_LO_WIDTH)),
            hi_width=float(cfg.get("hi_width", DEFAULT_HI_WIDTH)),
        ))
        return replace(m, label=label) if label else m
    if kind == "bump":
        m = smooth_bump(lo_width=float(cfg.get("lo_width", DEFAULT_LO_WIDTH)),
                        hi_width=float(cfg.get("hi_width", DEFAULT_HI_WIDTH)))
        return replace(m, label=label) if label else m
    if kind == "sampled":
        samples = cfg.get("samples")
        if not samples:
            raise DomainError("sampled multiplier requires 'samples'")
        pts = np.asarray(samples, dtype=float)
        xs, vs = pts[:, 0], pts[:, 1]
        order = np.argsort(xs)
        xs, vs = xs[order], vs[order]
        if np.any(np.diff(xs) <= 0):
            raise DomainError("sample abscissae must be distinct")
        lo = max(BAND[0], float(xs[0]))
        hi = min(BAND[1], float(xs[-1]))
        if hi <= lo:
            raise DomainError("samples lie outside the band [1/2, 2]")

        def evaluate(xi):
            return np.interp(np.asarray(xi, dtype=float), xs, vs, left=0.0, right=0.0)

        corners = tuple(float(x) for x in xs if lo < x < hi)
        return Multiplier(evaluator=evaluate, support=(lo, hi),
                          sup_bound=float(np.max(np.abs(vs))),
                          label=label or "sampled", corners=corners)
    raise DomainError(f"unknown multiplier kind {kind!r}")


def load_multiplier(path):
    with open(path) as fh:
        return multiplier_from_config(json.load(fh))


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class RadialKernel:
    """Samples of the radial kernel H_d m on a radial grid."""

    profile: RadialProfile
    label: str

    @property
    def grid(self):
        return self.profile.grid

    @property
    def values(self):
        return self.profile.values

    @property
    def d(self):
        return self.profile.d


def band_quadrature(m, max_len, *, order=6, density_exponent=0.0):
    """Panel nodes/weights over a multiplier's support, graded at corners."""
    lo, hi = m.support
    return band_rule(lo, hi, max_len, corners=m.corners, order=order,
                     density_exponent=density_exponent)


def band_transform(m, d, targets, *, order=6, chunk=1024):
    """H_d m at the targets, straight from the analytic evaluator."""
    targets = np.asarray(targets, dtype=float)
    r_max = float(np.max(targets, initial=1.0))
    max_len = np.pi / (4.0 * max(r_max, 1.0))
    nodes, weights = band_quadrature(m, max_len, order=order,
                                     density_exponent=d - 1.0)
    u = m(nodes) * weights
    out = np.empty_like(targets)
    for i in range(0, len(targets), chunk):
        block = targets[i:i + chunk]
        out[i:i + chunk] = kernel_b(d, np.multiply.outer(block, nodes)) @ u
    return out


def kernel_of(m, d, *, grid=None, order=6):
    """The radial kernel of a multiplier, sampled on the default radial grid."""
    if grid is None:
        grid = default_radial_grid()
    values = band_transform(m, float(d), grid, order=order)
    return RadialKernel(RadialProfile(grid, values, float(d)), label=m.label)


def symmetric_grid(radius=DEFAULT_LINE_RADIUS, spacing=DEFAULT_LINE_SPACING):
    """Uniform symmetric grid on [-radius, radius] including 0."""
    n = int(math.ceil(radius / spacing))
    pos = radius * np.arange(1, n + 1) / n
    return np.concatenate([-pos[::-1], [0.0], pos])


def one_dim_kernel(m, *, grid=None, order=6):
    """The even line kernel kappa(x) = (1/pi) int_0^inf m(xi) cos(x xi) dxi,
    sampled on a symmetric grid and carried with Lebesgue measure on the line."""
    if grid is None:
        grid = symmetric_grid()
    x_abs = np.abs(grid)
    x_max = float(np.max(x_abs))
    max_len = np.pi / (4.0 * max(x_max, 1.0))
    nodes, weights = band_quadrature(m, max_len, order=order)
    u = m(nodes) * weights / np.pi
    half = np.unique(x_abs)
    vals_half = np.empty_like(half)
    for i in range(0, len(half), 2048):
        block = half[i:i + 2048]
        vals_half[i:i + 2048] = np.cos(np.multiply.outer(block, nodes)) @ u
    values = vals_half[np.searchsorted(half, x_abs)]
    radius = x_max * (1.0 + 1e-12)
    return SampledFunction(grid, values, line_measure(1.0, radius))


def dilate_kernel(kernel, t):
    """The dilated kernel: t**d kappa(t r) for radial kernels, t kappa(t x)
    for line kernels, resampled on the stored grid (zero beyond its span)."""
    t = float(t)
    if not (1.0 <= t <= 2.0):
        raise DomainError("dilation scale t must lie in [1, 2]")
    if isinstance(kernel, RadialKernel):
        prof = kernel.profile
        stretched = prof.interpolant()(np.minimum(t * prof.grid, prof.grid[-1]))
        stretched = np.where(t * prof.grid <= prof.grid[-1], stretched, 0.0)
        values = t**prof.d * stretched
        return RadialKernel(prof.with_values(values),
                            label=f"{kernel.label}|t={t:g}")
    if isinstance(kernel, SampledFunction):
        values = t * np.interp(t * kernel.grid, kernel.grid, kernel.values,
                               left=0.0, right=0.0)
        return SampledFunction(kernel.grid, values, kernel.measure)
    raise DomainError("dilate_kernel expects a RadialKernel or a line kernel")


def _kernel_samples(kernel):
    if isinstance(kernel, RadialKernel):
        return kernel.grid, kernel.values
    if isinstance(kernel, RadialProfile):
        return kernel.grid, kernel.values
    if isinstance(kernel, SampledFunction):
        return kernel.grid, kernel.values
    raise DomainError("unsupported kernel object")


def decay_exponent_fit(kernel, window):
    """Least-squares decay exponent of the envelope of |kappa| over a window.

    Envelope points are the samples that strictly exceed every later sample
    in the window (crest bands of oscillating kernels; every sample of a
    monotone power law).  Returns the negated log-log slope.
    """
    r0, r1 = float(window[0]), float(window[1])
    if not (r1 > 2.0 * r0 >= 2.0):
        raise DomainError("window must satisfy r1 > 2*r0 >= 2")
    grid, values = _kernel_samples(kernel)
    sel = (grid >= r0) & (grid <= r1)
    r = grid[sel]
    a = np.abs(np.asarray(values)[sel])
    if len(r) == 0 or np.all(a == 0.0):
        raise InsufficientDataError("kernel vanishes on the window")
    later_max = np.concatenate([np.maximum.accumulate(a[::-1])[::-1][1:], [0.0]])
    keep = a > later_max
    if int(np.sum(keep)) < 5:
        raise InsufficientDataError(
            f"only {int(np.sum(keep))} envelope points in window [{r0:g}, {r1:g}]")
    slope = np.polyfit(np.log(r[keep]), np.log(a[keep]), 1)[0]
    return float(-slope)


def multiplier_l1(m, *, order=6, max_len=1e-3):
    """int |m| over the band, by the same graded panels as the transforms."""
    nodes, weights = band_quadrature(m, max_len, order=order)
    return float(np.sum(np.abs(m(nodes)) * weights))


def spectrum_spline(m, d, profile, *, points=2048, pad=0.02,
                    t_range=(1.0, 2.0), plan=None):
    """Cubic model of H_d f over the band swept by m(./t), t in ``t_range``.

    Returns (spline, plan); the plan is reusable across profiles on the grid.
    """
    from .hankel import HankelPlan, hankel_transform

    lo = m.support[0] * t_range[0] * (1.0 - pad)
    hi = m.support[1] * t_range[1] * (1.0 + pad)
    grid = np.linspace(lo, hi, points)
    if plan is None:
        plan = HankelPlan(profile.d, profile.grid, grid)
    samples = hankel_transform(profile, plan=plan)
    return CubicSpline(grid, samples), plan
