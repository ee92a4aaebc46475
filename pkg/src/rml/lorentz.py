"""Weighted measures, distribution functions, and Lorentz quasi-norms.

Two measures parametrize every norm in the package:

* ``half_line_power``: density r**(d-1) on (0, R]
* ``line_shifted_power``: density (1 + |x|)**(d-1) on [-R, R]

A sampled function is reduced to (value, cell-measure) pairs over the Voronoi
cells of its grid; the decreasing rearrangement is then a step function and
the quasi-norm

    ||f||_{p,q} = ( int_0^inf [t^{1/p} f*(t)]^q dt/t )^{1/q}

is integrated exactly over it (q = infinity takes the sup of t^{1/p} times the
step heights instead).  The convention is the un-normalized one above; all
equivalence constants reported elsewhere absorb this choice.

Level sets for the distribution function use the piecewise-linear interpolant
of |f| between samples, with interval measures evaluated in closed form.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ExponentRangeError

HALF_LINE = "half_line_power"
LINE = "line_shifted_power"

TAIL_FLAG_RTOL = 1e-9


@dataclass(frozen=True)
class WeightedMeasure:
    """A power-weighted measure on the half-line or the (shifted-weight) line."""

    kind: str
    d: float
    truncation_radius: float

    def __post_init__(self):
        if self.kind not in (HALF_LINE, LINE):
            raise DomainError(f"unknown measure kind {self.kind!r}")
        if not math.isfinite(self.d) or self.d < 1.0:
            raise DomainError("measure exponent d must be >= 1")
        if not (self.truncation_radius > 0):
            raise DomainError("truncation radius must be positive")

    @property
    def domain(self):
        R = self.truncation_radius
        return (0.0, R) if self.kind == HALF_LINE else (-R, R)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == HALF_LINE:
            return x ** (self.d - 1.0)
        return (1.0 + np.abs(x)) ** (self.d - 1.0)

    def _antiderivative(self, x):
        d = self.d
        if self.kind == HALF_LINE:
            return np.maximum(x, 0.0) ** d / d
        return np.sign(x) * ((1.0 + np.abs(x)) ** d - 1.0) / d

    def interval_measure(self, a, b):
        """Exact measure of [a, b] clipped to the domain (vectorized)."""
        lo, hi = self.domain
        a = np.clip(np.asarray(a, dtype=float), lo, hi)
        b = np.clip(np.asarray(b, dtype=float), lo, hi)
        return np.maximum(self._antiderivative(b) - self._antiderivative(a), 0.0)


def half_line_measure(d, R):
    return WeightedMeasure(HALF_LINE, float(d), float(R))


def line_measure(d, R):
    return WeightedMeasure(LINE, float(d), float(R))


@dataclass(frozen=True)
class LorentzExponents:
    """An exponent pair (p, q); q = math.inf selects the weak quasi-norm."""

    p: float
    q: float

    def __post_init__(self):
        if not (1.0 <= self.p < math.inf):
            raise ExponentRangeError("primary exponent p must lie in [1, oo)")
        if not (1.0 <= self.q):
            raise ExponentRangeError("secondary exponent q must lie in [1, oo]")

    @property
    def p_prime(self):
        return math.inf if self.p == 1.0 else self.p / (self.p - 1.0)

    @property
    def q_prime(self):
        if self.q == math.inf:
            return 1.0
        return math.inf if self.q == 1.0 else self.q / (self.q - 1.0)

    def in_range(self, d):
        """1 < p < 2d/(d+1), the primary admissible range."""
        return 1.0 < self.p < 2.0 * d / (d + 1.0)

    def in_dual_range(self, d):
        """2d/(d-1) < p' < infinity; agrees with :meth:`in_range` by duality."""
        return 2.0 * d / (d - 1.0) < self.p_prime < math.inf


def exponents(p, q):
    return LorentzExponents(float(p), float(q))


@dataclass(frozen=True)
class SampledFunction:
    """Samples on a strictly increasing grid inside a measure's domain.

    The function is zero outside its grid span; cell weights partition the
    span (Voronoi cells of the samples, clipped to the domain).
    """

    grid: np.ndarray
    values: np.ndarray
    measure: WeightedMeasure
    _cells: tuple = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise DomainError("grid and values must be 1-d of equal length")
        if len(grid) < 2:
            raise DomainError("need at least two samples")
        if not np.all(np.diff(grid) > 0):
            raise DomainError("grid must be strictly increasing")
        lo, hi = self.measure.domain
        if grid[0] < lo - 1e-12 or grid[-1] > hi * (1 + 1e-12) + 1e-12:
            raise DomainError("grid must lie inside the measure's domain")

    def cell_edges(self):
        lo, hi = self.measure.domain
        g = self.grid
        inner = (g[:-1] + g[1:]) / 2.0
        first = max(lo, g[0] - (g[1] - g[0]) / 2.0)
        last = min(hi, g[-1] + (g[-1] - g[-2]) / 2.0)
        return np.concatenate([[first], inner, [last]])

    def cell_weights(self):
        edges = self.cell_edges()
        return self.measure.interval_measure(edges[:-1], edges[1:])

    @property
    def tail_flag(self):
        """True when |f| at the truncation boundary is not negligible."""
        peak = float(np.max(np.abs(self.values)))
        if peak == 0.0:
            return False
        edge = abs(float(self.values[-1]))
        if self.measure.kind == LINE:
            edge = max(edge, abs(float(self.values[0])))
        return edge > TAIL_FLAG_RTOL * peak


def distribution_function(f, s):
    """mu{ |f| > s } via the piecewise-linear interpolant of |f|."""
    s = float(s)
    if not math.isfinite(s) or s <= 0:
        raise DomainError("level s must be positive and finite")
    a = np.abs(f.values)
    g = f.grid
    a0, a1 = a[:-1], a[1:]
    g0, g1 = g[:-1], g[1:]
    above0 = a0 > s
    above1 = a1 > s
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(a1 != a0, (s - a0) / (a1 - a0), 0.0)
    cross = g0 + np.clip(frac, 0.0, 1.0) * (g1 - g0)
    lo = np.where(above0, g0, cross)
    hi = np.where(above1, g1, cross)
    any_above = above0 | above1
    lo = np.where(any_above, lo, g0)
    hi = np.where(any_above, hi, g0)  # empty interval when the cell is below s
    return float(np.sum(f.measure.interval_measure(lo, hi)))


def _sorted_layers(f):
    v = np.abs(f.values)
    w = f.cell_weights()
    order = np.argsort(-v, kind="stable")
    return v[order], w[order]


def lorentz_norm(f, e):
    """The L^{p,q} quasi-norm of a sampled function under its measure."""
    if not isinstance(e, LorentzExponents):
        e = LorentzExponents(*e)
    v, w = _sorted_layers(f)
    T = np.cumsum(w)
    if e.q == math.inf:
        return float(np.max(v * T ** (1.0 / e.p), initial=0.0))
    ratio = e.q / e.p
    T_prev = T - w
    blocks = v**e.q * (T**ratio - T_prev**ratio) / ratio
    return float(np.sum(blocks)) ** (1.0 / e.q)


def weighted_p_norm(f, p):
    """Direct weighted p-norm over the same cells, bypassing rearrangement."""
    p = float(p)
    if p < 1.0:
        raise ExponentRangeError("p must be >= 1")
    w = f.cell_weights()
    return float(np.sum(np.abs(f.values) ** p * w)) ** (1.0 / p)


def weighted_inner_product(f, g):
    """<f, g> over the shared grid cells of two sampled functions."""
    if not np.array_equal(f.grid, g.grid):
        raise DomainError("inner product requires a shared grid")
    return float(np.sum(f.values * g.values * f.cell_weights()))


def power_weight_norm_scan(d, p_prime, radii, *, points_per_decade=1024, r_min=1e-3):
    """L^{p',1} norms of (1+r)^{-(d-1)/2} on (0, R] for each R in ``radii``.

    The grids are nested (one master geometric grid restricted per radius) so
    successive differences isolate tail behavior: Cauchy iff p' > 2d/(d-1).
    """
    d = float(d)
    p_prime = float(p_prime)
    if p_prime <= 1.0:
        raise ExponentRangeError("p' must exceed 1")
    radii = [float(R) for R in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be increasing")
    r_max = radii[-1]
    n = max(64, int(points_per_decade * math.log10(r_max / r_min)))
    master = np.geomspace(r_min, r_max, n)
    e = LorentzExponents(p_prime, 1.0)
    out = []
    for R in radii:
        g = master[master <= R]
        if g[-1] < R:
            g = np.append(g, R)
        f = SampledFunction(g, (1.0 + g) ** (-(d - 1.0) / 2.0), half_line_measure(d, R))
        out.append(lorentz_norm(f, e))
    return out
