"""Panel-based Gauss quadrature helpers for oscillatory band integrals.

Two node layouts are used throughout the package:

* cell rules: a fixed-order Gauss-Legendre rule on every cell of a sampled
  profile's grid, plus a Gauss-Jacobi stub on [0, r_0] that integrates the
  power weight r**(d-1) exactly (no 0/0 at the origin, no lost head mass);
* band panels: a uniform fill of an analytic multiplier's support, with
  geometrically graded stacks of panels closing in on every point of limited
  smoothness, so that endpoint kinks such as (1 - xi**2)_+**lambda do not
  poison the fill order.

Node positions never depend on the transform target, which is what makes the
(kernel values) x (targets) matrices reusable.
"""

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@lru_cache(maxsize=32)
def _gl_rule(order):
    x, w = roots_legendre(order)
    return x, w


def cell_nodes_weights(edges, order):
    """Gauss-Legendre nodes/weights on each cell of ``edges`` (flattened)."""
    xg, wg = _gl_rule(order)
    lo = edges[:-1]
    hi = edges[1:]
    mid = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def power_stub_rule(upper, exponent, order=4):
    """Nodes/weights for int_0^upper r**exponent p(r) dr, exact for p of
    degree < 2*order.  exponent > -1 required (here: d - 1 with d > 1)."""
    y, w = roots_jacobi(order, 0.0, float(exponent))
    nodes = upper * (y + 1.0) / 2.0
    weights = (upper / 2.0) ** (exponent + 1.0) * w
    return nodes, weights


def graded_edges(corner, start_width, lo, hi, *, ratio=0.5, floor=1e-10):
    """Panel edges closing geometrically on ``corner`` from both sides."""
    out = []
    width = start_width
    while width > floor:
        left = corner - width
        right = corner + width
        if lo < left < hi:
            out.append(left)
        if lo < right < hi:
            out.append(right)
        width *= ratio
    if lo < corner < hi:
        out.append(corner)
    return out


def band_edges(lo, hi, max_len, corners=()):
    """Uniform fill of [lo, hi] at panel length <= max_len, refined by graded
    stacks around each listed corner."""
    if hi <= lo:
        raise ValueError("empty band")
    n = int(np.ceil((hi - lo) / max_len))
    edges = set(np.linspace(lo, hi, n + 1).tolist())
    for c in corners:
        edges.update(graded_edges(c, max_len, lo, hi))
    return np.array(sorted(edges))


def band_rule(lo, hi, max_len, *, corners=(), order=6, density_exponent=0.0):
    """Nodes and weights over [lo, hi]; the weights absorb rho**density_exponent."""
    edges = band_edges(lo, hi, max_len, corners)
    nodes, weights = cell_nodes_weights(edges, order)
    if density_exponent != 0.0:
        weights = weights * nodes**density_exponent
    return nodes, weights
