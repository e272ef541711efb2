"""Normalized weight functions on [0, 1] for windowed orbit averages.

Three kinds are supported:

* ``bump``    -- C * exp(-w / (s (1 - s))) on (0, 1), zero outside; all
                 derivatives vanish at the endpoints, so averages weighted
                 with it can converge faster than any power of the window
                 length on sufficiently regular orbits.
* ``sin2``    -- 2 sin^2(pi s); first derivative vanishes at the endpoints.
* ``uniform`` -- 1 on [0, 1]; recovers the unweighted time average.

Every constructed weight integrates to one.  The bump normalization constant
is computed at construction time by panel-doubling Gauss-Legendre quadrature
(relative target 1e-14), so arbitrary widths w > 0 are supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("bump", "sin2", "uniform")

DEFAULT_WIDTH = 1.0


class WidthTooLarge(ValueError):
    """Bump width so large the unnormalized integral underflows to zero."""


def _bump_raw(s, w):
    if s <= 0.0 or s >= 1.0:
        return 0.0
    return math.exp(-w / (s * (1.0 - s)))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _gauss_panels(f, panels):
    """Composite 24-point Gauss-Legendre integral of f over [0, 1]."""
    total = 0.0
    width = 1.0 / panels
    for i in range(panels):
        mid = (i + 0.5) * width
        half = 0.5 * width
        total += half * sum(wk * f(mid + half * xk)
                            for xk, wk in zip(_GL_NODES, _GL_WEIGHTS))
    return total


def _integrate_unit(f, rel_tol=1e-14):
    """Integral of f over [0, 1] by panel doubling until stable to rel_tol."""
    prev = _gauss_panels(f, 1)
    for panels in (2, 4, 8, 16, 32, 64, 128):
        cur = _gauss_panels(f, panels)
        if cur == 0.0:
            return 0.0
        if abs(cur - prev) <= rel_tol * abs(cur):
            return cur
        prev = cur
    return prev


@dataclass(frozen=True)
class WeightFunction:
    kind: str
    width: float
    norm_constant: float

    def eval(self, s):
        """Weight value at s; exactly zero outside (0, 1) for the bump kind."""
        if self.kind == "bump":
            return self.norm_constant * _bump_raw(s, self.width)
        if self.kind == "sin2":
            if s < 0.0 or s > 1.0:
                return 0.0
            return 2.0 * math.sin(math.pi * s) ** 2
        if s < 0.0 or s > 1.0:
            return 0.0
        return 1.0

    __call__ = eval

    def smoothness_class(self):
        """Order of vanishing endpoint derivatives: inf, 1, or 0."""
        if self.kind == "bump":
            return math.inf
        if self.kind == "sin2":
            return 1
        return 0


def normalize(kind, width=DEFAULT_WIDTH):
    """Construct a WeightFunction whose integral over [0, 1] is one."""
    if kind not in KINDS:
        raise ValueError(f"unknown weight kind {kind!r}; expected one of {KINDS}")
    if kind == "bump":
        if width <= 0.0:
            raise ValueError("bump width must be positive")
        raw = _integrate_unit(lambda s: _bump_raw(s, width))
        if raw == 0.0:
            raise WidthTooLarge(f"width {width} underflows the bump integral")
        return WeightFunction("bump", float(width), 1.0 / raw)
    if kind == "sin2":
        # integral of sin^2(pi s) over [0, 1] is exactly 1/2
        return WeightFunction("sin2", 0.0, 2.0)
    return WeightFunction("uniform", 0.0, 1.0)


def bump(width=DEFAULT_WIDTH):
    return normalize("bump", width)


def sin2():
    return normalize("sin2")


def uniform():
    return normalize("uniform")
