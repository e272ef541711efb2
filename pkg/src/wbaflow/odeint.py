"""Adaptive explicit Runge-Kutta integration with a high-order embedded pair.

The stepper is the classic 13-stage Fehlberg 7(8) pair.  The eighth-order
solution is propagated (local extrapolation) and the difference against the
embedded seventh-order formula drives a proportional step-size controller.
Tolerances are enforced componentwise: |e_i| <= abs_tol + rel_tol * |y_i|.

Vector fields are callables f(t, y) -> ndarray, or objects exposing an
``rhs(t, y)`` method.  All routines are pure functions of their inputs and
therefore deterministic and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class StepUnderflow(RuntimeError):
    """The step size fell below the representable increment of the time."""


class NonFiniteDerivative(RuntimeError):
    """The vector field returned NaN or infinity."""


class MaxStepsExceeded(RuntimeError):
    """The integration used more accepted steps than cfg.max_steps allows."""


@dataclass(frozen=True)
class IntegratorConfig:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-13
    initial_step: float = 1e-2
    max_step: float = math.inf
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.abs_tol <= 0.0 or self.rel_tol <= 0.0:
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.initial_step <= 0.0 or self.max_step <= 0.0:
            raise ValueError("initial_step and max_step must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


# Fehlberg 7(8), 13 stages.  The eighth-order weights _B8 propagate the
# solution; the embedded difference reduces to the four-term expression in
# _step_once.  Row sums reproduce _C exactly (rational arithmetic).
_C = (0.0, 2 / 27, 1 / 9, 1 / 6, 5 / 12, 1 / 2, 5 / 6, 1 / 6, 2 / 3, 1 / 3,
      1.0, 0.0, 1.0)

_A = (
    (),
    (2 / 27,),
    (1 / 36, 1 / 12),
    (1 / 24, 0.0, 1 / 8),
    (5 / 12, 0.0, -25 / 16, 25 / 16),
    (1 / 20, 0.0, 0.0, 1 / 4, 1 / 5),
    (-25 / 108, 0.0, 0.0, 125 / 108, -65 / 27, 125 / 54),
    (31 / 300, 0.0, 0.0, 0.0, 61 / 225, -2 / 9, 13 / 900),
    (2.0, 0.0, 0.0, -53 / 6, 704 / 45, -107 / 9, 67 / 90, 3.0),
    (-91 / 108, 0.0, 0.0, 23 / 108, -976 / 135, 311 / 54, -19 / 60, 17 / 6,
     -1 / 12),
    (2383 / 4100, 0.0, 0.0, -341 / 164, 4496 / 1025, -301 / 82, 2133 / 4100,
     45 / 82, 45 / 164, 18 / 41),
    (3 / 205, 0.0, 0.0, 0.0, 0.0, -6 / 41, -3 / 205, -3 / 41, 3 / 41, 6 / 41,
     0.0),
    (-1777 / 4100, 0.0, 0.0, -341 / 164, 4496 / 1025, -289 / 82, 2193 / 4100,
     51 / 82, 33 / 164, 12 / 41, 0.0, 1.0),
)

_A_ROWS = tuple(np.array(row) for row in _A)

_B8 = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 34 / 105, 9 / 35, 9 / 35, 9 / 280,
                9 / 280, 0.0, 41 / 840, 41 / 840])

_ERR_COEF = 41 / 840

_SAFETY = 0.9
_SHRINK_MIN = 0.2
_GROW_MAX = 5.0
_EXPONENT = -1.0 / 8.0


def _rhs_of(field):
    return field.rhs if hasattr(field, "rhs") else field


def _workspace(n):
    # stage buffer, stage-state scratch, error scale scratch
    return np.empty((13, n)), np.empty(n), np.empty(n)


def _advance(f, t, y, h_try, cfg, work):
    """One accepted step.  Returns (y_new, h_accepted, h_next, err_inf)."""
    k, yi, scale = work
    h = min(h_try, cfg.max_step)
    if h <= 0.0:
        raise ValueError("step size must be positive")
    np.abs(y, out=scale)
    scale *= cfg.rel_tol
    scale += cfg.abs_tol
    # Non-finite stage values surface as a NaN error ratio; the intermediate
    # NaN/overflow arithmetic itself is expected, so numpy stays quiet.
    with np.errstate(over="ignore", invalid="ignore"):
        while True:
            if t + h == t:
                raise StepUnderflow(f"step size {h!r} underflowed at t={t!r}")
            k[0] = f(t, y)
            for i in range(1, 13):
                np.dot(_A_ROWS[i], k[:i], out=yi)
                yi *= h
                yi += y
                k[i] = f(t + _C[i] * h, yi)
            y_new = y + h * (_B8 @ k)
            np.add(k[0], k[10], out=yi)
            yi -= k[11]
            yi -= k[12]
            np.abs(yi, out=yi)
            err_inf = float(yi.max()) * (h * _ERR_COEF)
            yi /= scale
            ratio = float(yi.max()) * (h * _ERR_COEF)
            if ratio != ratio:  # NaN: some stage derivative was not finite
                raise NonFiniteDerivative(
                    f"vector field returned non-finite values near t={t!r}")
            if ratio <= 1.0:
                if ratio == 0.0:
                    factor = _GROW_MAX
                else:
                    factor = min(_GROW_MAX,
                                 max(_SHRINK_MIN, _SAFETY * ratio ** _EXPONENT))
                h_next = min(cfg.max_step, h * factor)
                return y_new, h, h_next, err_inf
            h *= max(_SHRINK_MIN, min(1.0, _SAFETY * ratio ** _EXPONENT))


def step(field, state, t, h_try, cfg=IntegratorConfig()):
    """Take a single accepted step from (t, state).

    The trial size h_try is reduced on rejection until the componentwise
    error test passes.  Returns (new_state, t_new, h_next, err_est) where
    err_est is the max-norm of the embedded error estimate of the accepted
    step and h_next is the controller's suggestion for the following step.
    """
    y = np.asarray(state, dtype=float)
    if not np.isfinite(y).all():
        raise ValueError("state must be finite")
    f = _rhs_of(field)
    y_new, h_acc, h_next, err = _advance(f, t, y, h_try, cfg, _workspace(y.size))
    return y_new, t + h_acc, h_next, err


def _integrate_span(f, y, t0, t1, cfg, h0):
    """Integrate from t0 to exactly t1, starting with step h0.

    Returns (y_end, h_carry) so callers sampling many output times can keep
    the controller's step across segments.
    """
    if t1 == t0:
        return y.copy(), h0
    t = t0
    y = y.copy()
    h = min(h0, t1 - t0)
    steps = 0
    work = _workspace(y.size)
    while t < t1:
        if steps >= cfg.max_steps:
            raise MaxStepsExceeded(f"more than {cfg.max_steps} steps on [{t0}, {t1}]")
        remaining = t1 - t
        y, h_acc, h, _ = _advance(f, t, y, min(h, remaining), cfg, work)
        # Land exactly on t1 when the full remainder was accepted.
        t = t1 if h_acc == remaining else t + h_acc
        steps += 1
    return y, h


def integrate_to(field, state, t0, t1, cfg=IntegratorConfig()):
    """Flow endpoint at exactly t1; the final step is shortened to land on it."""
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    y = np.asarray(state, dtype=float)
    if not np.isfinite(y).all():
        raise ValueError("state must be finite")
    f = _rhs_of(field)
    y_end, _ = _integrate_span(f, y, t0, t1, cfg, cfg.initial_step)
    return y_end


def sample_at(field, state, t0, times, cfg=IntegratorConfig()):
    """States at the given ascending output times, in a single forward pass."""
    times = list(times)
    if not times:
        return []
    if times[0] < t0:
        raise ValueError("times must start at or after t0")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be ascending")
    y = np.asarray(state, dtype=float)
    if not np.isfinite(y).all():
        raise ValueError("state must be finite")
    f = _rhs_of(field)
    out = []
    t_prev = t0
    h = cfg.initial_step
    for t_k in times:
        y, h = _integrate_span(f, y, t_prev, t_k, cfg, h)
        out.append(y)
        t_prev = t_k
    return out
