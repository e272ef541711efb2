"""Weighted time averages along orbits and the two-segment digit diagnostic.

The weighted average of an observable h over [0, T] is computed by appending
one quadrature equation to the flow,

    dW/dt = g(t/T) h(x(t)),

and integrating the augmented system with the same adaptive stepper as the
trajectory; the average is W(T)/T.  Convergence is then estimated by
repeating the average on a second length-T segment that starts from the
first segment's endpoint and counting the digits the two values share.
Regular orbits gain digits quickly with T while chaotic orbits stall, which
is the chaos test: maxdig below the threshold flags an orbit as chaotic.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import _fast, odeint
from .odeint import IntegratorConfig
from .weights import WeightFunction

# Compiled kernels are used for the built-in (system, observable, weight)
# combinations unless disabled; the generic path computes the same scheme.
FAST_ENABLED = _fast.HAVE_NUMBA and not os.environ.get("WBAFLOW_NO_FAST")

# Digit cap reported when two segment averages agree to the last bit.
DIG_CAP = 16.0

# maxdig below this at T = 1000 labels an orbit chaotic.
DEFAULT_THRESHOLD = 5.0

LABEL_REGULAR = "regular"
LABEL_CHAOTIC = "chaotic"

# The embedded error estimate of the 7(8) pair is blind to components whose
# derivative depends on time alone, which is exactly the quadrature equation
# when the flow is (nearly) integrable.  Capping the step keeps the weight
# well resolved in that regime; adaptive steps are far below the cap
# otherwise.
_QUADRATURE_STEP_FRACTION = 1.0 / 128.0


@dataclass(frozen=True)
class Observable:
    name: str
    evaluator: Callable[[np.ndarray], float]
    component: int | None = None  # set when the observable is one coordinate


ONE = Observable("one", lambda state: 1.0)


@dataclass(frozen=True)
class WbaResult:
    average: float
    T: float
    endpoint: np.ndarray
    weight: WeightFunction
    observable: str


@dataclass(frozen=True)
class DigitAccuracy:
    absdig: float
    reldig: float
    maxdig: float
    wba_first: float
    wba_second: float
    label: str


def wba(field, x0, observable, weight, T, cfg=IntegratorConfig()):
    """Weighted average of the observable over one length-T orbit segment."""
    if T <= 0.0:
        raise ValueError("T must be positive")
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    cap = T * _QUADRATURE_STEP_FRACTION
    cfg_eff = cfg if cfg.max_step <= cap else replace(cfg, max_step=cap)

    if FAST_ENABLED:
        packed = _fast.pack(field, observable, weight)
        if packed is not None:
            z, status = _fast.run_wba(packed, x0, T, cfg_eff)
            _raise_for_status(status, T)
            return WbaResult(average=z[n] / T, T=T, endpoint=z[:n],
                             weight=weight, observable=observable.name)

    f = field.rhs if hasattr(field, "rhs") else field
    g_eval = weight.eval
    h_eval = observable.evaluator
    inv_T = 1.0 / T

    def augmented(t, y):
        x = y[:n]
        out = np.empty(n + 1)
        out[:n] = f(t, x)
        out[n] = g_eval(t * inv_T) * h_eval(x)
        return out

    z0 = np.append(x0, 0.0)
    z = odeint.integrate_to(augmented, z0, 0.0, T, cfg_eff)
    return WbaResult(average=z[n] / T, T=T, endpoint=z[:n], weight=weight,
                     observable=observable.name)


def _raise_for_status(status, T):
    if status == _fast.OK:
        return
    if status == _fast.STATUS_MAX_STEPS:
        raise odeint.MaxStepsExceeded(f"step budget exhausted on [0, {T}]")
    if status == _fast.STATUS_UNDERFLOW:
        raise odeint.StepUnderflow(f"step size underflowed on [0, {T}]")
    raise odeint.NonFiniteDerivative("vector field returned non-finite values")


def digit_accuracy(field, x0, observable, weight, T, cfg=IntegratorConfig(),
                   threshold=DEFAULT_THRESHOLD):
    """Digit agreement between the averages over [0, T] and [T, 2T].

    The second segment continues from the first segment's endpoint state;
    there is no re-integration from time zero.
    """
    first = wba(field, x0, observable, weight, T, cfg)
    second = wba(field, first.endpoint, observable, weight, T, cfg)
    a1 = first.average
    a2 = second.average
    diff = abs(a1 - a2)
    if diff == 0.0:
        absdig = DIG_CAP
        reldig = DIG_CAP
    else:
        absdig = -math.log10(diff)
        denom = 0.5 * (abs(a1) + abs(a2))
        reldig = -math.log10(diff / denom) if denom > 0.0 else 0.0
    maxdig = max(absdig, reldig)
    label = LABEL_CHAOTIC if maxdig < threshold else LABEL_REGULAR
    return DigitAccuracy(absdig=absdig, reldig=reldig, maxdig=maxdig,
                         wba_first=a1, wba_second=a2, label=label)


def rotation_number(field, x0, angle_velocity, weight, T, cfg=IntegratorConfig()):
    """Average angular velocity of a lifted angle coordinate.

    The observable must be the time derivative of a lifted angle (momentum p
    for the pendulum-type systems, the radial coordinate for the field-line
    model); its weighted average is the rotation number.
    """
    return wba(field, x0, angle_velocity, weight, T, cfg).average
