"""Optional compiled kernels for the built-in systems.

When numba is importable, the weighted-average integration and the escape
search run as jitted loops over the same Fehlberg 7(8) tableau and the same
step controller as the generic path in ``odeint``; everything else (weights,
digit accuracy, scans) is unchanged.  Without numba the package falls back to
the pure numpy path and produces the same science, only slower.

The fast path applies only when the field is one of the built-in systems,
the observable is a plain state component (or the constant one), and the
weight is one of the three supported kinds.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


TWO_PI = 2.0 * math.pi

# System codes
_TWO_WAVE = 0
_QP_PENDULUM = 1
_FAREY = 2

# Weight codes
_BUMP = 0
_SIN2 = 1
_UNIFORM = 2

# Status codes returned by the kernels
OK = 0
STATUS_MAX_STEPS = 1
STATUS_UNDERFLOW = 2
STATUS_NONFINITE = 3

_EMPTY = np.empty(0)

# Dense Fehlberg 7(8) tableau; mirrors odeint exactly.
_AF = np.zeros((13, 13))
_CF = np.zeros(13)
_B8F = np.zeros(13)


def _fill_tableau():
    from . import odeint

    for i, row in enumerate(odeint._A):
        _AF[i, :len(row)] = row
    _CF[:] = odeint._C
    _B8F[:] = odeint._B8


_fill_tableau()

_ERR_COEF = 41.0 / 840.0


@njit(cache=True)
def _rhs_into(kind, par, mv, nv, av, mav, t, y, out):
    if kind == 0:  # two-wave: (q, p, t)
        q = y[0]
        out[0] = y[1]
        out[1] = -TWO_PI * par[0] * (math.sin(TWO_PI * q)
                                     + math.sin(TWO_PI * (q - y[2])))
        out[2] = 1.0
    elif kind == 1:  # qp-pendulum: (theta, psi1, psi2, p); par = (nu,a,b,c,gamma)
        out[0] = y[3]
        out[1] = par[4]
        out[2] = 1.0
        out[3] = (-par[0] * y[3] + par[1] * math.cos(TWO_PI * y[0]) + par[2]
                  + par[3] * (math.cos(TWO_PI * y[1]) + math.cos(TWO_PI * y[2])))
    else:  # farey: (psi, theta, zeta); sign convention as in systems.py
        psi = y[0]
        s_acc = 0.0
        c_acc = 0.0
        for i in range(mv.size):
            ph = TWO_PI * (mv[i] * y[1] - nv[i] * y[2])
            s_acc += mav[i] * math.sin(ph)
            c_acc += av[i] * math.cos(ph)
        out[0] = TWO_PI * psi * (psi - 1.0) * s_acc
        out[1] = psi + (2.0 * psi - 1.0) * c_acc
        out[2] = 1.0


@njit(cache=True)
def _weight_at(wcode, wc, ww, s):
    if wcode == 0:
        if s <= 0.0 or s >= 1.0:
            return 0.0
        return wc * math.exp(-ww / (s * (1.0 - s)))
    if s < 0.0 or s > 1.0:
        return 0.0
    if wcode == 1:
        si = math.sin(math.pi * s)
        return 2.0 * si * si
    return 1.0


@njit(cache=True)
def _wba_kernel(kind, par, mv, nv, av, mav, x0, obs, wcode, wc, ww, T,
                atol, rtol, h0, hmax, max_steps):
    n = x0.size
    nn = n + 1
    y = np.zeros(nn)
    for c in range(n):
        y[c] = x0[c]
    k = np.empty((13, nn))
    ys = np.empty(nn)
    inv_t = 1.0 / T
    t = 0.0
    h = h0
    if h > hmax:
        h = hmax
    if h > T:
        h = T
    steps = 0
    while t < T:
        if steps >= max_steps:
            return y, STATUS_MAX_STEPS
        remaining = T - t
        if h > remaining:
            h = remaining
        while True:
            if t + h == t:
                return y, STATUS_UNDERFLOW
            for i in range(13):
                if i == 0:
                    for c in range(nn):
                        ys[c] = y[c]
                else:
                    for c in range(nn):
                        acc = 0.0
                        for j in range(i):
                            acc += _AF[i, j] * k[j, c]
                        ys[c] = y[c] + h * acc
                ts = t + _CF[i] * h
                row = k[i]
                _rhs_into(kind, par, mv, nv, av, mav, ts, ys, row)
                hval = 1.0 if obs < 0 else ys[obs]
                row[n] = _weight_at(wcode, wc, ww, ts * inv_t) * hval
            ratio = 0.0
            for c in range(nn):
                acc = 0.0
                for i in range(13):
                    acc += _B8F[i] * k[i, c]
                ys[c] = y[c] + h * acc
                e = (h * _ERR_COEF) * (k[0, c] + k[10, c] - k[11, c] - k[12, c])
                r = abs(e) / (atol + rtol * abs(y[c]))
                if r != r:  # NaN from a non-finite stage derivative
                    return y, STATUS_NONFINITE
                if r > ratio:
                    ratio = r
            if ratio <= 1.0:
                for c in range(nn):
                    y[c] = ys[c]
                t = T if h == remaining else t + h
                if ratio == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * ratio ** -0.125
                    if fac > 5.0:
                        fac = 5.0
                    elif fac < 0.2:
                        fac = 0.2
                h *= fac
                if h > hmax:
                    h = hmax
                steps += 1
                break
            fac = 0.9 * ratio ** -0.125
            if fac > 1.0:
                fac = 1.0
            elif fac < 0.2:
                fac = 0.2
            h *= fac
    return y, OK


@njit(cache=True)
def _escape_kernel(par, mv, nv, av, mav, x0, t_max, target,
                   atol, rtol, h0, hmax, max_steps):
    """Integrate the farey field until psi exceeds target or t_max.

    Returns (max_psi, crossing_time, status); crossing_time is nan when the
    orbit never exceeds the target.
    """
    n = x0.size
    y = x0.copy()
    k = np.empty((13, n))
    ys = np.empty(n)
    t = 0.0
    h = h0
    if h > hmax:
        h = hmax
    if h > t_max:
        h = t_max
    max_psi = y[0]
    steps = 0
    while t < t_max:
        if steps >= max_steps:
            return max_psi, math.nan, STATUS_MAX_STEPS
        remaining = t_max - t
        if h > remaining:
            h = remaining
        while True:
            if t + h == t:
                return max_psi, math.nan, STATUS_UNDERFLOW
            for i in range(13):
                if i == 0:
                    for c in range(n):
                        ys[c] = y[c]
                else:
                    for c in range(n):
                        acc = 0.0
                        for j in range(i):
                            acc += _AF[i, j] * k[j, c]
                        ys[c] = y[c] + h * acc
                _rhs_into(2, par, mv, nv, av, mav, t + _CF[i] * h, ys, k[i])
            ratio = 0.0
            for c in range(n):
                acc = 0.0
                for i in range(13):
                    acc += _B8F[i] * k[i, c]
                ys[c] = y[c] + h * acc
                e = (h * _ERR_COEF) * (k[0, c] + k[10, c] - k[11, c] - k[12, c])
                r = abs(e) / (atol + rtol * abs(y[c]))
                if r != r:  # NaN from a non-finite stage derivative
                    return max_psi, math.nan, STATUS_NONFINITE
                if r > ratio:
                    ratio = r
            if ratio <= 1.0:
                for c in range(n):
                    y[c] = ys[c]
                t = t_max if h == remaining else t + h
                if ratio == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * ratio ** -0.125
                    if fac > 5.0:
                        fac = 5.0
                    elif fac < 0.2:
                        fac = 0.2
                h *= fac
                if h > hmax:
                    h = hmax
                steps += 1
                break
            fac = 0.9 * ratio ** -0.125
            if fac > 1.0:
                fac = 1.0
            elif fac < 0.2:
                fac = 0.2
            h *= fac
        if y[0] > max_psi:
            max_psi = y[0]
            if max_psi > target:
                return max_psi, t, OK
    return max_psi, math.nan, OK


def _pack_field(field):
    from . import systems

    if isinstance(field, systems.TwoWaveSystem):
        return _TWO_WAVE, np.array([field.mu]), _EMPTY, _EMPTY, _EMPTY, _EMPTY
    if isinstance(field, systems.QpPendulumSystem):
        par = np.array([field.nu, field.a, field.b, field.c, field.gamma])
        return _QP_PENDULUM, par, _EMPTY, _EMPTY, _EMPTY, _EMPTY
    if isinstance(field, systems.FareyFieldSystem):
        return _FAREY, _EMPTY, field._m, field._n, field._amp, field._m_amp
    return None


def _pack_observable(observable, field):
    from . import core

    if observable is core.ONE:
        return -1
    if observable.component is not None:
        return int(observable.component)
    return None


_WEIGHT_CODES = {"bump": _BUMP, "sin2": _SIN2, "uniform": _UNIFORM}


def pack(field, observable, weight):
    """Kernel arguments for a (field, observable, weight) triple, or None."""
    if not HAVE_NUMBA:
        return None
    packed = _pack_field(field)
    if packed is None:
        return None
    obs = _pack_observable(observable, field)
    if obs is None:
        return None
    wcode = _WEIGHT_CODES.get(weight.kind)
    if wcode is None:
        return None
    return packed, obs, wcode, weight.norm_constant, weight.width


def run_wba(packed, x0, T, cfg):
    """Augmented integration over [0, T]; returns (state-with-W, status)."""
    (kind, par, mv, nv, av, mav), obs, wcode, wc, ww = packed
    return _wba_kernel(kind, par, mv, nv, av, mav,
                       np.asarray(x0, dtype=float), obs, wcode, wc, ww, T,
                       cfg.abs_tol, cfg.rel_tol, cfg.initial_step,
                       cfg.max_step, cfg.max_steps)


def run_escape(field, x0, t_max, target, cfg):
    """Escape search on a farey field; returns (max_psi, t_cross, status)."""
    packed = _pack_field(field)
    if not HAVE_NUMBA or packed is None or packed[0] != _FAREY:
        return None
    _, par, mv, nv, av, mav = packed
    return _escape_kernel(_EMPTY, mv, nv, av, mav,
                          np.asarray(x0, dtype=float), t_max, target,
                          cfg.abs_tol, cfg.rel_tol, cfg.initial_step,
                          cfg.max_step, cfg.max_steps)
