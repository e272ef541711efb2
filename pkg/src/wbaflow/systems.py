"""The three model vector fields, their observables, and section helpers.

All systems are written autonomously: the drive phase (t, psi2, or zeta) is
carried as a state component with unit derivative, so the stepper never sees
explicit time dependence and sections at integer values of that clock
coordinate reduce to sampling at integer times.  Lifted angles are integrated
on the universal cover; reduction mod 1 happens only in section output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import odeint
from .core import Observable
from .odeint import IntegratorConfig

TWO_PI = 2.0 * math.pi

GOLDEN_MEAN = 0.5 * (math.sqrt(5.0) - 1.0)


class DomainError(ValueError):
    """Resonance outside the unit interval."""


class NotFareyNeighbors(ValueError):
    """Consecutive modes fail the unit-determinant neighbor condition."""


class NoCrossingFound(RuntimeError):
    """No amplitude in the grid produced an escaping orbit."""


@dataclass(frozen=True)
class TwoWaveSystem:
    """Particle in two unit-wavenumber electrostatic waves of equal amplitude.

    H(q, p, t) = p^2/2 - mu cos(2 pi q) - mu cos(2 pi (q - t)); the state is
    (q, p, t) with q lifted and t the section clock.
    """

    mu: float = 0.03

    name = "two-wave"
    coords = ("q", "p", "t")
    angles = (0,)
    clock = 2
    default_observable = "p"
    param_names = ("mu",)

    def rhs(self, t, y):
        q = y[0]
        force = -TWO_PI * self.mu * (math.sin(TWO_PI * q)
                                     + math.sin(TWO_PI * (q - y[2])))
        return np.array([y[1], force, 1.0])

    def observable(self, name=None):
        name = name or self.default_observable
        if name == "p":
            return Observable("p", lambda y: y[1], component=1)
        if name == "q":
            return Observable("q", lambda y: y[0], component=0)
        raise ValueError(f"two-wave has no observable {name!r}")

    def hamiltonian(self, y):
        q, p, t = y[0], y[1], y[2]
        return (0.5 * p * p - self.mu * math.cos(TWO_PI * q)
                - self.mu * math.cos(TWO_PI * (q - t)))

    def hamiltonian_time_derivative(self, y):
        # dH/dt along orbits equals the explicit partial derivative.
        q, t = y[0], y[2]
        return -TWO_PI * self.mu * math.sin(TWO_PI * (q - t))


@dataclass(frozen=True)
class QpPendulumSystem:
    """Damped pendulum driven at two incommensurate frequencies.

    State (theta, psi1, psi2, p) with psi2 the unit-speed section clock.
    theta'' picks up -nu theta' damping, the pendulum torque a cos(2 pi
    theta), a constant torque b, and the two-frequency drive through psi1
    (rate gamma) and psi2 (rate 1).  Depending on b the attractor is a
    two-torus, geometrically strange but non-chaotic, or three-dimensional.
    """

    b: float
    nu: float = 6.0 * math.pi
    a: float = 6.0 * math.pi
    c: float = 0.55 * 6.0 * math.pi
    gamma: float = GOLDEN_MEAN

    name = "qp-pendulum"
    coords = ("theta", "psi1", "psi2", "p")
    angles = (0, 1, 2)
    clock = 2
    default_observable = "p"
    param_names = ("b", "nu", "a", "c", "gamma")

    def rhs(self, t, y):
        dp = (-self.nu * y[3] + self.a * math.cos(TWO_PI * y[0]) + self.b
              + self.c * (math.cos(TWO_PI * y[1]) + math.cos(TWO_PI * y[2])))
        return np.array([y[3], self.gamma, 1.0, dp])

    def observable(self, name=None):
        name = name or self.default_observable
        if name == "p":
            return Observable("p", lambda y: y[3], component=3)
        raise ValueError(f"qp-pendulum has no observable {name!r}")


# Mode amplitudes at overall scale 1, exact rationals over 21600.  The seven
# resonances n/m sit at levels <= 3 of the Farey tree between 0/1 and 1/1 and
# every consecutive pair overlaps exactly at scale 1.
DEFAULT_FAREY_MODES = (
    (4, 1, Fraction(72, 21600)),
    (3, 1, Fraction(27, 21600)),
    (5, 2, Fraction(25, 21600)),
    (2, 1, Fraction(96, 21600)),
    (5, 3, Fraction(25, 21600)),
    (3, 2, Fraction(27, 21600)),
    (4, 3, Fraction(72, 21600)),
)


@dataclass(frozen=True)
class FareyFieldSystem:
    """Field-line flow of a model magnetic field with prescribed islands.

    State (psi, theta, zeta): psi in [0, 1] is the radial surface label,
    theta the poloidal angle, zeta the toroidal clock.  Each (m, n) mode
    carves an island chain at psi = n/m; psi = 0 and psi = 1 stay invariant
    because every psi-derivative term carries the factor psi (psi - 1).
    """

    epsilon: float
    modes: tuple = DEFAULT_FAREY_MODES
    _m: np.ndarray = dc_field(init=False, repr=False, compare=False)
    _n: np.ndarray = dc_field(init=False, repr=False, compare=False)
    _amp: np.ndarray = dc_field(init=False, repr=False, compare=False)
    _m_amp: np.ndarray = dc_field(init=False, repr=False, compare=False)

    name = "farey"
    coords = ("psi", "theta", "zeta")
    angles = (1,)
    clock = 2
    default_observable = "psi"
    param_names = ("epsilon",)

    def __post_init__(self):
        for m, n, _ in self.modes:
            if math.gcd(int(m), int(n)) != 1:
                raise ValueError(f"mode ({m},{n}) is not coprime")
        m = np.array([float(mode[0]) for mode in self.modes])
        n = np.array([float(mode[1]) for mode in self.modes])
        amp = np.array([self.epsilon * float(mode[2]) for mode in self.modes])
        object.__setattr__(self, "_m", m)
        object.__setattr__(self, "_n", n)
        object.__setattr__(self, "_amp", amp)
        object.__setattr__(self, "_m_amp", m * amp)

    def rhs(self, t, y):
        # Sign convention: island centers are elliptic on the line
        # theta = zeta = 0, so the escape start (psi, theta) = (0.27, 0.375)
        # sits by the hyperbolic point of the (4, 1) chain.
        psi = y[0]
        phase = TWO_PI * (self._m * y[1] - self._n * y[2])
        radial = psi * (psi - 1.0)
        dpsi = TWO_PI * radial * float(self._m_amp @ np.sin(phase))
        dtheta = psi + (2.0 * psi - 1.0) * float(self._amp @ np.cos(phase))
        return np.array([dpsi, dtheta, 1.0])

    def observable(self, name=None):
        name = name or self.default_observable
        if name == "psi":
            return Observable("psi", lambda y: y[0], component=0)
        if name == "theta":
            return Observable("theta", lambda y: y[1], component=1)
        raise ValueError(f"farey has no observable {name!r}")


SYSTEM_NAMES = ("two-wave", "qp-pendulum", "farey")


def make_system(name, params):
    """Build a system from its name and a parameter map (strict keys)."""
    params = dict(params)
    if name == "two-wave":
        cls = TwoWaveSystem
    elif name == "qp-pendulum":
        cls = QpPendulumSystem
    elif name == "farey":
        cls = FareyFieldSystem
    else:
        raise ValueError(f"unknown system {name!r}; expected one of {SYSTEM_NAMES}")
    unknown = set(params) - set(cls.param_names) - {"modes"}
    if unknown:
        raise ValueError(f"unknown parameters for {name}: {sorted(unknown)}")
    return cls(**params)


def initial_state(system, values):
    """Full initial state from a coordinate list.

    The trailing clock coordinate may be omitted when the clock is the last
    coordinate, in which case it starts at zero.
    """
    dim = len(system.coords)
    values = [float(v) for v in values]
    if len(values) == dim:
        return np.array(values)
    if len(values) == dim - 1 and system.clock == dim - 1:
        return np.array(values + [0.0])
    raise ValueError(
        f"{system.name} needs {dim} coordinates {system.coords} "
        f"(clock may be omitted when trailing); got {len(values)}")


def reduce_angles(system, state):
    out = np.array(state, dtype=float)
    for i in system.angles:
        out[i] = out[i] % 1.0
    out[system.clock] = out[system.clock] % 1.0
    return out


def poincare_section(system, x0, n_crossings, cfg=IntegratorConfig()):
    """Section points at integer values of the system's clock coordinate.

    Returns an (n_crossings, dim) array with angles reduced mod 1.
    """
    x0 = np.asarray(x0, dtype=float)
    clock0 = x0[system.clock]
    base = math.floor(clock0)
    times = [base + k - clock0 for k in range(1, n_crossings + 1)]
    states = odeint.sample_at(system, x0, 0.0, times, cfg)
    return np.array([reduce_angles(system, s) for s in states])


def island_half_width(m, n, eps_mn):
    """Half-width in psi of the island chain a single (m, n) mode creates.

    In the pendulum approximation the chain sits at psi = n/m and has
    half-width 2 sqrt(eps_mn (n/m)(1 - n/m)).
    """
    rot = n / m
    if not 0.0 < rot < 1.0:
        raise DomainError(f"resonance n/m = {rot} outside (0, 1)")
    if eps_mn < 0.0:
        raise DomainError("mode amplitude must be nonnegative")
    return 2.0 * math.sqrt(eps_mn * rot * (1.0 - rot))


@dataclass(frozen=True)
class OverlapRecord:
    pair: tuple
    width_sum: float
    gap: float
    ratio: float


def overlap_check(modes, epsilon=1.0):
    """Width-sum vs gap for each consecutive Farey-neighbor pair of modes.

    The ratio (width_1 + width_2) * m1 * m2 reaches one exactly when the two
    chains touch; the default mode set is tuned so all pairs touch at
    epsilon = 1.
    """
    ordered = sorted(modes, key=lambda mode: Fraction(int(mode[1]), int(mode[0])))
    out = []
    for (m1, n1, a1), (m2, n2, a2) in zip(ordered, ordered[1:]):
        m1, n1, m2, n2 = int(m1), int(n1), int(m2), int(n2)
        if abs(n1 * m2 - n2 * m1) != 1:
            raise NotFareyNeighbors(f"({m1},{n1}) and ({m2},{n2})")
        width_sum = (island_half_width(m1, n1, epsilon * float(a1))
                     + island_half_width(m2, n2, epsilon * float(a2)))
        gap = 1.0 / (m1 * m2)
        out.append(OverlapRecord(pair=((m1, n1), (m2, n2)),
                                 width_sum=width_sum, gap=gap,
                                 ratio=width_sum * m1 * m2))
    return out


@dataclass(frozen=True)
class EpsilonScanPoint:
    epsilon: float
    max_psi: float
    crossed: bool
    crossing_time: float  # nan when no crossing


@dataclass(frozen=True)
class CriticalEpsilon:
    epsilon: float
    crossing_time: float
    points: tuple


def _max_psi_run(system, x0, t_max, psi_target, cfg):
    """Integrate until psi exceeds the target or t_max is reached."""
    from . import _fast, core

    if core.FAST_ENABLED:
        result = _fast.run_escape(system, x0, t_max, psi_target, cfg)
        if result is not None:
            max_psi, t_cross, status = result
            core._raise_for_status(status, t_max)
            crossed = t_cross == t_cross  # nan when no crossing
            return max_psi, crossed, t_cross

    f = system.rhs
    y = np.asarray(x0, dtype=float)
    t = 0.0
    h = cfg.initial_step
    max_psi = y[0]
    steps = 0
    work = odeint._workspace(y.size)
    while t < t_max:
        if steps >= cfg.max_steps:
            raise odeint.MaxStepsExceeded(f"more than {cfg.max_steps} steps")
        remaining = t_max - t
        y, h_acc, h, _ = odeint._advance(f, t, y, min(h, remaining), cfg, work)
        t = t_max if h_acc == remaining else t + h_acc
        steps += 1
        if y[0] > max_psi:
            max_psi = y[0]
            if max_psi > psi_target:
                return max_psi, True, t
    return max_psi, False, math.nan


def critical_epsilon_crossing(eps_grid, x0=(0.27, 0.375, 0.0), t_max=1.0e4,
                              psi_target=0.45, cfg=IntegratorConfig(),
                              modes=DEFAULT_FAREY_MODES):
    """Smallest amplitude whose orbit escapes past psi_target within t_max.

    The default start sits near the hyperbolic point of the (4, 1) island:
    state (psi, theta, zeta) = (0.27, 0.375, 0).  Scans the ascending grid
    and stops at the first crossing.
    """
    eps_grid = [float(e) for e in eps_grid]
    if any(b < a for a, b in zip(eps_grid, eps_grid[1:])):
        raise ValueError("eps_grid must be ascending")
    points = []
    for eps in eps_grid:
        system = FareyFieldSystem(epsilon=eps, modes=modes)
        max_psi, crossed, t_cross = _max_psi_run(system, x0, t_max, psi_target, cfg)
        points.append(EpsilonScanPoint(epsilon=eps, max_psi=max_psi,
                                       crossed=crossed, crossing_time=t_cross))
        if crossed:
            return CriticalEpsilon(epsilon=eps, crossing_time=t_cross,
                                   points=tuple(points))
    raise NoCrossingFound(
        f"no orbit exceeded psi = {psi_target} for any amplitude in the grid")
