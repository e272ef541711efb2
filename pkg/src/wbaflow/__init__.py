"""Weighted Birkhoff averaging for flows.

A library and CLI for fast, high-accuracy chaos detection and rotation-number
computation: weight-windowed time averages of observables along orbits, the
two-segment digit-accuracy diagnostic, three model systems (two-wave
Hamiltonian, quasiperiodically forced pendulum, magnetic field-line flow),
and batch scan machinery with CSV/figure reports.
"""

from .core import (DEFAULT_THRESHOLD, DigitAccuracy, Observable, ONE,
                   WbaResult, digit_accuracy, rotation_number, wba)
from .odeint import (IntegratorConfig, MaxStepsExceeded, NonFiniteDerivative,
                     StepUnderflow, integrate_to, sample_at, step)
from .scan import (FractionPoint, PointRecord, ScanResult, ScanSpec,
                   chaotic_fraction_curve, dig_vs_T_curve, rotation_profile,
                   run_scan, width_sweep, write_scan_csv, write_summary_json)
from .systems import (DEFAULT_FAREY_MODES, FareyFieldSystem, QpPendulumSystem,
                      TwoWaveSystem, critical_epsilon_crossing,
                      island_half_width, make_system, overlap_check,
                      poincare_section)
from .weights import WeightFunction, WidthTooLarge, bump, normalize, sin2, uniform

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_FAREY_MODES", "DEFAULT_THRESHOLD", "DigitAccuracy",
    "FareyFieldSystem", "FractionPoint", "IntegratorConfig",
    "MaxStepsExceeded", "NonFiniteDerivative", "ONE", "Observable",
    "PointRecord", "QpPendulumSystem", "ScanResult", "ScanSpec",
    "StepUnderflow", "TwoWaveSystem", "WbaResult", "WeightFunction",
    "WidthTooLarge", "bump", "chaotic_fraction_curve",
    "critical_epsilon_crossing", "dig_vs_T_curve", "digit_accuracy",
    "integrate_to", "island_half_width", "make_system", "normalize",
    "overlap_check", "poincare_section", "rotation_number",
    "rotation_profile", "run_scan", "sample_at", "sin2", "step", "uniform",
    "wba", "width_sweep", "write_scan_csv", "write_summary_json",
    "__version__",
]
