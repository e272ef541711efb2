"""Config parsing, validation, and round-trip rendering."""

from fractions import Fraction

import pytest

from wbaflow.config import (ParseError, RunConfig, ValidationError,
                            parse_config, render_config)

MINIMAL = """
[run]
command = dig

[system]
name = two-wave
mu = 0.03

[numeric]
T = 1000
x0 = 0 0.45
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.command == "dig"
    assert cfg.system == "two-wave"
    assert cfg.params == {"mu": 0.03}
    assert cfg.x0 == (0.0, 0.45)
    assert cfg.T == 1000.0
    assert cfg.weight == "bump"
    assert cfg.width == 1.0
    assert cfg.threshold == 5.0
    assert cfg.abs_tol == 1e-13
    assert cfg.rel_tol == 1e-13


def test_negative_T_rejected():
    with pytest.raises(ValidationError) as err:
        parse_config(MINIMAL.replace("T = 1000", "T = -5"))
    assert any("T must be positive" in e for e in err.value.errors)


def test_farey_scan_config():
    text = """
[run]
command = scan
workers = 8

[system]
name = farey
epsilon = 0.5

[grid]
axis = psi0
lo = 0
hi = 0.5
count = 501

[numeric]
T = 1000
"""
    cfg = parse_config(text)
    assert cfg.command == "scan"
    assert cfg.params == {"epsilon": 0.5}
    assert (cfg.lo, cfg.hi, cfg.count) == (0.0, 0.5, 501)
    assert cfg.workers == 8


def test_all_errors_reported_at_once():
    text = """
[run]
command = scan

[system]
name = two-wave
mu = 0.03

[grid]
axis = p0
lo = 1.0
hi = 0.0
count = 1

[numeric]
T = -2
threshold = -1
"""
    with pytest.raises(ValidationError) as err:
        parse_config(text)
    messages = "\n".join(err.value.errors)
    assert "lo < hi" in messages
    assert "count" in messages
    assert "T must be positive" in messages
    assert "threshold" in messages
    assert len(err.value.errors) >= 4


def test_unknown_section_and_key():
    with pytest.raises(ParseError) as err:
        parse_config("[bogus]\nx = 1\n")
    assert err.value.line == 1
    with pytest.raises(ValidationError) as err2:
        parse_config(MINIMAL + "zzz = 1\n")
    assert any("unknown key 'zzz'" in e for e in err2.value.errors)


def test_unknown_system_parameter():
    with pytest.raises(ValidationError) as err:
        parse_config(MINIMAL.replace("mu = 0.03", "mu = 0.03\nnu = 1"))
    assert any("unknown key 'nu'" in e for e in err.value.errors)


def test_syntax_errors_have_positions():
    with pytest.raises(ParseError) as err:
        parse_config("[run\ncommand = dig\n")
    assert err.value.line == 1
    with pytest.raises(ParseError) as err2:
        parse_config("command = dig\n")
    assert err2.value.line == 1
    with pytest.raises(ParseError) as err3:
        parse_config("[run]\ncommand dig\n")
    assert err3.value.line == 2


def test_duplicate_key_rejected():
    with pytest.raises(ParseError):
        parse_config("[run]\ncommand = dig\ncommand = wba\n")


def test_comments_and_blank_lines():
    cfg = parse_config("# heading\n" + MINIMAL.replace(
        "T = 1000", "T = 1000  # averaging time"))
    assert cfg.T == 1000.0


def test_command_requirements():
    base = """
[run]
command = scan

[system]
name = two-wave
mu = 0.03
"""
    with pytest.raises(ValidationError) as err:
        parse_config(base)
    assert any("requires [grid]" in e for e in err.value.errors)

    with pytest.raises(ValidationError) as err2:
        parse_config(base.replace("command = scan", "command = dig"))
    assert any("requires x0" in e for e in err2.value.errors)


def test_qp_requires_b():
    text = """
[run]
command = dig

[system]
name = qp-pendulum

[numeric]
x0 = 0 0 0 2
"""
    with pytest.raises(ValidationError) as err:
        parse_config(text)
    assert any("requires parameter b" in e for e in err.value.errors)


def test_x0_dimension_checked():
    with pytest.raises(ValidationError) as err:
        parse_config(MINIMAL.replace("x0 = 0 0.45", "x0 = 0"))
    assert any("coordinates" in e for e in err.value.errors)


def test_eps_critical_validation():
    text = """
[run]
command = eps-critical

[system]
name = farey

[numeric]
eps_lo = 0.9
eps_hi = 0.5
"""
    with pytest.raises(ValidationError) as err:
        parse_config(text)
    assert any("eps_lo < eps_hi" in e for e in err.value.errors)


def test_modes_parsing():
    text = """
[run]
command = dig

[system]
name = farey
epsilon = 0.5
modes = 4 1 72/21600 ; 3 1 27/21600

[numeric]
T = 100
x0 = 0.3 0 0
"""
    cfg = parse_config(text)
    assert cfg.modes == ((4, 1, Fraction(72, 21600)), (3, 1, Fraction(27, 21600)))
    with pytest.raises(ParseError):
        parse_config(text.replace("3 1 27/21600", "3 1"))


@pytest.mark.parametrize("source", [
    MINIMAL,
    """
[run]
command = widths
workers = 4

[system]
name = two-wave
mu = 0.05

[numeric]
T = 500
x0 = 0 0.1
widths = 0.5 1.0 2.0
""",
    """
[run]
command = eps-critical
timing = true

[system]
name = farey

[numeric]
abs_tol = 1e-12
rel_tol = 1e-12
eps_lo = 0.5
eps_hi = 0.9
eps_step = 0.01
t_max = 5000
x0 = 0.27 0.375 0
""",
])
def test_render_round_trip(source):
    cfg = parse_config(source)
    rendered = render_config(cfg)
    assert parse_config(rendered) == cfg


def test_render_round_trip_with_modes_and_grid():
    cfg = RunConfig(command="scan", system="farey",
                    params={"epsilon": 0.25},
                    modes=((4, 1, Fraction(1, 300)), (3, 1, Fraction(1, 800))),
                    axis="psi0", lo=0.0, hi=0.5, count=51, T=250.0,
                    workers=2, x0=(0.0, 0.0, 0.0))
    assert parse_config(render_config(cfg)) == cfg
