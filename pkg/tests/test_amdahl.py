import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matmulfree import DomainError, analyze_block, curves, get_hardware, get_model, s_total
from matmulfree.amdahl import Target, curve

fractions = st.floats(0.0, 1.0, allow_nan=False)
speedups = st.floats(1.0, 1e6, allow_nan=False)


@given(fractions)
def test_no_improvement(f):
    assert s_total(f, 1) == pytest.approx(1.0, rel=1e-12)


@given(speedups)
def test_whole_system(s):
    assert s_total(1.0, s) == pytest.approx(s, rel=1e-12)


def test_direct_value():
    assert s_total(0.9, 10) == pytest.approx(1 / 0.19, rel=1e-12)
    assert round(s_total(0.9, 10), 4) == 5.2632


@pytest.mark.parametrize("f, s", [(-0.1, 2), (1.1, 2), (0.5, 0.99), (math.nan, 2), (0.5, math.nan)])
def test_domain(f, s):
    with pytest.raises(DomainError):
        s_total(f, s)


@settings(max_examples=300)
@given(fractions, speedups, speedups)
def test_monotone_in_speedup(f, s1, s2):
    lo, hi = sorted((s1, s2))
    assert s_total(f, lo) <= s_total(f, hi) * (1 + 1e-12)


@settings(max_examples=300)
@given(fractions, fractions, st.floats(1.0001, 1e6))
def test_monotone_in_fraction(f1, f2, s):
    lo, hi = sorted((f1, f2))
    assert s_total(lo, s) <= s_total(hi, s) * (1 + 1e-12)


@pytest.mark.parametrize("f", [i / 10 for i in range(1, 10)])
def test_limit(f):
    limit = 1 / (1 - f)
    assert abs(s_total(f, 1e6) - limit) / limit < 1e-3


def test_symmetric_split():
    proj, attn = curve(0.5, Target.PROJECTIONS), curve(0.5, Target.ATTENTION)
    assert proj.samples == attn.samples
    assert proj.asymptote == attn.asymptote == 2.0


def test_lopsided_split_asymptotes():
    assert curve(0.96, "projections").asymptote == pytest.approx(25.0)
    assert curve(0.04, "attention").asymptote == pytest.approx(1 / 0.96)


def test_curves_from_report_are_mirrored():
    rep = analyze_block(get_model("opt-1.3b"), 1024, get_hardware("cloud"))
    proj, attn = curves(rep, "compute", 100)
    assert proj.f == rep.f_compute
    assert attn.f == pytest.approx(1 - rep.f_compute)
    assert len(proj.samples) == len(attn.samples) == 100
    mirror = curve(1 - rep.f_compute, "projections")
    assert [s for _, s in mirror.samples] == [s for _, s in attn.samples]


@settings(max_examples=100)
@given(fractions, st.integers(1, 200))
def test_curve_shape(f, s_max):
    c = curve(f, "projections", s_max)
    xs = [x for x, _ in c.samples]
    ys = [y for _, y in c.samples]
    assert xs == list(range(1, s_max + 1))
    assert all(a <= b * (1 + 1e-12) for a, b in zip(ys, ys[1:]))
    assert all(y <= c.asymptote * (1 + 1e-12) for y in ys)


def test_single_point_curve():
    c = curve(0.7, "attention", 1)
    assert c.samples == ((1, 1.0),)


def test_bad_s_max():
    with pytest.raises(DomainError):
        curve(0.5, "attention", 0)


def test_memory_metric_curve_uses_memory_fraction():
    rep = analyze_block(get_model("opt-350m"), 2048, get_hardware("cloud"))
    proj, _ = curves(rep, "memory", 10)
    assert proj.f == rep.f_memory
