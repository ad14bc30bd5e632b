import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semikit.chernoff import (
    chernoff_iterate,
    exact_scheme,
    gaussian_nodes,
    identity_scheme,
    integral_scheme,
    scalar_chernoff,
    shift_scheme,
    verify_growth_bound,
    verify_tangency,
)
from semikit.grid import GridFunction, make_grid, sample, sup_norm
from semikit.operators import (
    ConstantSymbols,
    coefficients_from_callables,
    multiplier_semigroup,
    oracle_evolve,
)

from .conftest import random_trig

T_VALUES = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]


def var_coeffs(grid, c=0.0):
    return coefficients_from_callables(grid, lambda x: 1 + 0.5 * np.sin(x), np.cos, c)


def schemes(coeffs):
    return [shift_scheme(coeffs), integral_scheme(coeffs)]


def test_shift_scheme_examples(grid64):
    f = sample(grid64, lambda x: np.exp(np.sin(x)))
    heat = shift_scheme(coefficients_from_callables(grid64, 1.0))
    assert heat.apply(0.0, f) is f
    cos = sample(grid64, np.cos)
    for t in (0.01, 0.3, 1.0):
        np.testing.assert_allclose(
            heat.apply(t, cos).samples, math.cos(math.sqrt(2 * t)) * cos.samples, atol=1e-13
        )
    react = shift_scheme(coefficients_from_callables(grid64, 0.0, 0.0, -0.7))
    np.testing.assert_allclose(react.apply(0.4, f).samples, math.exp(-0.28) * f.samples, atol=1e-13)
    assert react.growth_bound_hint == 0.0


def test_shift_scheme_rejects_negative_a(grid64):
    with pytest.raises(ValueError, match=">= 0"):
        shift_scheme(coefficients_from_callables(grid64, np.sin))


def test_gaussian_nodes_reproduce_normal_moments():
    s, w = gaussian_nodes(20)
    assert np.all(w > 0)
    assert w.sum() == pytest.approx(1, abs=1e-15)
    # E Z^(2k) = (2k-1)!!, odd moments vanish
    for k in range(1, 8):
        assert np.dot(w, s ** (2 * k)) == pytest.approx(math.prod(range(1, 2 * k, 2)), rel=1e-11)
        assert abs(np.dot(w, s ** (2 * k - 1))) < 1e-10


def test_integral_scheme_examples(grid64):
    f = sample(grid64, lambda x: np.exp(np.sin(x)))
    heat = integral_scheme(coefficients_from_callables(grid64, 1.0), 20)
    assert heat.apply(0.0, f) is f
    cos = sample(grid64, np.cos)
    # Gaussian average of cos(x + sqrt(2t) Z) is e^{-t} cos x
    t = 0.5
    s, w = gaussian_nodes(20)
    factor = float(np.dot(w, np.cos(math.sqrt(2 * t) * s)))
    assert abs(factor - math.exp(-t)) < 1e-10
    np.testing.assert_allclose(heat.apply(t, cos).samples, math.exp(-t) * cos.samples, atol=1e-10)
    for m in (2, 5, 20):
        react = integral_scheme(coefficients_from_callables(grid64, 0.0, 0.0, 1.5), m)
        np.testing.assert_allclose(react.apply(0.2, f).samples, math.exp(0.3) * f.samples, atol=1e-12)
        assert react.growth_bound_hint == 1.5


def test_integral_scheme_argument_checks(grid64):
    with pytest.raises(ValueError):
        integral_scheme(coefficients_from_callables(grid64, 1.0), 1)
    with pytest.raises(ValueError):
        integral_scheme(coefficients_from_callables(grid64, -1.0))


def test_exact_scheme_examples(grid64, rng):
    sym = ConstantSymbols(1)
    ex = exact_scheme(sym)
    cos = sample(grid64, np.cos)
    np.testing.assert_allclose(ex.apply(1.0, cos).samples, math.exp(-1) * cos.samples, atol=1e-15)
    assert ex.apply(0.0, cos) is cos
    u = random_trig(grid64, rng)
    once = ex.apply(0.9, u)
    for n in (1, 3, 16):
        assert sup_norm(chernoff_iterate(ex, 0.9, n, u) - once) < 1e-13
    assert ex.is_symmetric
    assert not exact_scheme(ConstantSymbols(1, 0.5)).is_symmetric


def test_iterate_examples(grid64, rng):
    u0 = random_trig(grid64, rng)
    sch = shift_scheme(var_coeffs(grid64))
    assert np.array_equal(chernoff_iterate(sch, 0.7, 1, u0).samples, sch.apply(0.7, u0).samples)

    react = shift_scheme(coefficients_from_callables(grid64, 0.0, 0.0, 0.8))
    for n in (1, 2, 7, 64, 1000):
        out = chernoff_iterate(react, 1.3, n, u0)
        assert np.max(np.abs(out.samples - math.exp(1.04) * u0.samples)) < 1e-12 * sup_norm(u0) * 10

    with pytest.raises(ValueError):
        chernoff_iterate(sch, 1.0, 0, u0)


def test_iterate_heat_prefactor():
    grid = make_grid(0, 2 * np.pi, 64)
    cos = sample(grid, np.cos)
    sch = shift_scheme(coefficients_from_callables(grid, 1.0))
    n = 1024
    prefactor = math.cos(math.sqrt(2 / n)) ** n
    assert abs(prefactor - math.exp(-1)) <= 2e-3
    out = chernoff_iterate(sch, 1.0, n, cos)
    np.testing.assert_allclose(out.samples, prefactor * cos.samples, atol=1e-11)


def test_tangency_exact_scheme_order_two(grid64):
    coeffs = coefficients_from_callables(grid64, 1.0)
    rep = verify_tangency(exact_scheme(ConstantSymbols(1)), coeffs, sample(grid64, np.cos), T_VALUES)
    # residual is |e^{-t} - 1 + t| exactly
    expected = np.abs(np.exp(-rep.t_values) - 1 + rep.t_values)
    np.testing.assert_allclose(rep.residuals, expected, rtol=1e-6)
    assert rep.order == pytest.approx(2, abs=0.05)
    assert not rep.degenerate


def test_tangency_degenerate(grid64):
    zero = coefficients_from_callables(grid64, 0.0)
    rep = verify_tangency(identity_scheme(), zero, sample(grid64, np.cos), T_VALUES)
    assert rep.degenerate
    assert np.all(rep.residuals == 0)
    assert math.isnan(rep.order)


@pytest.mark.parametrize("kind", ["shift", "integral"])
def test_tangency_variable_coefficients(kind, grid64):
    coeffs = var_coeffs(grid64)
    sch = shift_scheme(coeffs) if kind == "shift" else integral_scheme(coeffs)
    rep = verify_tangency(sch, coeffs, sample(grid64, np.sin), T_VALUES)
    assert 1.8 <= rep.order <= 2.2


def test_tangency_argument_checks(grid64):
    coeffs = var_coeffs(grid64)
    sch = shift_scheme(coeffs)
    f = sample(grid64, np.sin)
    with pytest.raises(ValueError):
        verify_tangency(sch, coeffs, f, [1e-1, 1e-2, 1e-3])
    with pytest.raises(ValueError):
        verify_tangency(sch, coeffs, f, [1e-1, 8e-2, 6e-2, 4e-2])
    with pytest.raises(ValueError):
        verify_tangency(sch, coeffs, f, [1e-3, 1e-2, 1e-1, 1.0])


def trial_functions(grid):
    # maxima sit on grid nodes, so interpolation cannot overshoot them
    return [
        sample(grid, np.cos),
        sample(grid, lambda x: np.exp(np.cos(x))),
        sample(grid, lambda x: np.cos(2 * x) + 0.5 * np.cos(x)),
    ]


def test_growth_bound_examples(grid64):
    trials = trial_functions(grid64)
    ts = [0.05, 0.1, 0.25, 0.5, 1.0]
    react = shift_scheme(coefficients_from_callables(grid64, 0.0, 0.0, 1.0))
    assert verify_growth_bound(react, trials, ts) == pytest.approx(1.0, abs=1e-6)
    heat = shift_scheme(coefficients_from_callables(grid64, 1.0))
    assert verify_growth_bound(heat, trials, ts) == pytest.approx(0.0, abs=1e-6)
    for sch in schemes(var_coeffs(grid64, np.sin)):
        assert verify_growth_bound(sch, trials, ts) <= 1.0 + 0.1


def test_growth_bound_argument_checks(grid64):
    sch = shift_scheme(coefficients_from_callables(grid64, 1.0))
    with pytest.raises(ValueError):
        verify_growth_bound(sch, [], [0.1])
    with pytest.raises(ValueError):
        verify_growth_bound(sch, [sample(grid64, np.zeros_like)], [0.1])


def test_scalar_chernoff():
    assert scalar_chernoff(0.0, 3.0, 17) == 1.0
    assert scalar_chernoff(1, 1, 1) == 2.0
    assert abs(scalar_chernoff(1, 1, 10**6) - math.e) <= 2e-6
    with pytest.raises(ValueError):
        scalar_chernoff(1, 1, 0)


@pytest.mark.parametrize("kind", ["shift", "integral", "exact"])
def test_identity_at_zero(kind, grid64, rng):
    coeffs = var_coeffs(grid64, np.sin)
    sch = {
        "shift": lambda: shift_scheme(coeffs),
        "integral": lambda: integral_scheme(coeffs),
        "exact": lambda: exact_scheme(ConstantSymbols(0.5, 1.0, 0.3)),
    }[kind]()
    u = random_trig(grid64, rng, real=False)
    assert np.array_equal(sch.apply(0.0, u).samples, u.samples)


@settings(max_examples=20, deadline=None)
@given(
    alpha=st.floats(-5, 5),
    beta=st.floats(-5, 5),
    t=st.floats(1e-3, 1.0),
    seed=st.integers(0, 2**31),
)
def test_schemes_linear(alpha, beta, t, seed):
    rng = np.random.default_rng(seed)
    grid = make_grid(0, 2 * np.pi, 32)
    coeffs = var_coeffs(grid, np.sin)
    f = random_trig(grid, rng, real=False)
    g = random_trig(grid, rng, real=False)
    for sch in schemes(coeffs):
        lhs = sch.apply(t, alpha * f + beta * g)
        rhs = alpha * sch.apply(t, f) + beta * sch.apply(t, g)
        assert sup_norm(lhs - rhs) < 1e-10 * (1 + abs(alpha) + abs(beta))


@pytest.mark.parametrize("c", [0.0, np.sin, lambda x: 0.5 - np.cos(x)])
def test_sup_norm_bound(c, grid64):
    coeffs = var_coeffs(grid64, c)
    w = max(0.0, float(coeffs.c.samples.real.max()))
    for sch in schemes(coeffs):
        assert sch.growth_bound_hint == pytest.approx(w)
        for f in trial_functions(grid64):
            for t in (0.01, 0.1, 0.5, 1.0):
                assert sup_norm(sch.apply(t, f)) <= math.exp(t * w) * sup_norm(f) * (1 + 1e-10)


@pytest.mark.parametrize("kind", ["shift", "integral"])
def test_convergence_monotone_against_oracle(kind):
    grid = make_grid(0, 2 * np.pi, 64)
    coeffs = var_coeffs(grid, np.sin)
    sch = shift_scheme(coeffs) if kind == "shift" else integral_scheme(coeffs)
    u0 = sample(grid, lambda x: np.exp(np.cos(x)))
    ref = oracle_evolve(coeffs, 0.5, u0)
    errs = [sup_norm(chernoff_iterate(sch, 0.5, n, u0) - ref) for n in (8, 16, 32, 64, 128, 256, 512, 1024)]
    for e0, e1 in zip(errs, errs[1:]):
        assert e1 < e0 or e1 < 1e-11


def test_iteration_split_is_bitwise_identical(grid64, rng):
    sch = shift_scheme(var_coeffs(grid64, np.sin))
    u0 = random_trig(grid64, rng)
    for t, n in [(1.0, 8), (0.3, 5), (0.7, 33)]:
        half = chernoff_iterate(sch, t / 2, n, chernoff_iterate(sch, t / 2, n, u0))
        full = chernoff_iterate(sch, t, 2 * n, u0)
        assert np.array_equal(half.samples, full.samples)


def test_degenerate_diffusion_reduces_to_drift(grid64):
    # a vanishes at x = pi, which is a node of the 64-point grid
    coeffs = coefficients_from_callables(grid64, lambda x: 0.5 * (1 + np.cos(x)), 0.7, 0.0)
    sch = shift_scheme(coeffs)
    f = sample(grid64, lambda x: np.exp(np.sin(x)))
    out = sch.apply(0.1, f)
    j = 32
    assert grid64.nodes[j] == pytest.approx(np.pi)
    assert out.samples[j] == pytest.approx(np.exp(np.sin(np.pi + 0.07)), abs=1e-12)


def test_heat_scheme_matches_multiplier_limit():
    grid = make_grid(0, 2 * np.pi, 32)
    u0 = sample(grid, lambda x: np.exp(np.cos(x)))
    ref = multiplier_semigroup(ConstantSymbols(1), 1.0, u0)
    err = sup_norm(chernoff_iterate(shift_scheme(coefficients_from_callables(grid, 1.0)), 1.0, 512, u0) - ref)
    assert err < 5e-3
