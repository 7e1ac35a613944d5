import io
import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from pegf.catalog import Exponential, GeneralizedPower, LeftExponential, Power, Uniform
from pegf.egf_core import EgfCurve, pegf, pegf_curve
from pegf.errors import GridTooCoarse, NoPositiveRoot
from pegf.reconstruct import (
    RootSolveConfig,
    detect_constant_pegf,
    lambda_roots,
    parse_branch,
    parse_reconstruction,
    reconstruct_cdf,
    solve_lambda,
)

# exact B_2 and dB_2/dt for Exponential(1) at t = 1 (mpmath, 30 digits)
EXP_B = 1.0819767068693264
EXP_BP = -0.9206735942077925
EXP_LAMBDA = 1.0 / (math.e - 1.0)


def g(lam, bs, bp, s):
    return lam**s - s * bs * lam - bp


# --- config --------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        RootSolveConfig(tol=0)
    with pytest.raises(ValueError):
        RootSolveConfig(max_iter=0)
    with pytest.raises(ValueError):
        RootSolveConfig(init_branch="middle")
    with pytest.raises(ValueError):
        RootSolveConfig(init_branch=-1.0)


def test_parse_branch():
    assert parse_branch("larger") == "larger"
    assert parse_branch("smaller") == "smaller"
    assert parse_branch("hint=0.6") == 0.6
    with pytest.raises(ValueError):
        parse_branch("hint=x")


# --- solve_lambda ----------------------------------------------------------------

def test_solve_lambda_double_root():
    assert solve_lambda(1.0, -1.0, 2) == pytest.approx(1.0, abs=1e-12)
    roots, tangent = lambda_roots(1.0, -1.0, 2)
    assert tangent and len(roots) == 1


def test_solve_lambda_two_roots_resolved_by_continuity():
    lam = solve_lambda(1.081976, -0.920676, 2, prev_lambda=0.6)
    assert lam == pytest.approx(0.581977, abs=5e-6)
    roots, _ = lambda_roots(1.081976, -0.920676, 2)
    assert roots[1] == pytest.approx(1.581976, abs=5e-6)
    assert solve_lambda(1.081976, -0.920676, 2, prev_lambda=1.5) == roots[1]
    # exact inputs reproduce the true reversed hazard tightly
    assert solve_lambda(EXP_B, EXP_BP, 2, prev_lambda=0.6) == pytest.approx(EXP_LAMBDA, rel=1e-12)


def test_solve_lambda_constant_case():
    cfg = RootSolveConfig(init_branch="larger")
    assert solve_lambda(0.5, 0.0, 2, cfg=cfg) == pytest.approx(1.0, abs=1e-14)


def test_branch_selection_without_history():
    roots, _ = lambda_roots(EXP_B, EXP_BP, 2)
    assert solve_lambda(EXP_B, EXP_BP, 2) == roots[1]
    assert solve_lambda(EXP_B, EXP_BP, 2, cfg=RootSolveConfig(init_branch="smaller")) == roots[0]
    assert solve_lambda(EXP_B, EXP_BP, 2, cfg=RootSolveConfig(init_branch=0.1)) == roots[0]


@pytest.mark.parametrize("s", [1.5, 3.0, 4.5])
def test_roots_for_general_order(s):
    bs, bp = 0.8, -0.1
    roots, tangent = lambda_roots(bs, bp, s)
    assert not tangent and len(roots) == 2
    lam_star = bs ** (1 / (s - 1))
    assert roots[0] < lam_star < roots[1]
    for r in roots:
        assert abs(g(r, bs, bp, s)) <= 1e-12


def test_single_root_when_derivative_nonnegative():
    roots, _ = lambda_roots(0.5, 0.7, 3)
    assert len(roots) == 1
    assert abs(g(roots[0], 0.5, 0.7, 3)) <= 1e-12


def test_no_positive_root():
    with pytest.raises(NoPositiveRoot):
        solve_lambda(1.0, -2.0, 2)
    with pytest.raises(ValueError):
        solve_lambda(-1.0, 0.0, 2)
    with pytest.raises(ValueError):
        solve_lambda(1.0, 0.0, 1.0)


@settings(max_examples=200, deadline=None)
@example(bs=999.0, frac=1e-12, s=2.5, positive=False)  # small root below rounding of g
@given(
    bs=st.floats(1e-3, 1e3),
    frac=st.just(0.0) | st.floats(1e-12, 0.999),
    s=st.sampled_from([1.5, 2.0, 2.5, 3.0]),
    positive=st.booleans(),
)
def test_roots_solve_the_equation(bs, frac, s, positive):
    # bp in (g_min... 0) gives two roots, bp >= 0 gives one
    lam_star = bs ** (1 / (s - 1))
    depth = s * bs * lam_star - lam_star**s  # -g(lam_star) at bp = 0
    bp = frac * depth if positive else -frac * depth
    roots, tangent = lambda_roots(bs, bp, s)
    for r in roots:
        assert r > 0
        assert abs(g(r, bs, bp, s)) <= 1e-6 * max(1.0, abs(bp), bs * r)
    if not tangent:
        assert len(roots) == (1 if bp >= 0 else 2)


# --- reconstruct_cdf ---------------------------------------------------------------

def test_uniform_round_trip():
    grid = np.linspace(0.05, 1.95, 200)
    res = reconstruct_cdf(pegf_curve(Uniform(0, 2), 2, grid))
    assert np.max(np.abs(res.cdf - grid / 2)) <= 2e-3
    assert np.all(res.lam > 0)
    assert res.max_eq8_residual <= 1e-6 * max(1.0, np.max(np.abs(res.bs_prime)))


def test_exponential_round_trip_needs_the_smaller_branch():
    grid = np.linspace(0.05, 8.0, 400)
    curve = pegf_curve(Exponential(1), 2, grid, source="exponential")
    curve = EgfCurve(2, grid, curve.values, support_high=8.0)
    res = reconstruct_cdf(curve, RootSolveConfig(init_branch="smaller"))
    assert np.max(np.abs(res.cdf - (1 - np.exp(-grid)))) <= 5e-3
    assert res.root_branch_log[0] == "smaller:init"
    assert all(entry == "smaller:tracked" for entry in res.root_branch_log[1:])
    assert res.cdf[-1] == pytest.approx(1.0, abs=1e-9)
    bound = 1e-6 * np.maximum(1.0, np.abs(res.bs_prime))
    assert np.all(res.residuals <= bound)
    # exercises the two-root case: the root near t = 1 is the smaller one
    i = int(np.argmin(np.abs(grid - 1.0)))
    roots, _ = lambda_roots(curve.values[i], res.bs_prime[i], 2)
    assert len(roots) == 2 and res.lam[i] == pytest.approx(roots[0])


def test_exponential_larger_seed_lands_on_the_wrong_branch():
    grid = np.linspace(0.05, 8.0, 400)
    curve = EgfCurve(2, grid, pegf_curve(Exponential(1), 2, grid).values, support_high=8.0)
    res = reconstruct_cdf(curve)
    assert res.root_branch_log[0] == "larger:init"
    assert np.max(np.abs(res.cdf - (1 - np.exp(-grid)))) > 0.5


@pytest.mark.parametrize(
    "spec, lo, hi, branch",
    [
        (Power(2.0), 0.05, 1.0, "larger"),
        (Power(0.7), 0.05, 1.0, "smaller"),
        (GeneralizedPower(0.4, 0.6, 2.0), -1.4, 2.0, "larger"),
    ],
)
def test_round_trip_other_families(spec, lo, hi, branch):
    grid = np.linspace(lo, hi, 300)
    res = reconstruct_cdf(pegf_curve(spec, 2, grid), RootSolveConfig(init_branch=branch))
    assert np.max(np.abs(res.cdf - spec.cdf(grid))) <= 5e-3


def test_geometric_grid_round_trip_for_s3():
    grid = np.geomspace(0.05, 1.95, 200)
    res = reconstruct_cdf(pegf_curve(Uniform(0, 2), 3, grid))
    assert np.max(np.abs(res.cdf - grid / 2)) <= 2e-3


def test_constant_curve_gives_left_exponential():
    grid = np.linspace(-3.0, 0.0, 31)
    curve = EgfCurve(2, grid, np.full(grid.size, 0.5), support_high=0.0)
    res = reconstruct_cdf(curve)
    np.testing.assert_allclose(res.lam, 1.0, atol=1e-12)
    np.testing.assert_allclose(res.cdf, np.exp(grid), rtol=1e-12)


def test_cdf_is_monotone_and_notes_decreasing_curve():
    grid = np.linspace(0.1, 2.0, 50)
    res = reconstruct_cdf(pegf_curve(Uniform(0, 2), 2, grid))
    assert np.all(np.diff(res.cdf) >= 0)
    assert any("not increasing" in note for note in res.notes)


def test_linear_tail_below_support_high():
    grid = np.linspace(0.05, 1.9, 150)
    curve = pegf_curve(Uniform(0, 2), 2, grid)
    res = reconstruct_cdf(curve)
    assert np.max(np.abs(res.cdf - grid / 2)) <= 2e-3
    assert any("extrapolated" in note for note in res.notes)


def test_grid_too_coarse_and_order_one():
    with pytest.raises(GridTooCoarse):
        reconstruct_cdf(EgfCurve(2, [0.5, 1.0], [2.0, 1.0], support_high=2.0))
    with pytest.raises(ValueError):
        reconstruct_cdf(EgfCurve(1, [0.5, 1.0, 1.5], [1.0, 1.0, 1.0], support_high=2.0))


def test_inconsistent_curve_names_the_grid_point():
    # B' far below -B**2 admits no positive root
    curve = EgfCurve(2, [0.1, 0.2, 0.3], [1.0, 0.1, 0.01], support_high=1.0)
    with pytest.raises(NoPositiveRoot, match="t="):
        reconstruct_cdf(curve)


def test_result_csv_round_trip():
    grid = np.linspace(0.05, 1.95, 20)
    res = reconstruct_cdf(pegf_curve(Uniform(0, 2), 2, grid))
    text = res.to_csv()
    assert text.startswith("t,lambda,cdf\n")
    assert text.rstrip().splitlines()[-1].startswith("# max_eq8_residual=")
    back = parse_reconstruction(io.StringIO(text))
    np.testing.assert_array_equal(back["t"], res.t_grid)
    np.testing.assert_array_equal(back["lambda"], res.lam)
    np.testing.assert_array_equal(back["cdf"], res.cdf)
    assert back["max_eq8_residual"] == res.max_eq8_residual


# --- detect_constant_pegf ---------------------------------------------------------------

@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("s", [1.5, 2.0, 3.0])
def test_detect_constant_recovers_rate(a, s):
    spec = LeftExponential(a, 1.0)
    grid = np.linspace(-3.0, 1.0, 12)
    curve = pegf_curve(spec, s, grid)
    spread = np.max(np.abs(curve.values - curve.values.mean())) / curve.values.mean()
    assert spread <= 1e-10
    found = detect_constant_pegf(curve)
    assert found is not None
    assert found.a == pytest.approx(a, rel=1e-6)
    assert found.b == 1.0


def test_detect_constant_examples():
    curve = EgfCurve(2, [0.0, 1.0, 2.0], [0.5, 0.5, 0.5], support_high=2.0)
    assert detect_constant_pegf(curve).a == pytest.approx(1.0, rel=1e-15)
    level = 1.5**3 / (1.5 * 3)
    curve = EgfCurve(3, [0.0, 1.0, 2.0], [level] * 3, support_high=2.0)
    assert detect_constant_pegf(curve).a == pytest.approx(1.5, abs=1e-9)
    assert pegf(LeftExponential(1.0, 0.0), 2, -1.0) == pytest.approx(0.5, rel=1e-9)


def test_detect_constant_rejects():
    assert detect_constant_pegf(pegf_curve(Uniform(0, 2), 2, np.linspace(0.1, 2, 10))) is None
    flat_unbounded = EgfCurve(2, [0.0, 1.0, 2.0], [0.5] * 3)
    assert detect_constant_pegf(flat_unbounded) is None
