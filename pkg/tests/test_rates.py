import math

import numpy as np
import pytest

from delaycert import (
    ConstantDelay,
    ConstantStepDelay,
    Dilation,
    MissingLimitError,
    MuSpec,
    PolyVectorField,
    ProportionalDelay,
    ProportionalStepDelay,
    SystemModel,
    beta_bound,
    eta_bound,
    mu_condition_check,
    solve_monotone,
    theta_bound,
    xi_bound,
)
from delaycert.certify import linear_model

SAFETY = 1.0 - 1e-6


# -- solve_monotone ---------------------------------------------------------------

def test_solve_transcendental_root():
    root = solve_monotone(lambda e: -1.0 + 0.5 * math.exp(e) + e, tol=1e-10)
    assert abs(-1.0 + 0.5 * math.exp(root) + root) <= 1e-10
    assert 0.3148 <= root <= 0.3150


def test_solve_linear_root():
    assert solve_monotone(lambda t: -2.0 + t) == pytest.approx(2.0, abs=1e-10)


def test_solve_power_of_two_root():
    assert solve_monotone(lambda x: -1.0 + 0.5 * 2.0 ** x) == pytest.approx(1.0, abs=1e-10)


def test_solve_rejects_nonnegative_at_zero():
    with pytest.raises(ValueError, match="negative"):
        solve_monotone(lambda x: 1.0 + x)


def test_solve_rejects_no_sign_change():
    with pytest.raises(ValueError, match="sign change"):
        solve_monotone(lambda x: -1.0 / (1.0 + x))


def test_solve_rejects_non_monotone():
    # negative at zero, positive at one, but decreasing on (1/3, 2/3)
    wavy = lambda x: -0.5 + 4.0 * x - 9.0 * x ** 2 + 6.0 * x ** 3
    with pytest.raises(ValueError, match="increasing"):
        solve_monotone(wavy)


# -- exponential rate (bounded delay, degree zero) -----------------------------------

def test_eta_scalar_benchmark(scalar_half):
    bound = eta_bound(scalar_half, (1.0,), tau_sup=1.0)
    assert bound.component_rates[0] == pytest.approx(0.314923057845, abs=1e-9)
    assert bound.rate == pytest.approx(SAFETY * bound.component_rates[0], rel=1e-12)
    assert bound.form == "exponential"


def test_eta_no_delayed_term_closed_form():
    model = SystemModel(
        kind="continuous",
        f=PolyVectorField.from_matrix([[-2.0, 0.0], [0.0, -3.0]]),
        delayed_terms=(PolyVectorField.zero(2),),
        dilation=Dilation((1.0, 2.0)),
        degree=0.0,
    )
    bound = eta_bound(model, (1.0, 1.0), tau_sup=7.0)
    # eta_i = -(r_max/r_i) f_i(v)/v_i exactly
    assert bound.component_rates == (4.0, 3.0)


def test_eta_zero_delay_reduction(scalar_half):
    bound = eta_bound(scalar_half, (1.0,), tau_sup=0.0)
    # residual becomes (f + g)/v + eta: root exactly 0.5
    assert bound.component_rates[0] == pytest.approx(0.5, abs=1e-10)


def test_eta_decreases_with_delay_bound(scalar_half):
    rates = [eta_bound(scalar_half, (1.0,), tau_sup=s).rate for s in (0.0, 0.5, 1.0, 2.0, 5.0)]
    assert all(a > b for a, b in zip(rates, rates[1:]))


def test_eta_requires_degree_zero(cubic2d):
    with pytest.raises(ValueError, match="degree"):
        eta_bound(cubic2d, (1.0, 1.0), tau_sup=1.0)


def test_eta_rejects_invalid_certificate(scalar_half):
    with pytest.raises(ValueError, match="certificate"):
        # margins are -0.5 v < 0, but v <= 0 is rejected even earlier;
        # use an unstable variant instead
        eta_bound(
            SystemModel(
                kind="continuous",
                f=PolyVectorField(1, (((1.0, (1,)),),)),
                delayed_terms=(PolyVectorField.zero(1),),
                dilation=Dilation((1.0,)),
                degree=0.0,
            ),
            (1.0,),
            tau_sup=1.0,
        )


# -- polynomial-reciprocal rate (bounded delay, positive degree) ----------------------

def test_theta_cubic_benchmark(cubic2d):
    bound = theta_bound(cubic2d, (1.0, 1.0), tau_sup=5.0)
    assert bound.component_rates == (4.0, 1.0)
    assert bound.rate == pytest.approx(0.2 * SAFETY, abs=1e-15)
    assert bound.poly_exponent == 1.0  # r_max / p
    assert bound.per_component_exponents == (2.0, 1.0)


def test_theta_unit_closed_form():
    model = SystemModel(
        kind="continuous",
        f=PolyVectorField(1, (((-1.0, (2,)),),)),
        delayed_terms=(PolyVectorField.zero(1),),
        dilation=Dilation((1.0,)),
        degree=1.0,
    )
    bound = theta_bound(model, (1.0,), tau_sup=0.0)
    # g = 0, f(v)/v = -1, r_i = p: theta_i = 1; zero delay leaves only that cap
    assert bound.component_rates == (1.0,)
    assert bound.rate == pytest.approx(SAFETY * 1.0)


def test_theta_requires_positive_degree(scalar_half):
    with pytest.raises(ValueError, match="degree"):
        theta_bound(scalar_half, (1.0,), tau_sup=1.0)


# -- power rate, degree zero -----------------------------------------------------------

def test_xi_scalar_closed_form(scalar_half):
    bound = xi_bound(scalar_half, (1.0,), alpha=0.5)
    # 0.5 * 2**xi = 1  =>  xi = 1
    assert bound.component_rates[0] == pytest.approx(1.0, abs=1e-10)
    assert bound.rate == pytest.approx(SAFETY, rel=1e-9)


def test_xi_discrete_linear_example():
    A = [[0.3, 0.2], [0.1, 0.4]]
    B = [[0.1, 0.0], [0.2, 0.1]]
    model = linear_model(A, [B], "discrete")
    v = (35.0 / 12.0, 45.0 / 12.0)
    bound = xi_bound(model, v, alpha=0.5)
    Av = np.array(A) @ v
    Bv = np.array(B) @ v
    for i in range(2):
        expect = math.log2((1.0 - Av[i] / v[i]) / (Bv[i] / v[i]))
        assert bound.component_rates[i] == pytest.approx(expect, abs=1e-9)
    assert bound.rate == pytest.approx(SAFETY * min(bound.component_rates), rel=1e-9)


def test_xi_alpha_zero_degenerates(scalar_half):
    bound = xi_bound(scalar_half, (1.0,), alpha=0.0)
    assert bound.infinite_components == (0,)
    assert math.isinf(bound.rate)


def test_xi_vanishing_coupling_flagged():
    model = SystemModel(
        kind="continuous",
        f=PolyVectorField.from_matrix([[-1.0, 0.0], [0.0, -1.0]]),
        delayed_terms=(PolyVectorField.from_matrix([[0.0, 0.0], [0.0, 0.5]]),),
        dilation=Dilation((1.0, 1.0)),
        degree=0.0,
    )
    bound = xi_bound(model, (1.0, 1.0), alpha=0.5)
    assert bound.infinite_components == (0,)
    assert math.isfinite(bound.rate)


def test_xi_monotone_in_alpha(scalar_half):
    rates = [xi_bound(scalar_half, (1.0,), alpha=a).rate for a in np.arange(0.1, 0.95, 0.1)]
    assert all(a > b for a, b in zip(rates, rates[1:]))
    assert xi_bound(scalar_half, (1.0,), alpha=0.99).rate < 0.2


def test_xi_rejects_bad_alpha(scalar_half):
    with pytest.raises(ValueError):
        xi_bound(scalar_half, (1.0,), alpha=1.0)


# -- power rate, positive degree ---------------------------------------------------------

def test_beta_cubic_benchmark(cubic2d):
    bound = beta_bound(cubic2d, (1.0, 1.0), alpha=0.5)
    # boundaries: ln3 / (1.5 ln2) caps at 1; ln1.5 / (2 ln2) binds
    assert bound.component_rates[0] == pytest.approx(math.log(3.0) / (1.5 * math.log(2.0)))
    assert bound.beta_boundary == pytest.approx(math.log(1.5) / (2.0 * math.log(2.0)))
    assert bound.beta == pytest.approx(0.2924812503605781, abs=1e-6)
    # envelope exponent is (r_max/p) * beta
    assert bound.rate == pytest.approx((2.0 / 2.0) * bound.beta)


def test_beta_alpha_zero_everything_feasible(cubic2d):
    bound = beta_bound(cubic2d, (1.0, 1.0), alpha=0.0)
    assert bound.beta == pytest.approx(SAFETY)
    assert math.isinf(bound.beta_boundary)


def test_beta_without_couplings_is_near_one():
    model = SystemModel(
        kind="continuous",
        f=PolyVectorField(1, (((-1.0, (2,)),),)),
        delayed_terms=(PolyVectorField.zero(1),),
        dilation=Dilation((1.0,)),
        degree=1.0,
    )
    bound = beta_bound(model, (1.0,), alpha=0.5)
    assert bound.beta == pytest.approx(SAFETY)
    assert bound.infinite_components == (0,)


def test_beta_monotone_in_alpha_below_cap(cubic2d):
    alphas = np.arange(0.2, 0.95, 0.1)
    betas = [beta_bound(cubic2d, (1.0, 1.0), a).beta for a in alphas]
    assert all(a > b for a, b in zip(betas, betas[1:]))
    assert beta_bound(cubic2d, (1.0, 1.0), 0.99).beta < 0.05


def test_beta_requires_positive_degree(scalar_half):
    with pytest.raises(ValueError, match="degree"):
        beta_bound(scalar_half, (1.0,), alpha=0.5)


# -- generic mu-stability condition --------------------------------------------------------

def test_mu_exponential_threshold_matches_root(scalar_half):
    delay = ConstantDelay(1.0)
    assert mu_condition_check(scalar_half, (1.0,), MuSpec.exponential(0.30), delay)
    assert not mu_condition_check(scalar_half, (1.0,), MuSpec.exponential(0.35), delay)


def test_mu_power_reduces_to_xi_equation(scalar_half):
    delay = ProportionalDelay(0.5)
    assert mu_condition_check(scalar_half, (1.0,), MuSpec.power(0.9), delay)
    assert not mu_condition_check(scalar_half, (1.0,), MuSpec.power(1.1), delay)


def test_mu_polynomial_reciprocal_reduces_to_theta(cubic2d):
    delay = ConstantDelay(5.0)
    mu_ok = MuSpec.polynomial_reciprocal(0.95, exponent=1.0)
    mu_bad = MuSpec.polynomial_reciprocal(1.05, exponent=1.0)
    assert mu_condition_check(cubic2d, (1.0, 1.0), mu_ok, delay)
    assert not mu_condition_check(cubic2d, (1.0, 1.0), mu_bad, delay)


def test_mu_discrete_power_matches_xi():
    A = [[0.3, 0.2], [0.1, 0.4]]
    B = [[0.1, 0.0], [0.2, 0.1]]
    model = linear_model(A, [B], "discrete")
    v = (35.0 / 12.0, 45.0 / 12.0)
    delay = ProportionalStepDelay(0.5)
    assert mu_condition_check(model, v, MuSpec.power(1.0), delay)
    assert not mu_condition_check(model, v, MuSpec.power(1.1), delay)


def test_mu_missing_limit_raises(scalar_half):
    with pytest.raises(MissingLimitError):
        mu_condition_check(scalar_half, (1.0,), MuSpec.exponential(0.1), ProportionalDelay(0.5))
    with pytest.raises(MissingLimitError):
        mu_condition_check(
            scalar_half, (1.0,), MuSpec.custom(value=lambda t: 1.0 + t), ConstantDelay(1.0)
        )


def test_mu_custom_limits_accepted(scalar_half):
    mu = MuSpec.custom(
        value=lambda t: math.exp(0.3 * t),
        delayed_ratio_limit=math.exp(0.3),
        derivative_ratio_limit=0.3,
    )
    assert mu_condition_check(scalar_half, (1.0,), mu, ConstantDelay(1.0))


# -- corollary consistency: bounds plugged back into the generic condition -------------------

def test_eta_bound_is_sharp_within_safety(scalar_half):
    delay = ConstantDelay(1.0)
    bound = eta_bound(scalar_half, (1.0,), tau_sup=1.0)
    assert mu_condition_check(scalar_half, (1.0,), MuSpec.exponential(bound.rate), delay)
    assert not mu_condition_check(
        scalar_half, (1.0,), MuSpec.exponential(1.05 * bound.rate), delay
    )


def test_theta_bound_is_sharp_within_safety(cubic2d):
    # small delay bound so the component equation (not 1/tau_sup) binds
    delay = ConstantDelay(0.1)
    bound = theta_bound(cubic2d, (1.0, 1.0), tau_sup=0.1)
    mu = MuSpec.polynomial_reciprocal(bound.rate, exponent=bound.poly_exponent)
    assert mu_condition_check(cubic2d, (1.0, 1.0), mu, delay)
    mu_hot = MuSpec.polynomial_reciprocal(1.05 * bound.rate, exponent=bound.poly_exponent)
    assert not mu_condition_check(cubic2d, (1.0, 1.0), mu_hot, delay)


def test_xi_bound_is_sharp_within_safety(scalar_half):
    delay = ProportionalDelay(0.5)
    bound = xi_bound(scalar_half, (1.0,), alpha=0.5)
    assert mu_condition_check(scalar_half, (1.0,), MuSpec.power(bound.rate), delay)
    assert not mu_condition_check(scalar_half, (1.0,), MuSpec.power(1.05 * bound.rate), delay)


def test_component_equations_strictly_increasing(scalar_half):
    # the solved residual is strictly increasing across the bracket
    fn = lambda e: -1.0 + 0.5 * math.exp(e) + e
    xs = np.linspace(0.0, 2.0, 100)
    vals = [fn(x) for x in xs]
    assert all(a < b for a, b in zip(vals, vals[1:]))


# -- serialization ----------------------------------------------------------------------------

def test_decay_bound_serialization(cubic2d):
    doc = theta_bound(cubic2d, (1.0, 1.0), tau_sup=5.0).to_dict()
    assert doc["form"] == "polynomial_reciprocal"
    assert doc["per_component_exponents"] == [2.0, 1.0]
    xi_doc = xi_bound(
        SystemModel(
            kind="continuous",
            f=PolyVectorField.from_matrix([[-1.0]]),
            delayed_terms=(PolyVectorField.zero(1),),
            dilation=Dilation((1.0,)),
            degree=0.0,
        ),
        (1.0,),
        alpha=0.5,
    ).to_dict()
    assert xi_doc["component_rates"] == ["inf"]
