import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vrfbopt.analytic import (AnalyticInputs, continuous_optimal_x, lost_revenue_no_service,
                              lost_revenue_with_services, net_potential_revenue, net_revenue_curve,
                              optimal_service_count, potential_service_revenue)
from vrfbopt.core import ValidationError

BASE = AnalyticInputs(r=100.0, Q=0.1, D=200.0, K=125.0)


def brute_argmax(r, Q, D, K, x_max):
    """Plain loop over the net value; the first maximum wins ties."""
    S = r * Q * D / 2
    best_x, best = 0, -K
    for x in range(1, x_max + 1):
        v = S * x / (x + 1) - K * (x + 1)
        if v > best:
            best_x, best = x, v
    return best_x, best


def test_loss_without_service():
    assert lost_revenue_no_service(BASE) == 1000.0
    assert lost_revenue_no_service(AnalyticInputs(100, 0.0, 200, 1)) == 0.0
    assert lost_revenue_no_service(AnalyticInputs(0, 0.1, 200, 1)) == 0.0


def test_loss_with_services():
    assert lost_revenue_with_services(BASE, 3) == 250.0
    assert lost_revenue_with_services(BASE, 0) == lost_revenue_no_service(BASE)
    assert lost_revenue_with_services(BASE, 1e9) < 1e-5


def test_potential_revenue():
    assert potential_service_revenue(BASE, 1) == 500.0
    assert potential_service_revenue(BASE, 0) == 0.0
    assert potential_service_revenue(BASE, 3) == 750.0


def test_net_revenue_examples():
    assert net_potential_revenue(BASE, 0) == -125.0
    assert net_potential_revenue(BASE, 1) == 250.0
    assert net_potential_revenue(BASE, 2) == pytest.approx(291.6666666667, abs=1e-9)


def test_negative_x_rejected():
    for fn in (lost_revenue_with_services, potential_service_revenue, net_potential_revenue):
        with pytest.raises(ValidationError):
            fn(BASE, -1)


def test_invalid_inputs():
    with pytest.raises(ValidationError):
        AnalyticInputs(100, 1.5, 200, 1)
    with pytest.raises(ValidationError):
        AnalyticInputs(100, 0.1, 200, -1)
    with pytest.raises(ValidationError):
        AnalyticInputs(-1, 0.1, 200, 1)


def test_continuous_root():
    assert continuous_optimal_x(BASE) == pytest.approx(math.sqrt(8) - 1, abs=1e-12)
    # K equal to the no-service loss puts the root at 0, below the x >= 1 branch
    assert continuous_optimal_x(AnalyticInputs(100, 0.1, 200, 1000)) == 0.0
    # K = S/4 is the perfect-square case
    assert continuous_optimal_x(AnalyticInputs(100, 0.1, 200, 250)) == 1.0
    with pytest.raises(ValidationError, match="unbounded service count"):
        continuous_optimal_x(AnalyticInputs(100, 0.1, 200, 0))


@pytest.mark.parametrize("K,x_star,net", [(125.0, 2, 291.666667), (250.0, 1, 0.0), (300.0, 1, -100.0)])
def test_optimal_service_count_examples(K, x_star, net):
    x, v = optimal_service_count(AnalyticInputs(100, 0.1, 200, K))
    assert x == x_star
    assert v == pytest.approx(net, abs=1e-6)
    assert (x, v) == pytest.approx(brute_argmax(100, 0.1, 200, K, 100))


def test_free_services_hit_cap():
    assert optimal_service_count(AnalyticInputs(100, 0.1, 200, 0.0), x_max=50)[0] == 50
    assert optimal_service_count(AnalyticInputs(0, 0.1, 200, 0.0), x_max=50)[0] == 0


def test_curve_matches_scalar():
    curve = net_revenue_curve(BASE, 30)
    ref = [net_potential_revenue(BASE, x) for x in range(31)]
    np.testing.assert_allclose(curve, ref, rtol=0, atol=1e-10)


inputs = st.builds(AnalyticInputs,
                   r=st.floats(1.0, 1e4), Q=st.floats(1e-4, 1.0),
                   D=st.floats(1.0, 1e4), K=st.floats(1e-3, 1e5))


@given(inputs)
def test_break_even_at_quarter(inp):
    S = inp.no_service_loss
    at = AnalyticInputs(inp.r, inp.Q, inp.D, 0.25 * S)
    xs = np.arange(1, 200)
    assert np.max(net_revenue_curve(at, 199)[1:]) == pytest.approx(0.0, abs=1e-9 * max(1.0, S))
    above = AnalyticInputs(inp.r, inp.Q, inp.D, 0.2525 * S)
    assert np.all(net_revenue_curve(above, 199)[xs] < 0)


@given(inputs)
def test_concave_beyond_one(inp):
    v = net_revenue_curve(inp, 60)[1:]
    second = v[2:] - 2 * v[1:-1] + v[:-2]
    assert np.all(second <= 1e-9 * max(1.0, inp.no_service_loss))


@given(inputs)
def test_potential_is_difference_of_losses(inp):
    for x in (0, 1, 4, 17):
        lhs = potential_service_revenue(inp, x)
        rhs = lost_revenue_no_service(inp) - lost_revenue_with_services(inp, x)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


@given(inputs)
def test_stationary_at_continuous_root(inp):
    S = inp.no_service_loss
    if S / inp.K <= 8:  # root below 1 sits outside the x >= 1 branch
        return
    xc = continuous_optimal_x(inp)
    h = 1e-5 * max(1.0, xc)
    deriv = (net_potential_revenue(inp, xc + h) - net_potential_revenue(inp, xc - h)) / (2 * h)
    scale = max(S, inp.K)
    assert abs(deriv) <= 1e-4 * scale


@settings(max_examples=300, deadline=None)
@given(r=st.floats(1.0, 1e3), Q=st.floats(1e-3, 0.5), D=st.floats(1.0, 1e3), ratio=st.floats(1e-4, 0.2499))
def test_argmax_matches_brute_force(r, Q, D, ratio):
    S = r * Q * D / 2
    K = ratio * S
    x, v = optimal_service_count(AnalyticInputs(r, Q, D, K))
    bx, bv = brute_argmax(r, Q, D, K, 2000)
    assert v == pytest.approx(bv, rel=1e-12, abs=1e-9)
    assert x == bx
    xc = -1 + math.sqrt(S / K)
    assert x in (math.floor(xc), math.ceil(xc))
