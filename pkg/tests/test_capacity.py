"""
Tests for outage and sum capacity bounds, their simulated counterparts and the scaling diagnostic.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from analysis.capacity import (
    OutageScenario, _ordered_bounds, _simulated_rates, gaussian_rate_adaptation, outage_capacity_bounds,
    outage_capacity_simulated, outage_probability_bounds, outage_probability_simulated,
    outage_scaling_diagnostic, outage_sweep, scenario_from_config, sum_capacity_bounds,
    sum_capacity_simulated, sumcap_sweep, zeta
)
from analysis.gaussian_bounds import Envelope, campbell_moments, normal_cdf
from analysis.montecarlo import SimulationConfig, dkw_slack
from models.channel import FadingModel
from models.geometry import RadialIntensity
from models.results import CapacityBounds
from utils.errors import DomainError, ModelValidationError

SWEEP_LAMBDAS = [1.0, 1.6681, 2.7826, 4.6416, 7.7426, 12.9155, 21.5443, 35.9381, 59.9484, 100.0]


def _scenario(network_factory, lam=1.0, direct=None, snr=100.0, gamma=0.1, **model_kwargs):
    return OutageScenario(
        d=1.0,
        snr=snr,
        pg=100.0,
        gamma=gamma,
        direct_fading=direct or FadingModel.deterministic(1.0),
        interferers=network_factory('g2', 4.0, lam=lam, **model_kwargs)
    )


def _outage_scenario(network_factory, kind='g2', lam=1.0):
    return OutageScenario(
        d=1.0,
        snr=100.0,
        pg=100.0,
        gamma=0.1,
        direct_fading=FadingModel.nakagami(5.0),
        interferers=network_factory(kind, 4.0, lam=lam, fading=FadingModel.nakagami(5.0),
                                    intensity=RadialIntensity.stationary(0.5))
    )


def _sumcap_model(network_factory, kind='g2', lam=1.0):
    return network_factory(kind, 4.0, lam=lam, fading=FadingModel.nakagami(5.0))


# ============================================================================
# Scenario
# ============================================================================

def test_scenario_validation(network_factory):
    with pytest.raises(ModelValidationError):
        _scenario(network_factory, gamma=1.0)
    with pytest.raises(ModelValidationError):
        _scenario(network_factory, snr=0.0)
    with pytest.raises(ModelValidationError):
        OutageScenario(d=1.0, snr=1.0, pg=100.0, gamma=0.1, direct_fading=FadingModel.deterministic(),
                       interferers=network_factory('g2', 4.0, power=2.0))


def test_scenario_from_config(network_factory):
    model = network_factory('g1', 4.0, power=5.0)
    scn = scenario_from_config(model, {'d': 2.0, 'snr_db': 20.0, 'pg': 10.0, 'gamma': 0.2,
                                       'direct_fading': {'kind': 'nakagami', 'm': 5}})
    assert scn.snr == pytest.approx(100.0)
    assert scn.interferers.power == 1.0
    assert scn.link_gain == pytest.approx(3.0 ** -4)
    assert scn.direct_fading == FadingModel.nakagami(5.0)


# ============================================================================
# zeta
# ============================================================================

def test_zeta_at_threshold(network_factory):
    scn = _scenario(network_factory)
    constants = campbell_moments(scn.interferers)
    assert zeta(scn, scn.threshold(0.3), 0.3) == pytest.approx(-constants.mean / constants.std, rel=1e-12)


def test_zeta_decreases_with_rate(network_factory):
    scn = _scenario(network_factory)
    values = [zeta(scn, 2.0, r) for r in np.linspace(0.05, 3.0, 40)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_zeta_composed_by_hand(network_factory):
    scn = _scenario(network_factory)
    constants = campbell_moments(scn.interferers)
    expected = ((1.0 * 0.5 / math.expm1(0.1) - 1.0 / 100.0) * 100.0 - constants.mean) / constants.std
    assert zeta(scn, 1.0, 0.1) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("rate", [0.0, -0.5])
def test_zeta_rate_must_be_positive(network_factory, rate):
    with pytest.raises(DomainError):
        zeta(_scenario(network_factory), 1.0, rate)


# ============================================================================
# Outage probability
# ============================================================================

def test_outage_vanishes_at_tiny_rate(network_factory):
    scn = _scenario(network_factory, lam=0.01)
    lower, upper = outage_probability_bounds(scn, 1e-6)
    assert lower == pytest.approx(0.0, abs=1e-9)
    assert upper == pytest.approx(0.0, abs=1e-9)


def test_outage_is_certain_without_signal(network_factory):
    for direct in (FadingModel.deterministic(1.0), FadingModel.nakagami(5.0)):
        scn = _scenario(network_factory, direct=direct, snr=1e-12)
        assert outage_probability_bounds(scn, 0.5) == (1.0, 1.0)


def test_outage_bounds_are_ordered(network_factory):
    rng = np.random.default_rng(77)
    for _ in range(100):
        direct = FadingModel.nakagami(float(rng.uniform(0.5, 8.0))) if rng.random() < 0.5 else FadingModel.deterministic()
        scn = _scenario(network_factory, lam=float(10 ** rng.uniform(-1, 2)), direct=direct,
                        snr=float(10 ** rng.uniform(0, 3)))
        lower, upper = outage_probability_bounds(scn, float(10 ** rng.uniform(-3, 0.5)))
        assert 0.0 <= lower <= upper + 1e-9
        assert upper <= 1.0


def test_outage_quadrature_matches_monte_carlo(network_factory):
    scn = _scenario(network_factory, lam=10.0, direct=FadingModel.nakagami(5.0), snr=100.0)
    rate = 0.2
    envelope = Envelope.for_model(scn.interferers)
    _, upper = outage_probability_bounds(scn, rate)

    h = FadingModel.nakagami(5.0).sample(np.random.default_rng(4), 1_000_000)
    values = np.where(h >= scn.threshold(rate), envelope.lower(zeta(scn, h, rate)), 0.0)
    stderr = values.std() / math.sqrt(values.size)
    assert abs((1.0 - upper) - values.mean()) < 3 * stderr


def test_simulated_outage_probability_at_simulated_capacity(network_factory):
    scn = _scenario(network_factory, lam=5.0, direct=FadingModel.nakagami(5.0))
    cfg = SimulationConfig(seed=17, num_samples=4_000)
    capacity = outage_capacity_simulated(scn, cfg)
    probability = outage_probability_simulated(scn, capacity.value, cfg)
    assert probability.value <= scn.gamma
    assert probability.n == 4_000


@pytest.mark.parametrize("seed", [21, 22, 23])
def test_simulated_outage_probability_inside_bounds(network_factory, seed):
    scn = _outage_scenario(network_factory, lam=10.0)
    cfg = SimulationConfig(seed=seed, num_samples=10_000)
    slack = dkw_slack(cfg.num_samples)

    for rate in (0.02, 0.05, 0.2, 0.5):
        lower, upper = outage_probability_bounds(scn, rate)
        simulated = outage_probability_simulated(scn, rate, cfg)
        assert lower - slack <= simulated.value <= upper + slack


# ============================================================================
# Outage capacity
# ============================================================================

def test_outage_capacity_bounds_ordered(network_factory):
    bounds = outage_capacity_bounds(_scenario(network_factory, lam=20.0))
    assert 0.0 < bounds.lower <= bounds.upper


def test_capacity_bounds_below_interference_free_rate(network_factory):
    for lam in (0.01, 1.0, 100.0):
        scn = _scenario(network_factory, lam=lam)
        bounds = outage_capacity_bounds(scn, grid_points=128)
        assert bounds.lower <= bounds.upper <= scn.max_rate()


def test_capacity_without_interference(network_factory):
    scn = _scenario(network_factory, lam=1e-12)
    simulated = outage_capacity_simulated(scn, SimulationConfig(num_samples=100))
    assert simulated.value == pytest.approx(math.log1p(100.0 * 0.5), rel=1e-9)


def test_simulated_capacity_is_the_rate_quantile(network_factory):
    scn = _scenario(network_factory, lam=5.0, gamma=0.5)
    cfg = SimulationConfig(seed=3, num_samples=1_001)
    assert outage_capacity_simulated(scn, cfg).value == pytest.approx(np.median(_simulated_rates(scn, cfg)))


def test_rate_adaptation_bounds(network_factory):
    bounds = gaussian_rate_adaptation(_scenario(network_factory, lam=20.0, direct=FadingModel.nakagami(5.0)))
    assert 0.0 < bounds.lower <= bounds.upper


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_simulated_outage_capacity_inside_bounds(network_factory, seed):
    scn = _outage_scenario(network_factory, lam=10.0)
    bounds = outage_capacity_bounds(scn)
    simulated = outage_capacity_simulated(scn, SimulationConfig(seed=seed, num_samples=10_000))
    assert bounds.contains(simulated.value, slack=3 * simulated.stderr)


@pytest.mark.slow
def test_outage_capacity_fivefold_decrease(network_factory):
    low = outage_capacity_bounds(_outage_scenario(network_factory, lam=20.0))
    high = outage_capacity_bounds(_outage_scenario(network_factory, lam=100.0))
    ratio = (low.lower + low.upper) / (high.lower + high.upper)
    assert 4.0 <= ratio <= 6.0


@pytest.mark.slow
@pytest.mark.parametrize("kind", ['g1', 'g2'])
def test_outage_sweep_containment(network_factory, kind):
    rows = outage_sweep(_outage_scenario(network_factory, kind), SWEEP_LAMBDAS, SimulationConfig(num_samples=10_000))
    for row in rows:
        assert row['lower'] - 3 * row['sim_stderr'] <= row['simulated'] <= row['upper'] + 3 * row['sim_stderr']
        if row['lambda'] >= 5.0:
            assert row['upper'] - row['lower'] <= 1.0


# ============================================================================
# Scaling diagnostic
# ============================================================================

def test_scaling_of_exact_inverse_law(network_factory):
    report = outage_scaling_diagnostic(
        _scenario(network_factory), [1.0, 2.0, 4.0, 8.0],
        capacity_fn=lambda lam: CapacityBounds(0.5 / lam, 2.0 / lam)
    )
    assert report.ratio_lower == pytest.approx(1.0)
    assert report.ratio_upper == pytest.approx(1.0)
    assert report.lower_products == pytest.approx([0.5] * 4)


def test_scaling_reports_small_lambda_departures(network_factory):
    report = outage_scaling_diagnostic(
        _scenario(network_factory), [1.0, 2.0, 3.0],
        capacity_fn=lambda lam: CapacityBounds(1.0, 1.0)
    )
    assert report.ratio_upper > 1.3


@pytest.mark.parametrize("lambdas", [[1.0, 2.0], [1.0, 3.0, 2.0], [1.0, 1.0, 2.0]])
def test_scaling_needs_increasing_lambdas(network_factory, lambdas):
    with pytest.raises(DomainError):
        outage_scaling_diagnostic(_scenario(network_factory), lambdas,
                                  capacity_fn=lambda lam: CapacityBounds(1.0, 1.0))


@pytest.mark.slow
def test_outage_inverse_lambda_scaling(network_factory):
    report = outage_scaling_diagnostic(_outage_scenario(network_factory), [20.0, 40.0, 60.0, 80.0, 100.0])
    assert report.ratio_lower <= 1.3
    assert report.ratio_upper <= 1.3


# ============================================================================
# Sum capacity
# ============================================================================

def test_sum_capacity_with_collapsed_envelope(g2_network):
    bounds = sum_capacity_bounds(g2_network, 1.0, half_width=lambda x: 0.0)
    constants = campbell_moments(g2_network)

    oracle, _ = integrate.quad(
        lambda x: 1.0 - normal_cdf((math.expm1(x) - constants.mean) / constants.std), 0.0, 10.0, limit=200
    )
    assert bounds.lower == pytest.approx(bounds.upper, rel=1e-9)
    assert bounds.lower == pytest.approx(oracle, rel=1e-6)


def test_sum_capacity_bounds_ordered(network_factory):
    for kind in ('g1', 'g2'):
        for lam in (0.5, 5.0, 50.0):
            bounds = sum_capacity_bounds(_sumcap_model(network_factory, kind, lam), 1.0)
            assert 0.0 <= bounds.lower <= bounds.upper


def test_sum_capacity_grows_with_lambda(network_factory):
    values = [sum_capacity_bounds(_sumcap_model(network_factory, lam=lam), 1.0) for lam in (10.0, 30.0, 100.0)]
    assert values[0].lower < values[1].lower < values[2].lower
    assert values[0].upper < values[1].upper < values[2].upper


def test_sum_capacity_gap_shrinks_as_inverse_lambda(network_factory):
    # The envelope width is O(1/sqrt(lambda)) in z, and dx = sigma dz / (1 + E + z sigma)
    # contributes another 1/sqrt(lambda)
    gaps = {lam: sum_capacity_bounds(_sumcap_model(network_factory, lam=lam), 1.0).gap for lam in (25.0, 100.0)}
    assert gaps[25.0] / gaps[100.0] == pytest.approx(4.0, abs=0.5)


def test_inverted_envelope_is_reported(g2_network):
    with pytest.raises(ModelValidationError, match="exceeds upper bound"):
        sum_capacity_bounds(g2_network, 1.0, half_width=lambda x: -0.2)


def test_round_off_inversion_is_absorbed():
    bounds = _ordered_bounds(1.0, 1.0 - 1e-10, "test")
    assert bounds.lower == bounds.upper == 1.0
    with pytest.raises(ModelValidationError):
        _ordered_bounds(1.0, 0.99, "test")


def test_sum_capacity_snr_must_be_positive(g2_network):
    with pytest.raises(DomainError):
        sum_capacity_bounds(g2_network, 0.0)
    with pytest.raises(DomainError):
        sum_capacity_simulated(g2_network, -1.0, SimulationConfig(num_samples=10))


def test_empty_network_has_no_sum_capacity(network_factory):
    simulated = sum_capacity_simulated(network_factory('g2', 4.0, lam=1e-12), 1.0, SimulationConfig(num_samples=100))
    assert simulated.value == pytest.approx(0.0, abs=1e-9)


def test_sum_capacity_matches_enumeration_for_sparse_window(network_factory):
    lam, snr = 0.01, 1.0
    model = network_factory('g2', 4.0, lam=lam)
    simulated = sum_capacity_simulated(model, snr, SimulationConfig(seed=6, num_samples=200_000, window_max=1.0))

    # Within the unit disk: count ~ Poisson(lam pi), radii of density 2t on [0, 1]
    mu = lam * math.pi

    def g(t):
        return 1.0 / (1.0 + t ** 4)

    one, _ = integrate.quad(lambda t: math.log1p(snr * g(t)) * 2 * t, 0.0, 1.0)
    two, _ = integrate.dblquad(lambda s, t: math.log1p(snr * (g(t) + g(s))) * 4 * t * s, 0.0, 1.0, 0.0, 1.0)
    oracle = math.exp(-mu) * (mu * one + mu ** 2 / 2 * two)

    assert abs(simulated.value - oracle) < 3 * simulated.stderr + 1e-5


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_simulated_sum_capacity_inside_bounds(network_factory, seed):
    model = _sumcap_model(network_factory, lam=10.0)
    bounds = sum_capacity_bounds(model, 1.0)
    simulated = sum_capacity_simulated(model, 1.0, SimulationConfig(seed=seed, num_samples=10_000))
    assert bounds.contains(simulated.value, slack=3 * simulated.stderr)


@pytest.mark.slow
@pytest.mark.parametrize("kind", ['g1', 'g2'])
def test_sumcap_sweep_growth(network_factory, kind):
    rows = sumcap_sweep(_sumcap_model(network_factory, kind), 1.0, SWEEP_LAMBDAS, SimulationConfig(num_samples=10_000))
    for row in rows:
        assert row['lower'] - 3 * row['sim_stderr'] <= row['simulated'] <= row['upper'] + 3 * row['sim_stderr']
        if row['lambda'] >= 5.0:
            assert row['upper'] - row['lower'] <= 1.0

    for column in ('lower', 'upper'):
        values = np.array([row[column] for row in rows])
        assert np.all(np.diff(values) > 0.0)
        # equal steps in log lambda: second differences of the top points are small
        assert np.max(np.abs(np.diff(values[-4:], n=2))) < 0.05
