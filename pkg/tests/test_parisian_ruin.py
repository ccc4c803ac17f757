import math

import numpy as np
import pytest
from scipy.stats import norm

from refractlib import (
    BrownianRisk,
    CramerLundbergExp,
    JumpDiffusionPhaseType,
    ParisianQuery,
    RefractedModel,
    RuinMethod,
    StableThreeHalves,
    UnsupportedOperationError,
    ValidationError,
    classical_ruin_u,
    classical_ruin_x,
    classical_ruin_y,
    closed_form_parisian,
    exit_up_before_parisian,
    first_passage_up_u,
    lemma_E_L1,
    lemma_E_L2,
    lemma_E_L3,
    unrefracted_parisian,
    overshoot_laplace_y,
    parisian_laplace,
    parisian_laplace_to_barrier,
    parisian_ruin_prob,
    phi_inverse,
    tau_up_within_r,
)


def test_query_validation(cl_refracted):
    """Test the checks on delay, discount rate and barrier."""
    with pytest.raises(ValidationError) as exc_info:
        ParisianQuery(cl_refracted, 1.0, 0.0)

    assert exc_info.value.field == "r"

    with pytest.raises(ValidationError) as exc_info:
        ParisianQuery(cl_refracted, 1.0, 1.0, q=-0.1)

    assert exc_info.value.field == "q"

    with pytest.raises(ValidationError) as exc_info:
        ParisianQuery(cl_refracted, 3.0, 1.0, a=2.0)

    assert exc_info.value.field == "a"


def test_query_to_dict(cl_refracted):
    """Test that the barrier only appears when it is finite."""
    assert "a" not in ParisianQuery(cl_refracted, 1.0, 2.0).to_dict()
    document = ParisianQuery(cl_refracted, 1.0, 2.0, 0.1, 5.0).to_dict()
    assert document["a"] == 5.0
    assert document["delta"] == 3.0


def test_classical_ruin_x(cl_model):
    """Test psi(x) = eta / (c alpha) exp(-(alpha - eta / c) x)."""
    for x in (0.0, 2.0, 10.0):
        assert classical_ruin_x(cl_model, x) == pytest.approx(5.0 / 9.0 * math.exp(-4.0 * x / 9.0), rel=1e-10)


def test_classical_ruin_x_without_profit():
    """Test that ruin is certain when E[X_1] <= 0."""
    assert classical_ruin_x(CramerLundbergExp(5.0, 5.0, 1.0), 10.0) == 1.0


def test_classical_ruin_of_y_and_refracted_process(cl_refracted):
    """Test that both classical ruin probabilities equal the Y formula above 0."""
    for x in (0.0, 1.0, 20.0):
        expected = 5.0 / 6.0 * math.exp(-x / 6.0)
        assert classical_ruin_y(cl_refracted, x) == pytest.approx(expected, rel=1e-10)
        assert classical_ruin_u(cl_refracted, x) == pytest.approx(expected, rel=1e-10)


def test_classical_ruin_brownian(brownian_refracted):
    """Test psi(x) = exp(-2 (c - delta) x / sigma^2) for the refracted Brownian model."""
    assert classical_ruin_u(brownian_refracted, 3.0) == pytest.approx(math.exp(-2.0 / 3.0), rel=1e-10)
    assert classical_ruin_u(brownian_refracted, 0.0) == pytest.approx(1.0)


def test_parisian_ruin_published_cramer_lundberg():
    """Test a published Cramer-Lundberg value (c = 6, r = 2, x = 1)."""
    rm = RefractedModel(CramerLundbergExp(6.0, 5.0, 1.0), 0.0)
    result = parisian_ruin_prob(ParisianQuery(rm, 1.0, 2.0))
    assert result.value == pytest.approx(2.872324151e-1, rel=1e-7)
    assert result.method == RuinMethod.HYBRID


def test_parisian_ruin_published_refracted_cramer_lundberg():
    """Test a published refracted value (c = 7, delta = 1, r = 2, x = 5)."""
    rm = RefractedModel(CramerLundbergExp(7.0, 5.0, 1.0), 1.0)
    assert parisian_ruin_prob(ParisianQuery(rm, 5.0, 2.0)).value == pytest.approx(9.50271705e-2, rel=1e-7)


def test_parisian_ruin_published_brownian(brownian_refracted):
    """Test a published Brownian value (c = 6, delta = 2, r = 4, x = 10)."""
    assert parisian_ruin_prob(ParisianQuery(brownian_refracted, 10.0, 4.0)).value == pytest.approx(
        6.857238e-4, rel=2e-6
    )


@pytest.mark.parametrize("fixture_name", ["cl_refracted", "brownian_refracted"])
@pytest.mark.parametrize("x, r", [(0.0, 1.0), (2.0, 0.5), (10.0, 2.0)])
def test_parisian_ruin_matches_closed_form(request, fixture_name, x, r):
    """Test quadrature against the fully explicit formula."""
    query = ParisianQuery(request.getfixturevalue(fixture_name), x, r)
    result = parisian_ruin_prob(query)
    assert result.value == pytest.approx(closed_form_parisian(query).value, rel=1e-8, abs=1e-14)
    assert result.diagnostics["closed_form_residual"] < 1e-9
    assert result.diagnostics["denominator_residual"] < 1e-9


def test_closed_form_needs_nonnegative_surplus(cl_refracted):
    """Test that the explicit formula refuses x < 0."""
    with pytest.raises(UnsupportedOperationError) as exc_info:
        closed_form_parisian(ParisianQuery(cl_refracted, -1.0, 1.0))

    assert exc_info.value.operation == "closed_form_parisian"


def test_parisian_ruin_without_profit():
    """Test that Parisian ruin is certain when E[X_1] - delta <= 0."""
    rm = RefractedModel(CramerLundbergExp(9.0, 5.0, 1.0), 4.0)
    result = parisian_ruin_prob(ParisianQuery(rm, 5.0, 1.0))
    assert result.value == 1.0
    assert result.method == RuinMethod.CLOSED_FORM
    assert result.to_dict()["method"] == "closed_form"


def test_parisian_ruin_unrefracted_matches_direct_formula(cl_model):
    """Test that delta = 0 reproduces the formula without the refracted kernel."""
    rm = RefractedModel(cl_model, 0.0)
    for x in (-1.0, 0.0, 3.0):
        assert parisian_ruin_prob(ParisianQuery(rm, x, 1.0)).value == pytest.approx(
            unrefracted_parisian(cl_model, x, 1.0), rel=1e-8
        )


def test_parisian_ruin_ordering(cl_refracted):
    """Test that Parisian ruin is below classical ruin and falls with x and r."""
    values = [parisian_ruin_prob(ParisianQuery(cl_refracted, x, 1.0)).value for x in (-2.0, 0.0, 2.0, 8.0)]
    assert values == sorted(values, reverse=True)
    assert values[2] < classical_ruin_u(cl_refracted, 2.0)
    longer = parisian_ruin_prob(ParisianQuery(cl_refracted, 2.0, 3.0)).value
    assert longer < values[2]


def test_parisian_ruin_refraction_lowers_ruin():
    """Test that refraction at fixed c - delta lowers Parisian ruin."""
    plain = parisian_ruin_prob(ParisianQuery(RefractedModel(CramerLundbergExp(6.0, 5.0, 1.0), 0.0), 5.0, 2.0))
    refracted = parisian_ruin_prob(ParisianQuery(RefractedModel(CramerLundbergExp(9.0, 5.0, 1.0), 3.0), 5.0, 2.0))
    assert refracted.value < plain.value


def test_parisian_ruin_phase_type_matches_exponential(cl_model, exponential_phase_type):
    """Test that one-phase claims give the Cramer-Lundberg answer."""
    expected = parisian_ruin_prob(ParisianQuery(RefractedModel(cl_model, 3.0), 1.0, 1.0)).value
    value = parisian_ruin_prob(ParisianQuery(RefractedModel(exponential_phase_type, 3.0), 1.0, 1.0)).value
    assert value == pytest.approx(expected, rel=1e-7)


def test_parisian_ruin_jump_diffusion():
    """Test that a jump-diffusion model gives a probability."""
    model = JumpDiffusionPhaseType(4.0, 1.0, 1.0, (1.0,), ((-1.0,),))
    value = parisian_ruin_prob(ParisianQuery(RefractedModel(model, 1.0), 1.0, 1.0)).value
    assert 0.0 < value < classical_ruin_u(RefractedModel(model, 1.0), 1.0)


def test_parisian_ruin_stable_unsupported():
    """Test that the stable model has no Parisian ruin probability."""
    rm = RefractedModel(StableThreeHalves(2.0), 0.5)
    with pytest.raises(UnsupportedOperationError) as exc_info:
        parisian_ruin_prob(ParisianQuery(rm, 1.0, 1.0))

    assert exc_info.value.operation == "parisian_ruin_prob"


def test_parisian_laplace_at_zero_discount(cl_refracted):
    """Test that q = 0 gives the ruin probability."""
    query = ParisianQuery(cl_refracted, 2.0, 1.0)
    assert parisian_laplace(query).value == parisian_ruin_prob(query).value


@pytest.mark.parametrize("fixture_name", ["cl_refracted", "brownian_refracted"])
def test_parisian_laplace_discounted(request, fixture_name):
    """Test that the discounted transform is below the undiscounted one and matches its barrier limit."""
    rm = request.getfixturevalue(fixture_name)
    result = parisian_laplace(ParisianQuery(rm, 1.0, 1.0, 0.1))
    assert 0.0 < result.value < parisian_ruin_prob(ParisianQuery(rm, 1.0, 1.0)).value * math.exp(0.1)
    assert result.diagnostics["barrier_limit_discrepancy"] < 1e-6


def test_parisian_laplace_barrier_approaches_barrier_free(cl_refracted):
    """Test that a distant barrier reproduces the barrier-free transform."""
    free = parisian_laplace(ParisianQuery(cl_refracted, 1.0, 1.0, 0.1), check_barrier_limit=False).value
    barrier = parisian_laplace_to_barrier(ParisianQuery(cl_refracted, 1.0, 1.0, 0.1, 150.0)).value
    assert barrier == pytest.approx(free, rel=1e-6)


@pytest.mark.parametrize("fixture_name", ["cl_refracted", "brownian_refracted"])
def test_complementarity(request, fixture_name):
    """Test that without discounting Parisian ruin before a and reaching a are complementary."""
    query = ParisianQuery(request.getfixturevalue(fixture_name), 1.0, 1.0, 0.0, 5.0)
    total = parisian_laplace_to_barrier(query).value + exit_up_before_parisian(query).value
    assert total == pytest.approx(1.0, abs=1e-8)


def test_barrier_short_circuits(cl_refracted):
    """Test that x = a gives 0 for ruin first and 1 for reaching a first."""
    query = ParisianQuery(cl_refracted, 5.0, 1.0, 0.1, 5.0)
    assert parisian_laplace_to_barrier(query).value == 0.0
    assert exit_up_before_parisian(query).value == 1.0


def test_barrier_required(cl_refracted):
    """Test that barrier quantities need a finite a."""
    with pytest.raises(ValidationError) as exc_info:
        exit_up_before_parisian(ParisianQuery(cl_refracted, 1.0, 1.0))

    assert exc_info.value.field == "a"


def test_exit_up_increases_with_surplus(brownian_refracted):
    """Test that starting closer to a makes reaching it first likelier."""
    low = exit_up_before_parisian(ParisianQuery(brownian_refracted, 0.0, 1.0, 0.05, 4.0)).value
    high = exit_up_before_parisian(ParisianQuery(brownian_refracted, 3.0, 1.0, 0.05, 4.0)).value
    assert 0.0 < low < high < 1.0


def test_first_passage_up_without_refraction(brownian_model):
    """Test E_x[exp(-q tau_b^+)] = exp(Phi(q) (x - b)) when delta = 0."""
    rm = RefractedModel(brownian_model, 0.0)
    expected = math.exp(phi_inverse(brownian_model, 0.2) * (1.0 - 4.0))
    assert first_passage_up_u(rm, 1.0, 4.0, 0.2) == pytest.approx(expected, rel=1e-12)


def test_first_passage_up_refracted(cl_refracted):
    """Test certain passage at q = 0 and a value in (0, 1) at q > 0."""
    assert first_passage_up_u(cl_refracted, 1.0, 10.0, 0.0) == pytest.approx(1.0)
    assert 0.0 < first_passage_up_u(cl_refracted, 1.0, 10.0, 0.1) < 1.0
    assert first_passage_up_u(cl_refracted, 10.0, 10.0, 0.1) == pytest.approx(1.0)


def test_first_passage_up_validation(cl_refracted):
    """Test the level checks."""
    with pytest.raises(ValidationError) as exc_info:
        first_passage_up_u(cl_refracted, 1.0, -1.0, 0.1)

    assert exc_info.value.field == "b"

    with pytest.raises(ValidationError) as exc_info:
        first_passage_up_u(cl_refracted, 2.0, 1.0, 0.1)

    assert exc_info.value.field == "x"


@pytest.mark.parametrize("theta", [0.5, 3.0])
def test_overshoot_exponential_claims(cl_refracted, theta):
    """Test that the undershoot of exponential claims is exponential and independent of ruin."""
    x = 2.0
    expected = 5.0 / 6.0 * math.exp(-x / 6.0) / (1.0 + theta)
    assert overshoot_laplace_y(cl_refracted, x, theta) == pytest.approx(expected, rel=1e-9)


def test_overshoot_brownian_creeps(brownian_refracted):
    """Test that a Brownian path crosses 0 continuously, so the transform is the ruin probability."""
    assert overshoot_laplace_y(brownian_refracted, 2.0, 1.0) == pytest.approx(math.exp(-4.0 / 9.0), rel=1e-9)


def test_overshoot_validation(cl_refracted):
    """Test that x and theta must be positive."""
    with pytest.raises(ValidationError) as exc_info:
        overshoot_laplace_y(cl_refracted, 0.0, 1.0)

    assert exc_info.value.field == "x"

    with pytest.raises(ValidationError) as exc_info:
        overshoot_laplace_y(cl_refracted, 1.0, 0.0)

    assert exc_info.value.field == "theta"


def test_tau_up_within_r_brownian(brownian_model):
    """Test the inverse Gaussian first-passage distribution."""
    x = -3.0
    r = 1.0
    expected = norm.cdf(0.5) + math.exp(1.0) * norm.cdf(-1.5)
    assert tau_up_within_r(brownian_model, x, r) == pytest.approx(expected, rel=1e-8)


def test_tau_up_within_r_requires_negative_surplus(cl_model):
    """Test that x >= 0 is rejected."""
    with pytest.raises(ValidationError) as exc_info:
        tau_up_within_r(cl_model, 0.0, 1.0)

    assert exc_info.value.field == "x"


def test_recovery_at_zero_with_unbounded_variation(brownian_refracted):
    """Test that an excursion started at 0 recovers at once when paths have unbounded variation."""
    assert lemma_E_L2(brownian_refracted, 0.0, 1.0, 0.0, 5.0) == pytest.approx(1.0, rel=1e-7)


@pytest.mark.parametrize("fixture_name", ["cl_refracted", "brownian_refracted"])
def test_recovery_with_distant_barrier(request, fixture_name):
    """Test that the barrier version tends to the barrier-free recovery probability."""
    rm = request.getfixturevalue(fixture_name)
    assert lemma_E_L2(rm, 1.0, 1.0, 0.0, 150.0) == pytest.approx(lemma_E_L3(rm, 1.0, 1.0), rel=1e-6)


def test_discounted_recovery_bounds(cl_refracted):
    """Test that discounting the recovery time lowers the expectation."""
    undiscounted = lemma_E_L1(cl_refracted, 1.0, 1.0, 0.0, 5.0)
    discounted = lemma_E_L1(cl_refracted, 1.0, 1.0, 0.2, 5.0)
    assert 0.0 < discounted < undiscounted
    assert undiscounted == pytest.approx(lemma_E_L2(cl_refracted, 1.0, 1.0, 0.0, 5.0), rel=1e-8)


def test_recovery_barrier_validation(cl_refracted):
    """Test that the initial surplus must not exceed the barrier."""
    with pytest.raises(ValidationError) as exc_info:
        lemma_E_L1(cl_refracted, 6.0, 1.0, 0.1, 5.0)

    assert exc_info.value.field == "x"


def test_brownian_negative_surplus():
    """Test that a start below 0 raises the Parisian ruin probability."""
    rm = RefractedModel(BrownianRisk(6.0, 6.0), 2.0)
    below = parisian_ruin_prob(ParisianQuery(rm, -1.0, 1.0)).value
    at_zero = parisian_ruin_prob(ParisianQuery(rm, 0.0, 1.0)).value
    assert at_zero < below < 1.0


def _random_model(rng):
    if rng.random() < 0.5:
        eta = rng.uniform(0.5, 5.0)
        alpha = rng.uniform(0.5, 3.0)
        delta = rng.uniform(0.0, 2.0)
        return RefractedModel(CramerLundbergExp(delta + eta / alpha + rng.uniform(0.2, 5.0), eta, alpha), delta)

    c = rng.uniform(0.5, 6.0)
    return RefractedModel(BrownianRisk(c, rng.uniform(0.5, 6.0)), rng.uniform(0.0, c - 0.1))


def test_closed_form_properties_under_random_parameters():
    """Test that Parisian ruin is a probability falling in x and in r over random valid parameters."""
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        rm = _random_model(rng)
        x_low, x_high = sorted(rng.uniform(0.0, 30.0, 2))
        r_short, r_long = sorted(rng.uniform(0.2, 4.0, 2))
        base = closed_form_parisian(ParisianQuery(rm, x_low, r_short)).value
        further = closed_form_parisian(ParisianQuery(rm, x_high, r_short)).value
        longer = closed_form_parisian(ParisianQuery(rm, x_low, r_long)).value
        assert 0.0 <= base <= 1.0
        assert further <= base + 1e-9
        assert longer <= base + 1e-9
