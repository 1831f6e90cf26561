"""Energy functional: value wiring, first variation, descent directions."""
import numpy as np
import pytest
from scipy.special import ndtr

from ofc.density import DensityPair
from ofc.energy import MeasureEnergy
from ofc.errors import VanishingPositiveMassError
from ofc.field import GridSpec, ScalarField, integrate
from ofc.metrics import metrics_from_counts, smoothed_confusion, smoothed_delta

P_COUNT, N_COUNT = 1000.0, 50000.0


def toy_pair(resolution=2048):
    grid = GridSpec(bounds=((-2.0, 6.0),), resolution=resolution)
    x = grid.axes()[0]
    phi = lambda m: np.exp(-0.5 * (x - m) ** 2) / np.sqrt(2 * np.pi)
    return DensityPair(
        f_pos=ScalarField(grid, phi(3.0)),
        f_neg=ScalarField(grid, phi(1.0)),
        p_count=P_COUNT,
        n_count=N_COUNT,
    )


def threshold_field(pair, tau):
    return ScalarField(pair.grid, pair.grid.axes()[0] - tau)


def analytic_epsilon(tau, beta=1.0):
    """Misclassification ratio of the region x > tau, from Gaussian tails."""
    fn = P_COUNT * ndtr(tau - 3.0)
    tp = P_COUNT - fn
    fp = N_COUNT * ndtr(1.0 - tau)
    return (beta**2 * fn + fp) / tp


def test_energy_is_count_ratio_times_epsilon():
    pair = toy_pair(512)
    x = pair.grid.axes()[0]
    u = ScalarField(pair.grid, np.sin(1.7 * x) + 0.2 * x - 0.5)
    for beta in (0.5, 1.0, 2.0):
        energy = MeasureEnergy(pair, eps=0.05, beta=beta)
        eps_ratio = metrics_from_counts(
            smoothed_confusion(u, pair, eps=0.05), beta=beta
        ).epsilon
        assert (N_COUNT / P_COUNT) * energy.evaluate(u) == pytest.approx(
            eps_ratio, rel=1e-12
        )


def test_threshold_sweep_minimum_matches_analytic_ratio():
    pair = toy_pair()
    spacing = pair.grid.spacing[0]
    energy = MeasureEnergy(pair, eps=spacing)
    taus = np.linspace(2.8, 3.8, 201)
    e_curve = [energy.evaluate(threshold_field(pair, t)) for t in taus]
    oracle_curve = [analytic_epsilon(t) for t in taus]
    i_e, i_o = int(np.argmin(e_curve)), int(np.argmin(oracle_curve))
    assert abs(taus[i_e] - taus[i_o]) <= 0.02
    assert 3.25 <= taus[i_o] <= 3.31  # frozen location of the analytic optimum


def test_accuracy_energy_minimized_at_density_crossing():
    pair = toy_pair()
    # The minimum is shallow; a narrow step keeps the smoothing bias (linear
    # in eps via the arctan tails) below the sweep tolerance.
    energy = MeasureEnergy(pair, eps=0.001, kind="accuracy")
    taus = np.linspace(3.0, 5.0, 401)
    curve = [energy.evaluate(threshold_field(pair, t)) for t in taus]
    # Oracle: count-scaled densities cross where exp(2x - 4) == 50.
    tau_star = 2.0 + 0.5 * np.log(N_COUNT / P_COUNT)
    assert taus[int(np.argmin(curve))] == pytest.approx(tau_star, abs=0.02)
    assert tau_star == pytest.approx(3.956, abs=0.001)


@pytest.mark.parametrize("kind,beta", [("f_measure", 1.0), ("f_measure", 3.0), ("accuracy", 1.0)])
def test_gradient_matches_central_differences(kind, beta):
    pair = toy_pair(512)
    grid = pair.grid
    x = grid.axes()[0]
    eps = 1.5 * grid.spacing[0]
    energy = MeasureEnergy(pair, eps=eps, kind=kind, beta=beta)
    u = ScalarField(grid, (x - 3.2) + 0.1 * np.sin(2.0 * x))
    g = energy.gradient(u)
    band = smoothed_delta(u.values, eps)
    centers = x[band > 0.005 * band.max()]
    rng = np.random.default_rng(3)
    width = 2.0 * grid.spacing[0]
    step = 1e-5
    for c in rng.choice(centers, size=20, replace=False):
        v = np.exp(-0.5 * ((x - c) / width) ** 2)
        fd = (
            energy.evaluate(u.with_values(u.values + step * v))
            - energy.evaluate(u.with_values(u.values - step * v))
        ) / (2 * step)
        predicted = integrate(u.with_values(g.values * v))
        assert fd == pytest.approx(predicted, rel=1e-3)


def test_all_positive_field_has_unit_energy():
    # Predicting everything positive misclassifies every negative and no
    # positive: E = (k*0 + 1)/1 once the smoothing width is negligible.
    pair = toy_pair()
    energy = MeasureEnergy(pair, eps=1e-6)
    u = ScalarField(pair.grid, np.ones(pair.grid.shape))
    assert abs(energy.evaluate(u) - 1.0) <= 1e-6


def test_perfect_separation_has_zero_energy():
    grid = GridSpec(bounds=((-2.0, 6.0),), resolution=1024)
    x = grid.axes()[0]
    tri = lambda c, w: np.maximum(0.0, 1.0 - np.abs(x - c) / w) / w
    pair = DensityPair(
        f_pos=ScalarField(grid, tri(0.5, 0.5)),
        f_neg=ScalarField(grid, tri(4.5, 0.5)),
        p_count=500,
        n_count=500,
    )
    energy = MeasureEnergy(pair, eps=1e-9)
    u = ScalarField(grid, 2.0 - x)  # positive exactly over the positive support
    assert energy.evaluate(u) <= 1e-6


def test_accuracy_gradient_zero_when_count_scaled_densities_match():
    # N*f_neg == P*f_pos everywhere makes every point a fixed point of the
    # misclassification flow.
    grid = GridSpec(bounds=((-2.0, 6.0),), resolution=256)
    x = grid.axes()[0]
    phi = np.exp(-0.5 * (x - 2.0) ** 2) / np.sqrt(2 * np.pi)
    pair = DensityPair(
        f_pos=ScalarField(grid, phi),
        f_neg=ScalarField(grid, phi),
        p_count=700,
        n_count=700,
    )
    energy = MeasureEnergy(pair, eps=0.05, kind="accuracy")
    u = ScalarField(grid, np.sin(1.3 * x))
    assert np.all(energy.gradient(u).values == 0.0)


def test_gradient_vanishes_where_densities_balance():
    # The variation changes sign exactly where f_neg == (k + E) * f_pos; for
    # the two toy Gaussians that point is x = (4 - log(k + E)) / 2.
    pair = toy_pair()
    x = pair.grid.axes()[0]
    energy = MeasureEnergy(pair, eps=1.5 * pair.grid.spacing[0])
    u = threshold_field(pair, 3.23)
    g = np.abs(energy.gradient(u).values)
    x_balance = 0.5 * (4.0 - np.log(energy.k + energy.evaluate(u)))
    at_balance = g[np.argmin(np.abs(x - x_balance))]
    # the balance point falls between nodes; one spacing leaves a small rest
    assert at_balance <= 0.05 * g.max()


def test_energy_unchanged_by_reinitialization():
    # Rebuilding u as a signed distance keeps every sign, so with a narrow
    # step the classified regions -- and hence the energy -- are unchanged.
    from ofc.solver import reinitialize

    pair = toy_pair(1024)
    x = pair.grid.axes()[0]
    u = ScalarField(pair.grid, 5.0 * (x - 3.0) + 0.3 * np.sin(2.0 * x))
    energy = MeasureEnergy(pair, eps=1e-8)
    e0 = energy.evaluate(u)
    e1 = energy.evaluate(reinitialize(u))
    assert abs(e1 - e0) <= 1e-6 * abs(e0)


def test_surrogate_direction_is_scaled_gradient():
    pair = toy_pair(512)
    x = pair.grid.axes()[0]
    u = ScalarField(pair.grid, x - 3.1 + 0.05 * np.cos(3.0 * x))
    beta, eps = 2.0, 0.05
    energy = MeasureEnergy(pair, eps=eps, beta=beta)
    g_surrogate = energy.descent_direction(u, kind="G")
    # Same zero set: G equals A**2 times the variation of the energy whose
    # k is replaced by beta**2.
    reference = MeasureEnergy(pair, eps=eps, beta=beta, k=beta**2)
    h = 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(u.values / eps))
    a = integrate(u.with_values(h * pair.f_pos.values))
    np.testing.assert_allclose(
        g_surrogate.values,
        a**2 * reference.gradient(u).values,
        rtol=1e-12,
        atol=1e-15 * np.abs(g_surrogate.values).max(),
    )


@pytest.mark.parametrize("kind", ["f_measure", "accuracy"])
def test_small_step_against_gradient_lowers_energy(kind):
    pair = toy_pair(512)
    u = threshold_field(pair, 2.9)
    energy = MeasureEnergy(pair, eps=0.05, kind=kind)
    d = energy.descent_direction(u, kind="derivative")
    e0 = energy.evaluate(u)
    stepped = u.with_values(u.values - (0.01 / np.abs(d.values).max()) * d.values)
    assert energy.evaluate(stepped) < e0


def test_surrogate_step_lowers_its_own_energy():
    # "G" is a positive multiple of the variation of the k = beta**2 energy,
    # so that is the quantity it must push down.
    pair = toy_pair(512)
    u = threshold_field(pair, 2.9)
    energy = MeasureEnergy(pair, eps=0.05, beta=1.0)
    surrogate = MeasureEnergy(pair, eps=0.05, beta=1.0, k=1.0)
    d = energy.descent_direction(u, kind="G")
    stepped = u.with_values(u.values - (0.01 / np.abs(d.values).max()) * d.values)
    assert surrogate.evaluate(stepped) < surrogate.evaluate(u)


def test_stationarity_residual_smaller_near_optimum():
    pair = toy_pair()
    energy = MeasureEnergy(pair, eps=pair.grid.spacing[0])
    near = energy.stationarity_residual(threshold_field(pair, 3.28))
    far = energy.stationarity_residual(threshold_field(pair, 2.5))
    assert near < 0.05 * far


def test_stationarity_residual_band_definition():
    pair = toy_pair(512)
    energy = MeasureEnergy(pair, eps=0.05)
    u = threshold_field(pair, 3.0)
    delta = smoothed_delta(u.values, 0.05)
    mask = delta > 1e-3 * delta.max()
    expected = np.abs(energy.gradient(u).values[mask]).max()
    assert energy.stationarity_residual(u) == expected


def test_vanishing_positive_mass():
    pair = toy_pair(128)
    sunk = ScalarField(pair.grid, np.full(pair.grid.shape, -1e12))
    energy = MeasureEnergy(pair, eps=0.05)
    with pytest.raises(VanishingPositiveMassError):
        energy.evaluate(sunk)
    with pytest.raises(VanishingPositiveMassError):
        energy.gradient(sunk)
    # The accuracy energy has no ratio to blow up: a fully negative field
    # misclassifies (almost) the whole positive class and nothing else.
    acc = MeasureEnergy(pair, eps=0.05, kind="accuracy")
    assert acc.evaluate(sunk) == pytest.approx(P_COUNT, rel=2e-3)


def test_constructor_validation():
    pair = toy_pair(64)
    with pytest.raises(ValueError):
        MeasureEnergy(pair, eps=0.05, kind="gini")
    with pytest.raises(ValueError):
        MeasureEnergy(pair, eps=-0.05)
    with pytest.raises(ValueError):
        MeasureEnergy(pair, eps=0.05, beta=0.0)
    with pytest.raises(ValueError):
        MeasureEnergy(pair, eps=0.05, kind="accuracy", k=1.0)
    with pytest.raises(ValueError):
        MeasureEnergy(pair, eps=0.05, k=-2.0)
    with pytest.raises(ValueError):
        MeasureEnergy(pair, eps=0.05).descent_direction(
            threshold_field(pair, 3.0), kind="mystery"
        )
    with pytest.raises(ValueError):
        MeasureEnergy(pair, eps=0.05, kind="accuracy").descent_direction(
            threshold_field(pair, 3.0), kind="G"
        )


def test_default_k_is_squared_beta_times_class_ratio():
    pair = toy_pair(64)
    assert MeasureEnergy(pair, eps=0.05, beta=2.0).k == pytest.approx(
        4.0 * P_COUNT / N_COUNT, rel=1e-15
    )
