import math

import numpy as np
import pytest

from bergman_dpp import (
    ActiveIndexSet,
    BergmanDPPError,
    BergmanSpectrum,
    DomainError,
    EnvelopeError,
    OrthogonalizationError,
    PointConfiguration,
    RejectionBudgetError,
    SampleMeta,
    SamplerConfig,
    bernoulli_phase,
    default_truncation,
    make_rng,
    min_radius_cdf,
    moduli_experiment,
    sample,
    sample_moduli,
    sample_positions,
)
from bergman_dpp.streams import PHASE_BERNOULLI, PHASE_MODULI, PHASE_SAMPLE
from bergman_dpp.verify import ks_critical_value, ks_statistic


# -----------------------------------------------------------------------------
# configuration objects
# -----------------------------------------------------------------------------
def test_config_exactly_one_mode():
    SamplerConfig(beta=2.0)
    SamplerConfig(n_eigen=5)
    with pytest.raises(DomainError):
        SamplerConfig()
    with pytest.raises(DomainError):
        SamplerConfig(beta=2.0, n_eigen=5)
    with pytest.raises(DomainError):
        SamplerConfig(beta=-1.0)
    with pytest.raises(DomainError):
        SamplerConfig(n_eigen=0)
    with pytest.raises(DomainError):
        SamplerConfig(beta=1.0, seed=-1)
    with pytest.raises(DomainError):
        SamplerConfig(beta=1.0, max_rejections=0)


def test_default_truncation(disc09):
    # ceil(beta * trace); trace(disc(0.9)) = 4.2631..
    assert default_truncation(disc09, 5.0) == 22
    assert default_truncation(disc09, 2.0) == 9
    assert default_truncation(BergmanSpectrum.disc(0.1), 0.1) == 1
    assert SamplerConfig(beta=5.0).resolve_truncation(disc09) == 22
    assert SamplerConfig(n_eigen=7).resolve_truncation(disc09) == 7


def test_active_index_set_validation():
    ActiveIndexSet(indices=(0, 3, 7), n_eigen=8)
    ActiveIndexSet(indices=(), n_eigen=0)
    with pytest.raises(DomainError):
        ActiveIndexSet(indices=(3, 3), n_eigen=8)
    with pytest.raises(DomainError):
        ActiveIndexSet(indices=(5, 2), n_eigen=8)
    with pytest.raises(DomainError):
        ActiveIndexSet(indices=(8,), n_eigen=8)
    with pytest.raises(DomainError):
        ActiveIndexSet(indices=(-1,), n_eigen=8)


def test_point_configuration_roundtrip(disc09):
    conf = sample(disc09, SamplerConfig(n_eigen=9, seed=11))
    back = PointConfiguration.from_dict(conf.to_dict())
    assert back.points == conf.points
    assert back.meta == conf.meta
    mods = conf.moduli()
    assert np.all(np.diff(mods) >= 0.0)
    assert len(mods) == len(conf)


def test_sample_meta_fields(disc09):
    conf = sample(disc09, SamplerConfig(n_eigen=9, seed=11), replica=3)
    m = conf.meta
    assert m.seed == 11 and m.replica == 3
    assert m.region == "disc:0.9"
    assert m.n_eigen == 9
    assert len(m.rejections) == len(conf.points)
    assert m.proposals >= len(conf.points)
    if m.proposals:
        assert 0.0 < m.acceptance_rate <= 1.0
    assert SampleMeta.from_dict(m.to_dict()) == m


# -----------------------------------------------------------------------------
# Bernoulli phase
# -----------------------------------------------------------------------------
def test_bernoulli_phase_marginals(disc09):
    # per-index hit frequency matches the eigenvalue within 5 sigma
    n_eigen, reps = 9, 40_000
    lam = disc09.eigenvalues(n_eigen)
    hits = np.zeros(n_eigen)
    for r in range(reps):
        rng = make_rng(5, r, PHASE_BERNOULLI)
        for i in bernoulli_phase(disc09, n_eigen, rng).indices:
            hits[i] += 1
    freq = hits / reps
    sigma = np.sqrt(lam * (1.0 - lam) / reps)
    assert np.all(np.abs(freq - lam) <= 5.0 * sigma + 1e-12)


def test_bernoulli_phase_validation(disc09):
    rng = make_rng(0)
    with pytest.raises(DomainError):
        bernoulli_phase(disc09, 0, rng)

    class BadSpectrum:
        def eigenvalues(self, n):
            return np.full(n, 1.5)

    with pytest.raises(DomainError):
        bernoulli_phase(BadSpectrum(), 4, rng)


def test_bernoulli_phase_deterministic(disc09):
    a = bernoulli_phase(disc09, 22, make_rng(3, 0, PHASE_BERNOULLI))
    b = bernoulli_phase(disc09, 22, make_rng(3, 0, PHASE_BERNOULLI))
    assert a == b


# -----------------------------------------------------------------------------
# positional phase
# -----------------------------------------------------------------------------
def test_positions_inside_region(annulus59):
    active = ActiveIndexSet(indices=(0, 1, 2, 5), n_eigen=8)
    conf = sample_positions(annulus59, active, make_rng(2))
    assert len(conf) == 4
    for z in conf.points:
        assert annulus59.region.contains_point(z)


def test_positions_empty_active(disc09):
    conf = sample_positions(disc09, ActiveIndexSet(indices=(), n_eigen=5), make_rng(0))
    assert conf.points == ()
    assert conf.meta.proposals == 0


def test_positions_deterministic_replay(disc09):
    active = ActiveIndexSet(indices=(0, 2, 3), n_eigen=5)
    a = sample_positions(disc09, active, make_rng(9))
    b = sample_positions(disc09, active, make_rng(9))
    assert a.points == b.points
    assert a.meta == b.meta


def test_single_index_radial_law(disc08):
    # index n: radial CDF (r/R)^{2n+2}; KS gate at alpha = 1e-3
    reps = 3000
    for n, power in ((0, 2.0), (3, 8.0)):
        active = ActiveIndexSet(indices=(n,), n_eigen=n + 1)
        radii = np.empty(reps)
        for r in range(reps):
            rng = make_rng(17, r, PHASE_SAMPLE)
            radii[r] = abs(sample_positions(disc08, active, rng).points[0])
        stat = ks_statistic(radii, lambda x: (x / 0.8) ** power)
        assert stat < ks_critical_value(reps, 1e-3)


def test_angle_uniformity(disc08):
    # angles of the first point over replicas are uniform on (-pi, pi]
    reps = 3000
    active = ActiveIndexSet(indices=(1,), n_eigen=2)
    angles = np.empty(reps)
    for r in range(reps):
        rng = make_rng(23, r, PHASE_SAMPLE)
        angles[r] = np.angle(sample_positions(disc08, active, rng).points[0])
    stat = ks_statistic(angles, lambda t: (t + math.pi) / (2.0 * math.pi))
    assert stat < ks_critical_value(reps, 1e-3)


def test_rejection_budget_error(disc09):
    # acceptance rate ~ 1/101 for the lone index 100; one chunk of 8 exhausts it
    active = ActiveIndexSet(indices=(100,), n_eigen=101)
    with pytest.raises(RejectionBudgetError):
        sample_positions(disc09, active, make_rng(0), max_rejections=8)


def test_positions_type_guards(disc09):
    with pytest.raises(DomainError):
        sample_positions("nope", ActiveIndexSet(indices=(), n_eigen=0), make_rng(0))
    with pytest.raises(DomainError):
        sample_positions(disc09, (0, 1), make_rng(0))


def test_points_pairwise_distinct(disc09):
    conf = sample(disc09, SamplerConfig(n_eigen=22, seed=1))
    pts = conf.points
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            assert pts[i] != pts[j]


# -----------------------------------------------------------------------------
# full pipeline
# -----------------------------------------------------------------------------
def test_sample_replay_byte_identical(disc09):
    cfg = SamplerConfig(beta=5.0, seed=42)
    a = sample(disc09, cfg, replica=0)
    b = sample(disc09, cfg, replica=0)
    assert a.points == b.points and a.meta == b.meta


def test_sample_replicas_differ(disc09):
    cfg = SamplerConfig(beta=5.0, seed=42)
    a = sample(disc09, cfg, replica=0)
    b = sample(disc09, cfg, replica=1)
    assert a.meta.active_indices != b.meta.active_indices or a.points != b.points


def test_sample_count_matches_active(disc09):
    cfg = SamplerConfig(n_eigen=22, seed=8)
    conf = sample(disc09, cfg)
    assert len(conf.points) == len(conf.meta.active_indices)


def test_error_taxonomy():
    # every sampler failure is catchable through the shared base class
    for exc in (DomainError, RejectionBudgetError, OrthogonalizationError, EnvelopeError):
        assert issubclass(exc, BergmanDPPError)
    assert issubclass(RejectionBudgetError, RuntimeError)
    assert issubclass(DomainError, ValueError)


# -----------------------------------------------------------------------------
# moduli draws
# -----------------------------------------------------------------------------
def test_sample_moduli_shape_and_range():
    vals = sample_moduli(6, make_rng(0, 0, PHASE_MODULI))
    assert vals.shape == (6,)
    assert np.all((0.0 <= vals) & (vals <= 1.0))
    with pytest.raises(DomainError):
        sample_moduli(0, make_rng(0))


def test_sample_moduli_coordinate_laws():
    # coordinate k has CDF x^{2k}; check k = 1 and k = 3
    reps = 20_000
    rng = make_rng(31, 0, PHASE_MODULI)
    draws = np.array([sample_moduli(3, rng) for _ in range(reps)])
    assert ks_statistic(draws[:, 0], lambda x: x**2) < ks_critical_value(reps, 1e-3)
    assert ks_statistic(draws[:, 2], lambda x: x**6) < ks_critical_value(reps, 1e-3)


def test_min_radius_cdf_base_cases():
    assert min_radius_cdf(1, 0.5) == pytest.approx(0.25, abs=1e-15)
    assert min_radius_cdf(3, 0.0) == 0.0
    assert min_radius_cdf(3, -1.0) == 0.0
    assert min_radius_cdf(3, 1.0) == 1.0
    assert min_radius_cdf(3, 2.0) == 1.0
    with pytest.raises(DomainError):
        min_radius_cdf(0, 0.5)
    with pytest.raises(DomainError):
        min_radius_cdf(2, float("nan"))


def test_min_radius_cdf_product_formula():
    for n, x in [(2, 0.3), (5, 0.7), (20, 0.9)]:
        direct = 1.0 - np.prod([1.0 - x ** (2 * k) for k in range(1, n + 1)])
        assert min_radius_cdf(n, x) == pytest.approx(direct, rel=1e-13)


def test_min_radius_cdf_small_x_ratio():
    # cdf(n, x) = x^2 (1 + x^2 + O(x^4)): the ratio to x^2 sits in [1, 1 + 10 x^2]
    for x in (0.01, 0.05, 0.1):
        ratio = min_radius_cdf(20, x) / (x * x)
        assert 1.0 <= ratio <= 1.0 + 10.0 * x * x


def test_min_radius_cdf_monotone():
    xs = np.linspace(0.01, 0.99, 40)
    vals = [min_radius_cdf(4, x) for x in xs]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    # more points can only shrink the minimum
    assert min_radius_cdf(8, 0.5) >= min_radius_cdf(4, 0.5)


def test_min_law_against_sampler():
    reps = 20_000
    rng = make_rng(7, 0, PHASE_MODULI)
    mins = np.array([sample_moduli(20, rng).min() for _ in range(reps)])
    stat = ks_statistic(mins, lambda x: min_radius_cdf(20, x))
    assert stat < ks_critical_value(reps, 1e-3)


# -----------------------------------------------------------------------------
# moduli comparison experiment
# -----------------------------------------------------------------------------
def test_moduli_experiment_smoke():
    rep = moduli_experiment(0.9, SamplerConfig(n_eigen=9, seed=2), reps=200)
    assert rep.reps == 200
    assert 0 < rep.runs_with_points <= 200
    assert rep.ks_min_literal is not None and 0.0 <= rep.ks_min_literal <= 1.0
    assert rep.ks_min_capped is not None and 0.0 <= rep.ks_min_capped <= 1.0
    d = rep.to_dict()
    assert d["exploratory"] is True
    assert d["order_quantiles"]["probs"] == [0.1, 0.25, 0.5, 0.75, 0.9]
    ranks = d["order_quantiles"]["ranks"]
    assert 0 in ranks
    row = ranks[0]
    assert len(row["dpp"]) == 5 and row["runs"] == rep.runs_with_points
    # quantile rows are nondecreasing
    for key in ("dpp", "literal", "capped"):
        assert all(a <= b for a, b in zip(row[key], row[key][1:]))


def test_moduli_experiment_deterministic():
    a = moduli_experiment(0.9, SamplerConfig(n_eigen=9, seed=2), reps=60)
    b = moduli_experiment(0.9, SamplerConfig(n_eigen=9, seed=2), reps=60)
    assert a == b
    c = moduli_experiment(0.9, SamplerConfig(n_eigen=9, seed=3), reps=60)
    assert a != c


def test_moduli_experiment_validation():
    with pytest.raises(DomainError):
        moduli_experiment(0.9, SamplerConfig(n_eigen=9), reps=0)


# -----------------------------------------------------------------------------
# stream separation
# -----------------------------------------------------------------------------
def test_streams_distinct_phases():
    a = make_rng(5, 0, PHASE_SAMPLE).random(4)
    b = make_rng(5, 0, PHASE_BERNOULLI).random(4)
    c = make_rng(5, 0, PHASE_MODULI).random(4)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(b, c)


def test_streams_distinct_replicas():
    a = make_rng(5, 0, PHASE_SAMPLE).random(4)
    b = make_rng(5, 1, PHASE_SAMPLE).random(4)
    assert not np.array_equal(a, b)


def test_streams_validation():
    with pytest.raises(DomainError):
        make_rng(-1)
    with pytest.raises(DomainError):
        make_rng(0, -1)
    with pytest.raises(DomainError):
        make_rng(0, 1 << 56)
    with pytest.raises(DomainError):
        make_rng(0, 0, 256)
