"""Ground-truth oracles: dynamic programs, enumeration, Monte Carlo."""

import math

import mpmath
import numpy as np
import pytest

from edgeworth.errors import (
    OracleUnavailable,
    TableTooLarge,
    TooManyValues,
    ValidationError,
)
from edgeworth.models import bundled_model, iid_model, markov_model
from edgeworth.oracle import (
    ExactDistribution,
    FunctionCdf,
    dp_pmf,
    drift,
    enum_distribution,
    erf,
    erfc,
    exact_moments,
    kolmogorov_distance,
    mc_sample,
    normal_cdf,
    normal_density,
)


def test_exact_distribution_validation():
    with pytest.raises(ValidationError):
        ExactDistribution("lattice", [0.0, 0.0], [0.5, 0.5], 1)
    with pytest.raises(ValidationError):
        ExactDistribution("lattice", [0.0, 1.0], [0.5, 0.6], 1)
    with pytest.raises(ValidationError):
        ExactDistribution("lattice", [[0.0, 1.0]], [[0.5, 0.5]], 1)


def test_exact_distribution_queries():
    d = ExactDistribution("lattice", [0.0, 1.0, 3.0], [0.25, 0.5, 0.25], 4)
    assert d.cdf(-1.0) == 0.0
    assert d.cdf(0.0) == 0.25
    assert d.cdf_left(1.0) == 0.25
    assert d.cdf(1.0) == 0.75
    assert d.tail(1.0) == 0.75
    assert d.tail(1.5) == 0.25
    assert abs(d.mean() - 1.25) <= 1e-15
    assert d.centered_moment(1.25, 0) == 1.0


def test_dp_matches_binomial():
    m = iid_model(pmf=[(0.0, 0.7), (1.0, 0.3)])
    for N in (5, 40):
        dist = dp_pmf(m, N)
        assert dist.support.tolist() == list(range(N + 1))
        for k in range(N + 1):
            want = math.comb(N, k) * 0.3**k * 0.7 ** (N - k)
            assert abs(dist.pmf[k] - want) <= 1e-14


def test_dp_mass_conservation():
    m = bundled_model("three_state_lattice")
    dist = dp_pmf(m, 500)
    assert abs(math.fsum(dist.pmf.tolist()) - 1.0) <= 1e-12


def test_dp_negative_rewards():
    m = markov_model(
        [[0.5, 0.5], [0.5, 0.5]], [[-1.0, 1.0], [1.0, -1.0]], [1.0, 0.0]
    )
    dist = dp_pmf(m, 10)
    assert dist.support.min() == -10.0 and dist.support.max() == 10.0
    assert abs(dist.mean()) <= 1e-14


def test_dp_shifted_positive_rewards():
    # rewards bounded away from zero: partial sums never reach N*min(h)
    m = markov_model([[0.5, 0.5], [0.5, 0.5]], [[1.0, 2.0], [2.0, 1.0]], [1.0, 0.0])
    dist = dp_pmf(m, 6)
    assert dist.support.min() == 6.0 and dist.support.max() == 12.0
    assert abs(math.fsum(dist.pmf.tolist()) - 1.0) <= 1e-13


def test_dp_span_half():
    m = markov_model([[0.6, 0.4], [0.3, 0.7]], [[0.5, 1.0], [1.5, 0.0]], [1.0, 0.0])
    dist = dp_pmf(m, 8)
    # every reachable atom sits on the half-integer lattice; edge atoms
    # can be unreachable, so steps are positive multiples of the span
    steps = np.diff(dist.support)
    assert np.abs(steps / 0.5 - np.rint(steps / 0.5)).max() <= 1e-12
    assert steps.min() >= 0.5 - 1e-12
    assert np.any(np.abs(steps - 0.5) <= 1e-12)


def test_dp_requires_lattice():
    with pytest.raises(OracleUnavailable):
        dp_pmf(bundled_model("diophantine_two_state"), 8)


def test_dp_table_cap():
    with pytest.raises(TableTooLarge):
        dp_pmf(bundled_model("three_state_lattice"), 10**8)


def test_enum_matches_dp_on_lattice():
    m = bundled_model("two_state")
    N = 12
    de = enum_distribution(m, N)
    dd = dp_pmf(m, N)
    assert de.support.size == dd.support.size
    # merged enum values are probability-weighted means, so tiny float
    # noise around the exact lattice points is expected
    assert np.abs(de.support - dd.support).max() <= 1e-12
    assert np.abs(de.pmf - dd.pmf).max() <= 1e-13


def test_enum_golden_support_size():
    m = bundled_model("diophantine_two_state")
    N = 10
    dist = enum_distribution(m, N)
    # path sums are a + b*phi with a + b <= N, so at most (N+1)(N+2)/2 atoms
    assert N < dist.support.size <= (N + 1) * (N + 2) // 2
    assert abs(math.fsum(dist.pmf.tolist()) - 1.0) <= 1e-12


def test_enum_cap():
    with pytest.raises(TooManyValues):
        enum_distribution(bundled_model("diophantine_two_state"), 120)


def test_exact_moments_match_dp_centered():
    for name in ("two_state", "three_state_lattice"):
        m = bundled_model(name)
        N = 30
        A = drift(m)
        dist = dp_pmf(m, N)
        jets = exact_moments(m, N, 6)
        for k in range(7):
            want = dist.centered_moment(N * A, k)
            assert abs(jets[k] - want) <= 1e-11 * max(1.0, abs(want)), (name, k)


def test_exact_moments_iid_jet_route():
    pmf = [(-1.0, 0.25), (0.0, 2.0 / 3.0), (3.0, 1.0 / 12.0)]
    chain = iid_model(pmf=pmf)
    jetm = bundled_model("iid_moments")
    N = 16
    via_chain = exact_moments(chain, N, 6)
    via_jets = exact_moments(jetm, N, 6)
    for k in range(7):
        assert abs(via_chain[k] - via_jets[k]) <= 1e-9 * max(1.0, abs(via_chain[k]))


def test_mc_deterministic_and_close_to_dp():
    m = bundled_model("two_state")
    N, trials, seed = 32, 200_000, 99
    a = mc_sample(m, N, trials, seed)
    b = mc_sample(m, N, trials, seed)
    assert np.array_equal(a.support, b.support)
    assert np.array_equal(a.pmf, b.pmf)
    assert a.meta["seed"] == seed and "prng" in a.meta
    # both are step CDFs on the same integer lattice: compare at atoms
    dd = dp_pmf(m, N)
    worst = max(abs(a.cdf(k) - dd.cdf(k)) for k in dd.support)
    assert worst <= 0.012


def test_mc_chunking_boundary():
    # trials chosen to straddle a chunk boundary
    m = bundled_model("two_state")
    dist = mc_sample(m, 4, (1 << 17) + 17, 3)
    assert abs(math.fsum(dist.pmf.tolist()) - 1.0) <= 1e-12


def test_mc_doubling_deterministic():
    m = bundled_model("doubling_ulam")
    a = mc_sample(m, 8, 4000, 11)
    b = mc_sample(m, 8, 4000, 11)
    assert np.array_equal(a.support, b.support)
    assert a.support.size > 3000  # continuous values rarely collide


def test_kolmogorov_distance_hand_case():
    d = ExactDistribution("lattice", [0.0, 1.0], [0.5, 0.5], 1)
    flat = FunctionCdf(lambda z: 0.25)
    probes = np.array([-0.5, 0.0, 0.5, 1.0, 1.5])
    # at z = 1 the step function jumps from 0.5 to 1.0 around 0.25
    assert abs(kolmogorov_distance(d, flat, probes) - 0.75) <= 1e-15


def test_kolmogorov_distance_continuous_comparator():
    # atoms at 0 and 2 against the continuous ramp F(z) = z/2 on [0, 2]:
    # just left of the second atom the step holds 0.4 while the ramp is
    # already at 1, so the sup is 0.6 and needs the left limit to see it
    d = ExactDistribution("lattice", [0.0, 2.0], [0.4, 0.6], 1)
    ramp = FunctionCdf(lambda z: min(max(z / 2.0, 0.0), 1.0))
    probes = np.array([0.0, 0.5, 1.0, 1.5, 2.0])
    assert abs(kolmogorov_distance(d, ramp, probes) - 0.6) <= 1e-15
    # without the atom probe the distance would be underestimated
    assert kolmogorov_distance(d, ramp, np.array([1.0])) <= 0.5


def test_erf_erfc_against_mpmath():
    mpmath.mp.dps = 30
    xs = np.concatenate(
        [
            np.linspace(-26.4, 26.4, 529),
            np.linspace(-0.46875, 0.46875, 101),
            np.linspace(3.9, 4.1, 41),
        ]
    )
    for x in xs:
        te = float(mpmath.erf(mpmath.mpf(float(x))))
        tc = float(mpmath.erfc(mpmath.mpf(float(x))))
        assert abs(erf(float(x)) - te) <= 1e-15 * max(1e-300, abs(te))
        assert abs(erfc(float(x)) - tc) <= 1e-15 * max(1e-300, abs(tc))


def test_erfc_underflow_cutoff():
    assert erfc(27.0) == 0.0
    assert erfc(-27.0) == 2.0


def test_erf_odd_symmetry():
    for x in (0.1, 0.47, 2.3, 8.0):
        assert erf(-x) == -erf(x)


def test_normal_cdf_density():
    assert normal_cdf(0.0) == 0.5
    assert abs(normal_cdf(1.0) - 0.8413447460685429) <= 1e-15
    sigma = 0.76
    assert normal_cdf(-12 * sigma, sigma) <= 1e-12
    assert normal_cdf(12 * sigma, sigma) >= 1.0 - 1e-12
    assert abs(normal_density(0.0, 2.0) - 1.0 / (2.0 * math.sqrt(2 * math.pi))) <= 1e-16


def test_to_csv_round_trip(tmp_path):
    d = ExactDistribution("lattice", [0.0, 1.0], [0.25, 0.75], 1)
    path = tmp_path / "dist.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        d.to_csv(fh)
    lines = path.read_text().splitlines()
    assert lines[0] == "value,pmf,cdf"
    assert float(lines[1].split(",")[1]) == 0.25
