"""Model constructors: validation, lattice detection, discretization."""

import math
import warnings

import numpy as np
import pytest

from edgeworth.errors import (
    InconsistentDimensions,
    InsufficientMoments,
    NonStochasticModel,
    SlopeBelowOne,
    ValidationError,
)
from edgeworth.models import (
    BUNDLED_MODELS,
    bundled_model,
    diophantine_scan,
    iid_model,
    markov_model,
    pmf_moments,
    ulam_model,
)
from edgeworth.spectral import perron_base

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def test_lattice_span_integers():
    m = bundled_model("two_state")
    assert m.lattice_span == 1.0


def test_lattice_span_halves():
    m = markov_model(
        [[0.6, 0.4], [0.3, 0.7]], [[0.5, 1.0], [1.5, 0.0]], [1.0, 0.0]
    )
    assert m.lattice_span == 0.5


def test_lattice_span_thirds_with_offset():
    m = markov_model(
        [[0.6, 0.4], [0.3, 0.7]], [[1.0 / 3.0, 1.0], [2.0 / 3.0, 2.0]], [0.5, 0.5]
    )
    assert m.lattice_span is not None
    assert abs(m.lattice_span - 1.0 / 3.0) <= 1e-12


def test_golden_ratio_is_not_lattice():
    m = bundled_model("diophantine_two_state")
    assert m.lattice_span is None


def test_fibonacci_ratio_is_lattice():
    # 34/21 is close to the golden ratio but still rational
    m = markov_model(
        [[0.7, 0.3], [0.4, 0.6]], [[1.0, 0.0], [34.0 / 21.0, 0.0]], [1.0, 0.0]
    )
    assert m.lattice_span is not None
    assert abs(m.lattice_span - 1.0 / 21.0) <= 1e-12


def test_markov_model_validation():
    with pytest.raises(InconsistentDimensions):
        markov_model([[1.0]], [[0.0, 1.0]], [1.0])
    with pytest.raises(InconsistentDimensions):
        markov_model([[0.5, 0.5], [0.5, 0.5]], [[1.0, 0.0], [0.0, 1.0]], [1.0])
    with pytest.raises(NonStochasticModel):
        markov_model([[0.5, 0.4], [0.5, 0.5]], [[1, 0], [0, 1]], [1, 0])
    with pytest.raises(NonStochasticModel):
        markov_model([[0.5, 0.5], [0.5, 0.5]], [[1, 0], [0, 1]], [0.5, 0.6])


def test_iid_pmf_embedding_matches_moment_family():
    # pmf route and moment route must give identical entry jets
    pmf = [(-1.0, 0.25), (0.0, 2.0 / 3.0), (3.0, 1.0 / 12.0)]
    chain = iid_model(pmf=pmf)
    jetm = iid_model(moments=pmf_moments(pmf, 8))
    fam_c = chain.operator_family(6)
    fam_m = jetm.operator_family(6)
    # sum over the first row of the embedding equals the scalar family
    row_sum = fam_c.coeffs[0].sum(axis=0)
    assert np.abs(row_sum - fam_m.coeffs[0, 0]).max() <= 1e-12


def test_iid_validation():
    with pytest.raises(ValidationError):
        iid_model()
    with pytest.raises(ValidationError):
        iid_model(pmf=[(0.0, 0.6), (1.0, 0.6)])
    with pytest.raises(InsufficientMoments):
        iid_model(moments=[0.0])
    # an impossible moment sequence fails the Hankel test
    with pytest.raises(ValidationError):
        iid_model(moments=[0.0, 1.0, 0.0, 0.5])


def test_pmf_moments_exact():
    assert pmf_moments([(0.0, 0.5), (1.0, 0.5)], 3) == [0.5, 0.5, 0.5]


def test_ulam_doubling_rows_stochastic():
    m = bundled_model("doubling_ulam")
    assert m.dim == 1024
    assert np.abs(m.transition.sum(axis=1) - 1.0).max() <= 1e-12
    assert m.lattice_span is None
    # Lebesgue measure is invariant for the doubling map
    base = perron_base(m.transition)
    assert np.abs(base.left - 1.0 / 1024).max() <= 1e-9


def test_ulam_small_cell_count_variance():
    # doubling map with g = cos(2 pi x) has asymptotic variance 1/2
    from edgeworth.expansion import expansion_for_model

    m = ulam_model(map_kind="doubling", g=lambda x: np.cos(2 * np.pi * x), cells=256)
    exp_set = expansion_for_model(m, 1)
    assert abs(exp_set.params.A) <= 1e-10
    assert abs(exp_set.params.sigma2 - 0.5) <= 1e-6


def test_ulam_rejects_slope_below_one():
    # a single branch over [0, 1] is the identity map, slope exactly 1
    with pytest.raises(SlopeBelowOne):
        ulam_model(
            map_kind="piecewise-linear",
            g=lambda x: x,
            cells=16,
            endpoints=[0.0, 1.0],
        )


def test_diophantine_scan_golden():
    h = np.array([[1.0, 0.0], [GOLDEN, 0.0]])
    grid = np.arange(0.5, 60.0, 0.25)
    scan = diophantine_scan(h, grid)
    assert scan.d.min() > 0.05
    assert scan.K > 0 and scan.beta >= 0
    # golden-ratio rewards admit a near-optimal Diophantine exponent
    assert scan.beta < 2.0


def test_diophantine_scan_integer_sawtooth():
    # entries in {0, 1}: the only nonzero reward difference is -1, so
    # d(s) is the sawtooth frac(-s) = 1 - frac(s), with d(0.5) = 0.5
    h = np.array([[1.0, 0.0], [1.0, 0.0]])
    scan = diophantine_scan(h, [0.25, 0.5, 0.75])
    assert abs(scan.d[0] - 0.75) <= 1e-12
    assert abs(scan.d[1] - 0.5) <= 1e-12
    assert abs(scan.d[2] - 0.25) <= 1e-12


def test_diophantine_scan_resonant_constant_observable():
    # all rewards equal: every difference vanishes, d(s) = 0 identically
    h = np.full((2, 2), 1.3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        scan = diophantine_scan(h, [math.pi, 2 * math.pi])
        assert scan.K == 0.0 and scan.beta == 0.0
        assert np.all(scan.d == 0.0)
    assert any("resonant" in str(w.message) for w in caught)


def test_bundled_model_names():
    assert set(BUNDLED_MODELS) == {
        "two_state",
        "three_state_lattice",
        "diophantine_two_state",
        "bernoulli",
        "iid_moments",
        "doubling_ulam",
    }
    with pytest.raises(ValidationError):
        bundled_model("unknown")
