"""Numeric evaluation of expansions and convergence studies.

Turns an :class:`~edgeworth.expansion.ExpansionSet` into concrete
numbers: CDF and lattice-pmf approximations, the weak (global, local,
averaged) functional forms, local-limit and moderate-deviation
estimates, and ladder studies comparing everything against the exact
oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OracleUnavailable, QuadratureNotConverged, TooManyValues, ValidationError
from . import oracle

_QUAD_TOL = 1e-10
_QUAD_MAX_POINTS = 2 ** 20


def simpson_integral(fn, a, b, tol=_QUAD_TOL, max_points=_QUAD_MAX_POINTS):
    """Composite Simpson integral with interval halving.

    Parameters
    ----------
    fn : callable
        Vectorized integrand.
    a, b : float
        Integration bounds.
    tol : float
        Absolute tolerance on the difference of successive refinements.
    max_points : int
        Point budget.

    Raises
    ------
    QuadratureNotConverged
        If the budget is reached before two refinements agree.
    """
    if b <= a:
        return 0.0
    n = 8
    prev = None
    while n <= max_points:
        x = np.linspace(a, b, n + 1)
        y = np.asarray(fn(x), dtype=float)
        step = (b - a) / n
        val = (step / 3.0) * (
            y[0] + y[-1] + 4.0 * math.fsum(y[1::2].tolist()) + 2.0 * math.fsum(y[2:-1:2].tolist())
        )
        if prev is not None and abs(val - prev) <= tol:
            return val
        prev = val
        n *= 2
    raise QuadratureNotConverged(
        f"Simpson refinement hit {max_points} points without reaching {tol:.0e}"
    )


@dataclass(frozen=True)
class TestFunction:
    """Smooth integrable probe function.

    kind : "gaussian-bump", "compact-bump" or "hermite-damped"
        gaussian-bump: exp(-(x-c)^2 / 2w^2); compact-bump: the standard
        mollifier scaled to [c-w, c+w]; hermite-damped:
        He_m((x-c)/w) exp(-(x-c)^2 / 2w^2).
    center, width : float
    degree : int
        Hermite degree for "hermite-damped".
    """

    kind: str
    center: float = 0.0
    width: float = 1.0
    degree: int = 0

    # not a pytest class despite the name
    __test__ = False

    def __post_init__(self):
        if self.kind not in ("gaussian-bump", "compact-bump", "hermite-damped"):
            raise ValidationError(f"unknown test-function kind {self.kind!r}")
        if self.width <= 0:
            raise ValidationError("width must be positive")

    @property
    def smoothness(self):
        """Differentiability class; all bundled kinds are C-infinity."""
        return math.inf

    def __call__(self, x):
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        if self.kind == "gaussian-bump":
            return np.exp(-0.5 * u * u)
        if self.kind == "compact-bump":
            out = np.zeros_like(u)
            inside = np.abs(u) < 1.0
            ui = u[inside]
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui * ui))
            return out
        he = np.polynomial.hermite_e.HermiteE.basis(self.degree)(u)
        return he * np.exp(-0.5 * u * u)

    def support(self):
        """Interval outside which the function is negligible (or zero)."""
        if self.kind == "compact-bump":
            return (self.center - self.width, self.center + self.width)
        pad = 16.0 + 2.0 * self.degree
        return (self.center - pad * self.width, self.center + pad * self.width)

    def integral(self):
        """Closed-form total integral where available, else quadrature."""
        if self.kind == "gaussian-bump":
            return self.width * math.sqrt(2.0 * math.pi)
        if self.kind == "hermite-damped":
            return self.width * math.sqrt(2.0 * math.pi) if self.degree == 0 else 0.0
        lo, hi = self.support()
        return simpson_integral(self, lo, hi)

    def fourier(self, t):
        """Fourier transform integral f(x) exp(-i t x) dx where closed-form."""
        if self.kind == "gaussian-bump":
            w = self.width
            return (
                w
                * math.sqrt(2.0 * math.pi)
                * np.exp(-0.5 * (w * t) ** 2)
                * np.exp(-1j * t * self.center)
            )
        return None

    def tail_integral(self, a):
        """Integral of f over [a, infinity), closed-form where available."""
        if self.kind == "gaussian-bump":
            w = self.width
            return (
                w
                * math.sqrt(2.0 * math.pi)
                * (1.0 - oracle.normal_cdf((a - self.center) / w))
            )
        lo, hi = self.support()
        if a >= hi:
            return 0.0
        return simpson_integral(self, max(a, lo), hi)


def _density(exp_set, z):
    s2 = exp_set.params.sigma2
    return np.exp(-0.5 * np.asarray(z) ** 2 / s2) / math.sqrt(2.0 * math.pi * s2)


def _order(exp_set, r):
    if r is None:
        return exp_set.r
    if r < 0 or r > exp_set.r:
        raise ValidationError(f"order {r} outside the built range 0..{exp_set.r}")
    return r


def edgeworth_cdf(exp_set, N, z, r=None):
    """CDF approximation  Phi_sigma(z) + sum_p P_p(z) N^(-p/2) dens(z).

    Parameters
    ----------
    exp_set : ExpansionSet
    N : int
        Horizon, at least 1.
    z : float
        Standardized argument (the law of (S_N - N A) / sqrt(N)).
    r : int, optional
        Truncation order, defaulting to the built order.
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    r = _order(exp_set, r)
    sigma = exp_set.params.sigma
    val = oracle.normal_cdf(z, sigma)
    dens = float(_density(exp_set, z))
    for p in range(1, r + 1):
        val += exp_set.P(p)(z) * N ** (-p / 2.0) * dens
    return float(val)


def cdf_callable(exp_set, N, r=None):
    """The CDF approximation wrapped for distance computations."""
    return oracle.FunctionCdf(lambda z: edgeworth_cdf(exp_set, N, z, r))


def lattice_pmf(exp_set, N, k, span=1.0, r=None):
    """Pmf approximation  (span/sqrt(N)) dens(kappa) sum_p R_p(kappa) N^(-p/2).

    ``k`` is the actual sum value (a multiple of the span);
    ``kappa = (k - N A)/sqrt(N)``.  Accepts arrays of ``k``.
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    r = _order(exp_set, r)
    k = np.asarray(k, dtype=float)
    kappa = (k - N * exp_set.params.A) / math.sqrt(N)
    total = np.zeros_like(kappa)
    for p in range(r + 1):
        total += exp_set.R(p)(kappa) * N ** (-p / 2.0)
    out = span / math.sqrt(N) * _density(exp_set, kappa) * total
    return out if out.ndim else float(out)


def weak_global(exp_set, f, N, r=None):
    """Estimate of E f(S_N - N A) for integrable f.

    Evaluates  sum_p N^(-p/2) integral R_p(z) dens(z) f(z sqrt(N)) dz
    by adaptive Simpson quadrature on the overlap of the Gaussian window
    and the support of f.
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    r = _order(exp_set, r)
    sigma = exp_set.params.sigma
    rootn = math.sqrt(N)
    flo, fhi = f.support()
    lo = max(-12.0 * sigma, flo / rootn)
    hi = min(12.0 * sigma, fhi / rootn)
    total = 0.0
    for p in range(r + 1):
        poly = exp_set.R(p)

        def integrand(z, poly=poly):
            return poly(z) * _density(exp_set, z) * f(z * rootn)

        total += N ** (-p / 2.0) * simpson_integral(integrand, lo, hi)
    return total


def weak_local(exp_set, f, N, r=None):
    """Estimate of sqrt(N) E f(S_N - N A) for integrable f.

    Evaluates  (1/2pi) sum_p N^(-p) integral P_{p,l}(z) f(z) dz  over
    the support of f.
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    r = _order(exp_set, r)
    lo, hi = f.support()
    total = 0.0
    for p in range(r // 2 + 1):
        poly = exp_set.weak_local(p)

        def integrand(z, poly=poly):
            return poly(z) * f(z)

        total += N ** (-float(p)) * simpson_integral(integrand, lo, hi)
    return total / (2.0 * math.pi)


def averaged(exp_set, f, N, x, r=None):
    """Estimate of integral [F_N - Normal](x + y/sqrt(N)) f(y) dy.

    Evaluates  sum_p N^(-p/2) integral P_p(x + y/sqrt(N))
    dens(x + y/sqrt(N)) f(y) dy  over the support of f.
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    r = _order(exp_set, r)
    rootn = math.sqrt(N)
    lo, hi = f.support()
    total = 0.0
    for p in range(1, r + 1):
        poly = exp_set.P(p)

        def integrand(y, poly=poly):
            z = x + y / rootn
            return poly(z) * _density(exp_set, z) * f(y)

        total += N ** (-p / 2.0) * simpson_integral(integrand, lo, hi)
    return total


def lclt_estimate(exp_set, u, N):
    """Local-limit density value  (1/sqrt(2 pi sigma2 N)) ... at offset u.

    Returns (1/sqrt(2 pi sigma2)) exp(-u^2 / (2 N sigma2)), the local
    limit prediction for sqrt(N) P(S_N = nearest lattice point to NA+u).
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    s2 = exp_set.params.sigma2
    return math.exp(-0.5 * u * u / (N * s2)) / math.sqrt(2.0 * math.pi * s2)


def lclt_window(exp_set, u, N, eps):
    """Window-probability prediction  2 eps dens / sqrt(N)."""
    if eps <= 0:
        raise ValidationError("eps must be positive")
    return 2.0 * eps * lclt_estimate(exp_set, u, N) / math.sqrt(N)


@dataclass(frozen=True)
class ModDevResult:
    """Moderate-deviation comparison at the edge of the valid regime."""

    x: float
    ratio: float
    exact_tail: float
    normal_tail: float
    corollary_tail: float


def moddev_ratio(exp_set, model, c, N):
    """Exact-vs-normal tail ratio at x = sqrt(c sigma2 ln N).

    The exact tail P((S_N - N A)/sqrt(N) >= x) comes from the lattice
    dynamic program (or enumeration for non-lattice models); the normal
    tail is 1 - Phi_sigma(x).  Also reports the closed-form prediction
    (1/sqrt(2 pi c)) / sqrt(N^c ln N) for the tail itself.  The probe
    x is clamped below at 1, the lower end of the validity window.

    Raises
    ------
    OracleUnavailable
        When no exact oracle is feasible (non-lattice with large N).
    """
    if not 0.0 < c:
        raise ValidationError("c must be positive")
    if N < 2:
        raise ValidationError("N must be at least 2")
    params = exp_set.params
    x = max(1.0, math.sqrt(c * params.sigma2 * math.log(N)))
    if getattr(model, "lattice_span", None) is not None:
        dist = oracle.dp_pmf(model, N)
    else:
        try:
            dist = oracle.enum_distribution(model, N)
        except TooManyValues as exc:
            raise OracleUnavailable(
                f"non-lattice tail at N={N} needs enumeration beyond budget"
            ) from exc
    threshold = N * params.A + x * math.sqrt(N)
    exact_tail = dist.tail(threshold)
    normal_tail = 1.0 - oracle.normal_cdf(x, params.sigma)
    corollary = 1.0 / (math.sqrt(2.0 * math.pi * c) * math.sqrt(N ** c * math.log(N)))
    ratio = exact_tail / normal_tail if normal_tail > 0 else math.inf
    return ModDevResult(x, ratio, exact_tail, normal_tail, corollary)


@dataclass(frozen=True)
class ConvergenceReport:
    """Error ladder for one expansion form over a horizon list."""

    form: str
    oracle_kind: str
    r: int
    N_list: list
    raw: list
    scaled: list = field(default_factory=list)
    decreasing: bool = False

    def rows(self):
        """(N, raw_error, scaled_error) rows for CSV emission."""
        return list(zip(self.N_list, self.raw, self.scaled))


def _model_key(model):
    parts = [model.transition.tobytes(), model.observable.tobytes(), model.mu0.tobytes()]
    return b"".join(parts)


_dist_cache = {}


def exact_distribution(model, N, oracle_kind, seed=0, trials=10 ** 5, cache=None):
    """Oracle distribution of S_N, memoized per (model, oracle, N)."""
    store = _dist_cache if cache is None else cache
    key = (_model_key(model), oracle_kind, N, seed if oracle_kind == "mc" else None,
           trials if oracle_kind == "mc" else None)
    if key not in store:
        if oracle_kind == "dp":
            store[key] = oracle.dp_pmf(model, N)
        elif oracle_kind == "enum":
            store[key] = oracle.enum_distribution(model, N)
        elif oracle_kind == "mc":
            store[key] = oracle.mc_sample(model, N, trials, seed)
        else:
            raise ValidationError(f"unknown oracle kind {oracle_kind!r}")
    return store[key]


def _standardize(dist, shift, scale):
    support = (dist.support - shift) / scale
    return oracle.ExactDistribution(dist.kind, support, dist.pmf, dist.N, dist.meta)


def _classical_error(exp_set, model, dist, N, r):
    params = exp_set.params
    std = _standardize(dist, N * params.A, math.sqrt(N))
    atoms = std.support
    if atoms.size > 20000:
        atoms = atoms[:: atoms.size // 20000 + 1]
    sigma = params.sigma
    probes = np.union1d(atoms, np.linspace(-12.0 * sigma, 12.0 * sigma, 2001))
    return oracle.kolmogorov_distance(std, cdf_callable(exp_set, N, r), probes)


def _lattice_error(exp_set, model, dist, N, r):
    span = model.lattice_span
    params = exp_set.params
    sigma = params.sigma
    lo = min(dist.support.min(), N * params.A - 13.0 * sigma * math.sqrt(N))
    hi = max(dist.support.max(), N * params.A + 13.0 * sigma * math.sqrt(N))
    ks = span * np.arange(math.floor(lo / span), math.ceil(hi / span) + 1)
    exact = np.zeros(ks.size)
    idx = np.searchsorted(dist.support, ks)
    idx = np.clip(idx, 0, dist.support.size - 1)
    hit = np.abs(dist.support[idx] - ks) < 0.5 * span
    exact[hit] = dist.pmf[idx[hit]]
    approx = lattice_pmf(exp_set, N, ks, span=span, r=r)
    return float(np.max(np.abs(exact - approx))) * math.sqrt(N)


def _weak_local_error(exp_set, model, dist, N, r, f):
    params = exp_set.params
    offsets = dist.support - N * params.A
    exact = math.sqrt(N) * math.fsum((f(offsets) * dist.pmf).tolist())
    return abs(exact - weak_local(exp_set, f, N, r))


def _weak_global_error(exp_set, model, dist, N, r, f):
    params = exp_set.params
    offsets = dist.support - N * params.A
    exact = math.fsum((f(offsets) * dist.pmf).tolist())
    return abs(exact - weak_global(exp_set, f, N, r))


def _averaged_error(exp_set, model, dist, N, r, f, x):
    params = exp_set.params
    rootn = math.sqrt(N)
    # integral F_N(x + y/rootn) f(y) dy  ==  sum_k pmf_k * tail integral
    # of f over [rootn(kappa_k - x), inf), kappa_k the standardized atom
    kappa = (dist.support - N * params.A) / rootn
    exact_f = math.fsum(
        (dist.pmf * np.array([f.tail_integral(rootn * (kk - x)) for kk in kappa])).tolist()
    )
    sigma = params.sigma

    def gauss_part(y):
        z = x + y / rootn
        return np.array([oracle.normal_cdf(zz, sigma) for zz in np.atleast_1d(z)]) * f(y)

    lo, hi = f.support()
    gauss = simpson_integral(gauss_part, lo, hi)
    return abs((exact_f - gauss) - averaged(exp_set, f, N, x, r))


def convergence_study(
    exp_set,
    model,
    oracle_kind,
    r,
    N_list,
    form="classical",
    f=None,
    x=None,
    seed=0,
    trials=10 ** 5,
    cache=None,
):
    """Error ladder e_r(N) with the N^(r/2)-scaled column and verdict.

    Parameters
    ----------
    exp_set : ExpansionSet
        Built at order >= r.
    model : model object
        Needed for oracle runs and lattice span.
    oracle_kind : str
        "dp", "enum" or "mc".
    r : int
        Order whose error is measured.
    N_list : sequence of int
        Strictly increasing horizons.
    form : str
        "classical", "lattice", "weak_local", "weak_global" or "averaged".
    f : TestFunction, optional
        Required for weak_local and weak_global.  The averaged form
        defaults to a unit Gaussian bump.
    x : float, optional
        Center for the averaged form.  None probes x in
        {0, +-sigma, +-2sigma} and reports the worst error per N.
    """
    N_list = [int(n) for n in N_list]
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValidationError("N_list must be strictly increasing")
    if form == "averaged" and f is None:
        f = TestFunction("gaussian-bump", 0.0, 1.0)
    if form in ("weak_local", "weak_global") and f is None:
        raise ValidationError(f"form {form!r} needs a test function")
    sigma = exp_set.params.sigma
    if x is None:
        probes_x = [m * sigma for m in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    else:
        probes_x = [float(x)]
    raw = []
    for N in N_list:
        dist = exact_distribution(model, N, oracle_kind, seed, trials, cache)
        if form == "classical":
            err = _classical_error(exp_set, model, dist, N, r)
        elif form == "lattice":
            err = _lattice_error(exp_set, model, dist, N, r)
        elif form == "weak_local":
            err = _weak_local_error(exp_set, model, dist, N, r, f)
        elif form == "weak_global":
            err = _weak_global_error(exp_set, model, dist, N, r, f)
        elif form == "averaged":
            err = max(
                _averaged_error(exp_set, model, dist, N, r, f, xx)
                for xx in probes_x
            )
        else:
            raise ValidationError(f"unknown form {form!r}")
        raw.append(err)
    scaled = [e * n ** (r / 2.0) for e, n in zip(raw, N_list)]
    decreasing = all(b < a for a, b in zip(scaled, scaled[1:]))
    return ConvergenceReport(form, oracle_kind, r, N_list, raw, scaled, decreasing)
