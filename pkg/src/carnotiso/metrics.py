"""The three homogeneous distances: d_inf, gauge, Carnot-Caratheodory.

All metrics expose both a scalar interface on GroupPoints and vectorized
kernels on coordinate arrays (shape (..., dim1) / (..., dim2)); the heavy
Monte Carlo machinery in :mod:`carnotiso.measures` only uses the array
forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import groups
from .groups import GroupError, GroupPoint, GroupSpec


class MetricError(ValueError):
    """Metric / spec mismatch or bad metric parameters."""


class ConvergenceError(RuntimeError):
    """Numerical iteration failed to reach the requested tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class CCInversionConfig:
    root_tolerance: float = 1e-12  # on the turning angle phi
    max_iterations: int = 200

    def __post_init__(self):
        if self.root_tolerance <= 0:
            raise MetricError("root_tolerance must be positive")


# ---------------------------------------------------------------------------
# the turning-angle profile mu(phi) = (2 phi - sin 2 phi) / (2 sin^2 phi)
#
# mu is strictly increasing from 0 to +inf on (0, pi); solving
# mu(phi) = |t| / |z|^2 recovers the turning angle of the geodesic from the
# identity to [z, t].
# ---------------------------------------------------------------------------

_MU_SERIES_CUT = 1e-4


def mu(phi):
    """Monotone profile (2 phi - sin 2 phi) / (2 sin^2 phi) on [0, pi)."""
    phi = np.asarray(phi, dtype=float)
    small = np.abs(phi) < _MU_SERIES_CUT
    phi_safe = np.where(small, 1.0, phi)
    s = np.sin(phi_safe)
    main = (2.0 * phi_safe - np.sin(2.0 * phi_safe)) / (2.0 * s * s)
    # 2 phi - sin 2 phi cancels to O(phi^3) near 0; switch to the series
    # mu = (2/3) phi (1 + (2/15) phi^2 + ...)
    series = (2.0 / 3.0) * phi * (1.0 + (2.0 / 15.0) * phi * phi)
    return np.where(small, series, main)


def mu_prime(phi):
    """d mu / d phi = 2 - (2 phi - sin 2 phi) cos phi / sin^3 phi."""
    phi = np.asarray(phi, dtype=float)
    small = np.abs(phi) < _MU_SERIES_CUT
    phi_safe = np.where(small, 1.0, phi)
    s = np.sin(phi_safe)
    main = 2.0 - (2.0 * phi_safe - np.sin(2.0 * phi_safe)) * np.cos(phi_safe) / s**3
    series = (2.0 / 3.0) * (1.0 + (2.0 / 5.0) * phi * phi)
    return np.where(small, series, main)


def solve_turning(ratio, config: CCInversionConfig = CCInversionConfig()):
    """Solve mu(phi) = ratio for phi in [0, pi), elementwise.

    Bisection bracket plus safeguarded Newton polish; ratios beyond
    mu(pi - eps) are clamped to the phi -> pi limit (points nearly on the
    center, where the caller's sqrt(pi |t|) formula takes over smoothly).
    """
    ratio = np.asarray(ratio, dtype=float)
    lo = np.zeros_like(ratio)
    hi = np.full_like(ratio, np.pi * (1.0 - 1e-14))
    phi = np.full_like(ratio, np.pi / 2.0)
    # bisection to get a tight bracket
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        too_low = mu(mid) < ratio
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)
        phi = 0.5 * (lo + hi)
    # Newton, falling back to bisection whenever the step leaves the bracket
    def newton_step(phi, lo, hi):
        f = mu(phi) - ratio
        lo = np.where(f < 0, phi, lo)
        hi = np.where(f > 0, phi, hi)
        cand = phi - f / mu_prime(phi)
        bad = (cand < lo) | (cand > hi) | ~np.isfinite(cand)
        new = np.where(bad, 0.5 * (lo + hi), cand)
        return new, np.abs(new - phi), lo, hi

    converged = False
    for _ in range(config.max_iterations):
        phi, delta, lo, hi = newton_step(phi, lo, hi)
        if np.all(delta <= config.root_tolerance * np.maximum(1.0, phi)):
            converged = True
            break
    if converged:
        # the map phi -> distance is ill-conditioned near phi = pi, so a
        # tolerance on phi alone is not enough there; quadratic convergence
        # makes these extra passes land on the machine-precision root
        for _ in range(3):
            phi, _, lo, hi = newton_step(phi, lo, hi)
    else:
        worst = float(np.max(np.abs(mu(phi) - ratio)))
        raise ConvergenceError(
            f"turning-angle solve did not converge within "
            f"{config.max_iterations} iterations", residual=worst)
    return phi


def _phi_over_sin(phi):
    """phi / sin phi, with the value 1 at phi = 0."""
    phi = np.asarray(phi, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = phi / np.sin(phi)
    return np.where(phi == 0.0, 1.0, out)


# ---------------------------------------------------------------------------
# metric classes
# ---------------------------------------------------------------------------

class _HomogeneousMetric:
    """Shared plumbing: distances from the norm of inv(p) . q."""

    spec: GroupSpec

    def norm_arrays(self, l1, l2):  # pragma: no cover - interface
        raise NotImplementedError

    def norm(self, p: GroupPoint) -> float:
        return float(self.norm_arrays(p.layer1, p.layer2))

    def dist_arrays(self, a1, a2, b1, b2):
        i1, i2 = groups.inv_arrays(self.spec, a1, a2)
        d1, d2 = groups.mul_arrays(self.spec, i1, i2, b1, b2)
        return self.norm_arrays(d1, d2)

    def dist(self, p: GroupPoint, q: GroupPoint) -> float:
        return float(self.dist_arrays(p.layer1, p.layer2, q.layer1, q.layer2))

    def unit_ball_bbox(self):  # pragma: no cover - interface
        raise NotImplementedError


class DinfMetric(_HomogeneousMetric):
    """Layered max-norm distance: max(c1 |z|, c2 |t|^(1/2))."""

    def __init__(self, spec: GroupSpec, c1: float = 1.0, c2: float = 1.0):
        if c1 <= 0 or c2 <= 0:
            raise MetricError("d_inf coefficients must be positive")
        self.spec = spec
        self.c1 = float(c1)
        self.c2 = float(c2)

    def norm_arrays(self, l1, l2):
        l1 = np.asarray(l1, dtype=float)
        l2 = np.asarray(l2, dtype=float)
        n1 = np.linalg.norm(l1, axis=-1)
        n2 = np.linalg.norm(l2, axis=-1)
        return np.maximum(self.c1 * n1, self.c2 * np.sqrt(n2))

    def unit_ball_bbox(self):
        r1, r2 = 1.0 / self.c1, 1.0 / self.c2**2
        d1, d2 = self.spec.dim1, self.spec.dim2
        return (np.full(d1, -r1), np.full(d1, r1),
                np.full(d2, -r2), np.full(d2, r2))

    def describe(self):
        return {"metric": "dinf", "c1": self.c1, "c2": self.c2}


class GaugeMetric(_HomogeneousMetric):
    """Gauge distance from the norm (|X|^4 + 16 |Z|^2)^(1/4).

    Native home is an H-type spec in exponential coordinates; on a
    Heisenberg spec the same norm is carried over through the H^1 model
    change t = -4 Z, giving (|z|^4 + t^2)^(1/4).
    """

    def __init__(self, spec: GroupSpec):
        self.spec = spec

    def norm_arrays(self, l1, l2):
        l1 = np.asarray(l1, dtype=float)
        l2 = np.asarray(l2, dtype=float)
        n1sq = np.sum(l1 * l1, axis=-1)
        n2sq = np.sum(l2 * l2, axis=-1)
        if self.spec.kind == "htype":
            return (n1sq * n1sq + 16.0 * n2sq) ** 0.25
        return (n1sq * n1sq + n2sq) ** 0.25

    def unit_ball_bbox(self):
        d1, d2 = self.spec.dim1, self.spec.dim2
        r2 = 0.25 if self.spec.kind == "htype" else 1.0
        return (np.full(d1, -1.0), np.full(d1, 1.0),
                np.full(d2, -r2), np.full(d2, r2))

    def describe(self):
        return {"metric": "gauge"}


class CCMetric(_HomogeneousMetric):
    """Carnot-Caratheodory distance on H^n.

    After left translation write the difference as [z, t]. On the center
    (z = 0) the distance is sqrt(pi |t|); otherwise the turning angle phi
    solves mu(phi) = |t| / |z|^2 and the distance is |z| phi / sin phi.
    """

    def __init__(self, spec: GroupSpec, config: CCInversionConfig | None = None):
        if spec.kind != "heisenberg":
            raise MetricError("CC distance is implemented for Heisenberg specs only")
        self.spec = spec
        self.config = config or CCInversionConfig()

    def norm_arrays(self, l1, l2):
        l1 = np.asarray(l1, dtype=float)
        l2 = np.asarray(l2, dtype=float)
        zn = np.linalg.norm(l1, axis=-1)
        t = np.abs(l2[..., 0])
        scalar = zn.ndim == 0
        zn = np.atleast_1d(zn)
        t = np.atleast_1d(t)
        out = np.sqrt(np.pi * t)  # center formula, also the z -> 0 limit
        off = zn > 0
        if np.any(off):
            ratio = t[off] / zn[off] ** 2
            # beyond this ratio phi is within ~1e-11 of pi and the center
            # formula is accurate to full precision
            huge = ratio > 1e22
            ratio_safe = np.where(huge, 1.0, ratio)
            phi = solve_turning(ratio_safe, self.config)
            d = zn[off] * _phi_over_sin(phi)
            out[off] = np.where(huge, out[off], d)
        return out[0] if scalar else out.reshape(np.shape(l2)[:-1])

    def unit_ball_bbox(self):
        # |z| <= 1 (phi -> 0); the height profile (2 phi - sin 2 phi)/(2 phi^2)
        # peaks at phi = pi/2 with value 2/pi, so |t| <= 2/pi (the center
        # point of the ball only reaches |t| = 1/pi)
        d1 = self.spec.dim1
        return (np.full(d1, -1.0), np.full(d1, 1.0),
                np.array([-2.0 / np.pi]), np.array([2.0 / np.pi]))

    def describe(self):
        return {"metric": "cc"}


def make_metric(spec: GroupSpec, doc: dict) -> _HomogeneousMetric:
    """Build a metric from its CLI/JSON description."""
    kind = doc.get("metric")
    if kind == "dinf":
        return DinfMetric(spec, doc.get("c1", 1.0), doc.get("c2", 1.0))
    if kind == "gauge":
        return GaugeMetric(spec)
    if kind == "cc":
        return CCMetric(spec)
    raise MetricError(f"unknown metric {kind!r}")


# ---------------------------------------------------------------------------
# d_inf coefficient validator (a sampler, not a proof)
# ---------------------------------------------------------------------------

@dataclass
class CoefficientReport:
    passed: bool
    worst_violation: float
    witness: tuple | None
    samples: int
    seed: int


def validate_dinf_coefficients(spec: GroupSpec, c1: float, c2: float,
                               sample_budget: int = 10**5, seed: int = 0,
                               tol: float = 1e-12) -> CoefficientReport:
    """Sample pairs and check subadditivity |p.q| <= |p| + |q| of the norm."""
    if sample_budget < 1:
        raise MetricError("sample budget must be >= 1")
    metric = DinfMetric(spec, c1, c2)
    rng = np.random.Generator(np.random.Philox(key=seed))
    worst = 0.0
    witness = None
    done = 0
    while done < sample_budget:
        m = min(1 << 16, sample_budget - done)
        a1 = rng.uniform(-1, 1, size=(m, spec.dim1))
        a2 = rng.uniform(-1, 1, size=(m, spec.dim2))
        b1 = rng.uniform(-1, 1, size=(m, spec.dim1))
        b2 = rng.uniform(-1, 1, size=(m, spec.dim2))
        p1, p2 = groups.mul_arrays(spec, a1, a2, b1, b2)
        viol = (metric.norm_arrays(p1, p2)
                - metric.norm_arrays(a1, a2) - metric.norm_arrays(b1, b2))
        i = int(np.argmax(viol))
        if viol[i] > worst:
            worst = float(viol[i])
            witness = (a1[i].copy(), a2[i].copy(), b1[i].copy(), b2[i].copy())
        done += m
    return CoefficientReport(passed=worst <= tol, worst_violation=worst,
                             witness=witness, samples=sample_budget, seed=seed)


# ---------------------------------------------------------------------------
# unit-ball volumes (Haar = Lebesgue in both coordinate models)
# ---------------------------------------------------------------------------

def _alpha(m: int) -> float:
    from .measures import alpha
    return alpha(m)


def unit_ball_volume(metric: _HomogeneousMetric, abs_tol: float = 1e-12) -> tuple[float, float]:
    """(volume, error bound) of the metric's closed unit ball."""
    spec = metric.spec
    if isinstance(metric, DinfMetric):
        n2 = spec.dim1
        vol = 2.0 * _alpha(n2) / (metric.c1 ** n2 * metric.c2 ** 2)
        if spec.kind == "htype":  # layer-2 ball is a k-ball, not a segment
            vol = _alpha(n2) * _alpha(spec.dim2) / (
                metric.c1 ** n2 * metric.c2 ** (2 * spec.dim2))
        return vol, 0.0
    if isinstance(metric, GaugeMetric):
        m, k = spec.dim1, spec.dim2
        scale = 4.0 if spec.kind == "htype" else 1.0  # |Z| <= 1/4 vs |t| <= 1
        # slicing over the layer-2 radius r gives
        #   alpha_m alpha_k * int_0^{1/scale} k r^(k-1) (1 - (scale r)^2)^(m/4) dr;
        # substituting u = (scale r)^2 turns the endpoint behaviour into the
        # algebraic weight u^(k/2-1) (1-u)^(m/4), which quad handles exactly
        val, err = integrate.quad(lambda u: 1.0, 0.0, 1.0, weight="alg",
                                  wvar=(k / 2.0 - 1.0, m / 4.0),
                                  epsabs=abs_tol, limit=200)
        pref = _alpha(m) * _alpha(k) * k / (2.0 * scale ** k)
        return pref * val, pref * err
    if isinstance(metric, CCMetric):
        from .measures import cc_unit_ball_volume
        est = cc_unit_ball_volume(spec.n, abs_tol=abs_tol)
        return est.value, est.error
    raise MetricError(f"no volume rule for {type(metric).__name__}")
