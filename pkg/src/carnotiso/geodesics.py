"""CC geodesic sphere parameterization, cut points, and cut-locus evidence.

The closed CC ball of radius r around the identity in H^n is the image of

    (chi, phi) -> [ r (sin phi / phi) chi , r^2 (2 phi - sin 2 phi)/(2 phi^2) |chi|^2 ]

with |chi| <= 1 and phi in [-pi, pi]. Geodesics of length r to the boundary
point with parameters (chi, phi) rotate their horizontal direction at a
constant rate; they stop minimizing exactly at |phi| = pi, on the center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import groups, sampling
from .groups import GroupError, GroupPoint, GroupSpec
from .metrics import CCMetric


@dataclass(frozen=True)
class GeodesicParams:
    chi: np.ndarray  # unit direction in R^{2n}
    phi: float       # turning parameter in [-pi, pi]
    r: float         # length

    def __post_init__(self):
        object.__setattr__(self, "chi", np.asarray(self.chi, dtype=float))
        if abs(np.linalg.norm(self.chi) - 1.0) > 1e-12:
            raise GroupError("chi must be a unit vector")
        if abs(self.phi) > math.pi:
            raise GroupError("|phi| must be <= pi")
        if self.r <= 0:
            raise GroupError("length r must be positive")


def _sin_over(phi):
    """sin(phi)/phi with value 1 at 0."""
    return np.sinc(np.asarray(phi, dtype=float) / np.pi)


def _height_profile(phi):
    """(2 phi - sin 2 phi) / (2 phi^2), extended by (2/3) phi at 0."""
    phi = np.asarray(phi, dtype=float)
    small = np.abs(phi) < 1e-4
    p = np.where(small, 1.0, phi)
    main = (2.0 * p - np.sin(2.0 * p)) / (2.0 * p * p)
    series = (2.0 / 3.0) * phi * (1.0 - 0.2 * phi * phi)
    return np.where(small, series, main)


def sphere_point_arrays(n: int, chi: np.ndarray, phi, r):
    """Vectorized sphere map; chi (..., 2n), phi and r broadcastable."""
    phi = np.asarray(phi, dtype=float)
    r = np.asarray(r, dtype=float)
    z = (r * _sin_over(phi))[..., None] * chi
    csq = np.sum(chi * chi, axis=-1)
    t = r * r * _height_profile(phi) * csq
    return z, t[..., None]


def cc_sphere_point(spec: GroupSpec, params: GeodesicParams) -> GroupPoint:
    """Endpoint of the geodesic with the given parameters; at CC distance r."""
    if spec.kind != "heisenberg":
        raise GroupError("CC sphere parameterization needs a Heisenberg spec")
    if params.chi.shape != (spec.dim1,):
        raise GroupError("chi dimension does not match the spec")
    z, t = sphere_point_arrays(spec.n, params.chi, params.phi, params.r)
    return GroupPoint(z, t)


def _rotate_pairs(n: int, chi: np.ndarray, theta):
    """Rotate each complex pair (x_j, x_{n+j}) by angle theta."""
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta)[..., None], np.sin(theta)[..., None]
    x, y = chi[..., :n], chi[..., n:]
    return np.concatenate([c * x - s * y, s * x + c * y], axis=-1)


def cc_geodesic_sample(spec: GroupSpec, params: GeodesicParams, s: float) -> GroupPoint:
    """Point at arc length s on the unit-speed geodesic to cc_sphere_point.

    The sub-arc of length s is itself a sphere point with turning
    phi * s / r and direction chi rotated by phi * (1 - s/r); the rotation
    angle and orientation are pinned down by the constant-speed check
    d(gamma(s), gamma(s')) = |s - s'|.
    """
    if spec.kind != "heisenberg":
        raise GroupError("CC geodesics need a Heisenberg spec")
    if not 0.0 <= s <= params.r:
        raise GroupError(f"arc length {s} outside [0, {params.r}]")
    if s == 0.0:
        return groups.identity(spec)
    frac = s / params.r
    chi_s = _rotate_pairs(spec.n, params.chi, params.phi * (1.0 - frac))
    z, t = sphere_point_arrays(spec.n, chi_s, params.phi * frac, s)
    return GroupPoint(z, t)


def cut_point(spec: GroupSpec, rho: float) -> GroupPoint:
    """First point where geodesics from the identity stop minimizing: [0, rho^2/pi]."""
    if spec.kind != "heisenberg":
        raise GroupError("cut points implemented for Heisenberg specs")
    if rho <= 0:
        raise GroupError("rho must be positive")
    return GroupPoint(np.zeros(spec.dim1), np.array([rho * rho / math.pi]))


@dataclass
class CutPointReport:
    cut_point: GroupPoint
    sampled_max_roundtrip: float  # max d(0, y) over sampled y in B(cut_point, 1)
    margin: float                 # 2 - sampled_max_roundtrip
    continuation_point: GroupPoint
    continuation_distance: float  # d(0, continuation_point), exactly 2
    excluded: int
    samples: int
    seed: int

    def to_dict(self):
        return {
            "cut_point": {"z": self.cut_point.layer1.tolist(),
                          "t": self.cut_point.t},
            "sampled_max_roundtrip": self.sampled_max_roundtrip,
            "margin": self.margin,
            "continuation_point": {"z": self.continuation_point.layer1.tolist(),
                                   "t": self.continuation_point.t},
            "continuation_distance": self.continuation_distance,
            "excluded_samples": self.excluded,
            "samples": self.samples,
            "seed": self.seed,
        }


def verify_assumption_C(spec: GroupSpec, sample_budget: int = 10**6,
                        seed: int = 0, exclusion_radius: float = 1e-3) -> CutPointReport:
    """Numerical evidence that geodesics stop minimizing at the cut point.

    With x the unit cut point, samples y on and in the closed CC ball
    B(x, 1) and reports margin = 2 - max d(0, y). Samples within
    exclusion_radius of the geodesic continuation point [0, 4/pi] are
    dropped from the max (that point sits at distance exactly 2, but it
    lies outside B(x, 1), so the exclusion is a guard, not a loophole).
    """
    if spec.kind != "heisenberg":
        raise GroupError("assumption (C) check needs a Heisenberg spec")
    metric = CCMetric(spec)
    x = cut_point(spec, 1.0)
    cont = cut_point(spec, 2.0)  # [0, 4/pi]
    n = spec.n
    d1 = spec.dim1

    def chunk(rng, count):
        # half the chunk on the boundary sphere of B(x,1), half inside
        m_sphere = count // 2
        m_inner = count - m_sphere
        chi = rng.standard_normal((m_sphere, d1))
        chi /= np.linalg.norm(chi, axis=1, keepdims=True)
        phi = rng.uniform(-math.pi, math.pi, size=m_sphere)
        z_s, t_s = sphere_point_arrays(n, chi, phi, np.ones(m_sphere))
        chi2 = rng.standard_normal((m_inner, d1))
        chi2 /= np.linalg.norm(chi2, axis=1, keepdims=True)
        chi2 *= rng.uniform(0.0, 1.0, size=(m_inner, 1)) ** (1.0 / d1)
        phi2 = rng.uniform(-math.pi, math.pi, size=m_inner)
        u = rng.uniform(0.0, 1.0, size=m_inner) ** (1.0 / spec.Q)
        z_i, t_i = sphere_point_arrays(n, chi2, phi2, u)
        z = np.vstack([z_s, z_i])
        t = np.vstack([t_s, t_i])
        # translate the ball to its center x
        y1, y2 = groups.mul_arrays(spec, x.layer1, x.layer2, z, t)
        d0 = metric.norm_arrays(y1, y2)
        near_cont = metric.dist_arrays(cont.layer1, cont.layer2, y1, y2) < exclusion_radius
        kept = d0[~near_cont]
        return (float(kept.max()) if kept.size else 0.0, int(np.count_nonzero(near_cont)))

    results = sampling.map_chunks(seed, sample_budget, chunk)
    best = max(r[0] for r in results)
    excluded = sum(r[1] for r in results)
    return CutPointReport(cut_point=x, sampled_max_roundtrip=best,
                          margin=2.0 - best, continuation_point=cont,
                          continuation_distance=metric.norm(cont),
                          excluded=excluded, samples=sample_budget, seed=seed)
