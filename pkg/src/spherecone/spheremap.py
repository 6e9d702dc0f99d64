"""Area-preserving cube-to-sphere map, chi-radial lift, equal-area
partitions of S^2 and stratified samplers.

The map T sends [0,1)^s onto S^s by building the point up one height
coordinate at a time: the first coordinate gives an angle on the circle,
each later coordinate q gives a height t_q = 1 - 2 h_q^{-1}(x_q) with
h_q(x) = I_x(q/2, q/2), and the earlier coordinates are shrunk by
sqrt(1 - t_q^2).  Uniform cube input gives uniform sphere output.

The lift appends a chi-distributed radius via the chi quantile of the
last cube coordinate, so uniform cube points map to standard normal
vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .specfun import (chi_quantile, inv_reg_beta_symmetric, reg_beta_i,
                      reg_gamma_q, inv_reg_gamma_q, inv_reg_gamma_p)

__all__ = [
    "SpacePoint",
    "SpacePoints",
    "RadialShells",
    "SpherePartition",
    "map_to_sphere",
    "lift_to_space",
    "cap_measure",
    "radial_shells",
    "equal_area_partition_s2",
    "stratified_sample",
]

# Radii are capped at the chi quantile of 1 - 2^-32 so that scrambled
# points landing on the last representable mantissa cell stay finite.
_U_CAP = 1.0 - 2.0**-32


@dataclass(frozen=True)
class SpacePoint:
    """A point of R^{m+1} in polar form: unit direction times radius."""

    direction: np.ndarray
    radius: float

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        object.__setattr__(self, "direction", d)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise DomainError("direction must be a unit vector")
        if self.radius < 0:
            raise DomainError("radius must be nonnegative")

    @property
    def cartesian(self):
        return self.radius * self.direction


class SpacePoints:
    """Batch of points in polar form: directions (N, m+1), radii (N,)."""

    def __init__(self, directions, radii):
        directions = np.atleast_2d(np.asarray(directions, dtype=float))
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        if directions.shape[0] != radii.shape[0]:
            raise ConfigurationError("directions and radii length mismatch")
        norms = np.linalg.norm(directions, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise DomainError("directions must be unit vectors")
        if np.any(radii < 0):
            raise DomainError("radii must be nonnegative")
        self.directions = directions
        self.radii = radii

    def __len__(self):
        return self.radii.shape[0]

    def __getitem__(self, i):
        return SpacePoint(self.directions[i], float(self.radii[i]))

    @property
    def cartesian(self):
        return self.directions * self.radii[:, None]

    @classmethod
    def from_cartesian(cls, xs):
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        r = np.linalg.norm(xs, axis=1)
        dirs = np.empty_like(xs)
        zero = r == 0.0
        # the origin has no direction; use the first basis vector, the
        # radius 0 makes the choice irrelevant
        dirs[zero] = 0.0
        dirs[zero, 0] = 1.0
        nz = ~zero
        dirs[nz] = xs[nz] / r[nz, None]
        return cls(dirs, r)


def map_to_sphere(x):
    """Map points of [0,1)^s onto S^s (ambient dimension s+1).

    Accepts a single vector (s,) or a batch (n, s); returns the matching
    shape with one more column.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    n, s = x2.shape
    if s < 1:
        raise DomainError("need at least one coordinate")
    if np.any(x2 < 0.0) or np.any(x2 >= 1.0):
        raise DomainError("coordinates must lie in [0, 1)")
    ang = 2.0 * np.pi * x2[:, 0]
    y = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    for q in range(2, s + 1):
        if q == 2:
            t = 1.0 - 2.0 * x2[:, 1]
        else:
            t = 1.0 - 2.0 * inv_reg_beta_symmetric(x2[:, q - 1], q / 2.0)
        scale = np.sqrt(np.maximum(0.0, 1.0 - t * t))
        y = np.concatenate([y * scale[:, None], t[:, None]], axis=1)
    return y[0] if single else y


def lift_to_space(x):
    """Lift [0,1)^d points to R^d: sphere map for the first d-1 coords,
    chi(d) quantile of the last coordinate as the radius.

    A single vector gives a SpacePoint, a batch gives SpacePoints.
    Uniform input yields standard normal output.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    n, d = x2.shape
    if d < 2:
        raise DomainError("need dimension >= 2 to split direction and radius")
    dirs = map_to_sphere(x2[:, :-1])
    u = np.minimum(x2[:, -1], _U_CAP)
    radii = chi_quantile(d, u)
    radii = np.atleast_1d(radii)
    if single:
        return SpacePoint(dirs[0], float(radii[0]))
    return SpacePoints(dirs, radii)


def cap_measure(m, t):
    """Normalized surface area of the spherical cap {y in S^m : y.z >= t}.

    Equals I_{(1-t)/2}(m/2, m/2), independent of the cap center.
    """
    if m < 1 or int(m) != m:
        raise DomainError(f"sphere dimension must be a positive integer, got {m!r}")
    t = np.asarray(t, dtype=float)
    if np.any(t < -1.0) or np.any(t > 1.0):
        raise DomainError("cap height must lie in [-1, 1]")
    out = reg_beta_i((1.0 - t) / 2.0, m / 2.0, m / 2.0)
    return out if t.ndim else float(out)


@dataclass(frozen=True)
class RadialShells:
    """Equal-mass radial shells of the Nakagami density with shape mu
    and spread B: the shell (rho_{k-1}, rho_k] has mass 1/K."""

    boundaries: np.ndarray  # interior boundaries rho_1 < ... < rho_{K-1}
    mu: float
    B: float
    K: int

    def shell_mass(self, k):
        """Mass of shell k (1-based) under the density; should be 1/K."""
        lo = 0.0 if k == 1 else self.boundaries[k - 2]
        c = self.mu / self.B
        upper = (reg_gamma_q(self.mu, c * self.boundaries[k - 1] ** 2)
                 if k < self.K else 0.0)
        return reg_gamma_q(self.mu, c * lo**2) - upper

    def sample_radius(self, k, u):
        """Radius at conditional quantile u within shell k (1-based)."""
        p = (k - 1 + np.asarray(u, dtype=float)) / self.K
        return np.sqrt((self.B / self.mu) * inv_reg_gamma_p(self.mu, p))


def radial_shells(mu, B, K):
    """Shell boundaries rho_k with integral_0^{rho_k} psi = k/K."""
    if mu <= 0 or B <= 0:
        raise DomainError("mu and B must be positive")
    if K < 1 or int(K) != K:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    ks = np.arange(1, K)
    if K == 1:
        bounds = np.empty(0)
    else:
        bounds = np.sqrt((B / mu) * inv_reg_gamma_q(mu, 1.0 - ks / K))
    return RadialShells(boundaries=bounds, mu=float(mu), B=float(B), K=int(K))


@dataclass(frozen=True)
class SpherePartition:
    """Equal-area partition of S^2 into zonal cells.

    cells is an (M, 4) array of (theta0, theta1, phi0, phi1) in
    colatitude/azimuth; the polar caps have the full azimuth range.
    bands groups cells that are congruent (same colatitude range and
    azimuth width): each entry is (theta0, theta1, n_sectors).
    """

    cells: np.ndarray
    bands: list
    M: int
    diameter_constant: float = field(default=float("nan"))

    def cell_area(self, i):
        t0, t1, p0, p1 = self.cells[i]
        return (np.cos(t0) - np.cos(t1)) * (p1 - p0) / (4.0 * np.pi)


def _band_diameter(theta0, theta1, dphi, n_arc=96):
    """Diameter of a band-sector cell by discretizing its boundary."""
    thetas = np.linspace(theta0, theta1, n_arc)
    phis = np.linspace(0.0, dphi, n_arc)
    pts = [np.stack([np.sin(thetas) * np.cos(0.0 * thetas),
                     np.sin(thetas) * np.sin(0.0 * thetas),
                     np.cos(thetas)], axis=1),
           np.stack([np.sin(thetas) * np.cos(dphi),
                     np.sin(thetas) * np.sin(dphi),
                     np.cos(thetas)], axis=1)]
    for th in (theta0, theta1):
        pts.append(np.stack([np.sin(th) * np.cos(phis),
                             np.sin(th) * np.sin(phis),
                             np.full_like(phis, np.cos(th))], axis=1))
    P = np.concatenate(pts, axis=0)
    diff = P[:, None, :] - P[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def equal_area_partition_s2(M):
    """Zonal equal-area partition of S^2: polar caps plus collars of
    equal-azimuth sectors, every cell of normalized area 1/M."""
    if M < 1 or int(M) != M:
        raise DomainError(f"M must be a positive integer, got {M!r}")
    M = int(M)
    if M == 1:
        cells = np.array([[0.0, np.pi, 0.0, 2.0 * np.pi]])
        bands = [(0.0, np.pi, 1)]
        return SpherePartition(cells, bands, 1, diameter_constant=2.0)
    if M == 2:
        cells = np.array([[0.0, np.pi / 2, 0.0, 2.0 * np.pi],
                          [np.pi / 2, np.pi, 0.0, 2.0 * np.pi]])
        bands = [(0.0, np.pi / 2, 1), (np.pi / 2, np.pi, 1)]
        return SpherePartition(cells, bands, 2,
                               diameter_constant=2.0 * np.sqrt(2.0))
    # polar caps of area 1/M each
    theta_c = np.arccos(1.0 - 2.0 / M)
    n_collar_cells = M - 2
    delta_ideal = np.sqrt(4.0 * np.pi / M)
    n_collars = max(1, int(round((np.pi - 2.0 * theta_c) / delta_ideal)))
    delta_fit = (np.pi - 2.0 * theta_c) / n_collars
    # ideal cell counts per collar, rounded with running correction so
    # the total is exactly M - 2
    counts = []
    acc = 0.0
    for i in range(n_collars):
        lo = theta_c + i * delta_fit
        hi = theta_c + (i + 1) * delta_fit
        ideal = M * (np.cos(lo) - np.cos(hi)) / 2.0
        m_i = max(1, int(round(ideal + acc)))
        acc += ideal - m_i
        counts.append(m_i)
    counts[-1] += n_collar_cells - sum(counts)
    if counts[-1] < 1:
        raise ConfigurationError("collar rounding failed")
    # collar boundaries chosen so each collar holds exactly its share
    cum = np.concatenate([[1], 1 + np.cumsum(counts)])
    thetas = np.arccos(np.clip(1.0 - 2.0 * cum / M, -1.0, 1.0))
    cells = [[0.0, theta_c, 0.0, 2.0 * np.pi]]
    bands = [(0.0, theta_c, 1)]
    for i, m_i in enumerate(counts):
        t0, t1 = thetas[i], thetas[i + 1]
        width = 2.0 * np.pi / m_i
        for j in range(m_i):
            cells.append([t0, t1, j * width, (j + 1) * width])
        bands.append((t0, t1, m_i))
    theta_s = np.arccos(-(1.0 - 2.0 / M))
    cells.append([theta_s, np.pi, 0.0, 2.0 * np.pi])
    bands.append((theta_s, np.pi, 1))
    cells = np.asarray(cells)
    max_diam = max(_band_diameter(t0, t1, 2.0 * np.pi / m)
                   for t0, t1, m in bands)
    return SpherePartition(cells, bands, M,
                           diameter_constant=max_diam * np.sqrt(M))


def stratified_sample(partition, shells, rng_seed):
    """One point per (cell, shell) stratum: direction uniform on the
    cell, radius from the shell's conditional distribution.

    Returns SpacePoints of length M * K, ordered cell-major."""
    if partition.cells.shape[1] != 4:
        raise ConfigurationError("partition must be an S^2 partition")
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([int(rng_seed)])))
    M, K = partition.M, shells.K
    dirs = np.empty((M * K, 3))
    radii = np.empty(M * K)
    for m in range(M):
        t0, t1, p0, p1 = partition.cells[m]
        u = rng.random((K, 2))
        # cos(theta) uniform on the band gives uniform area
        ct = np.cos(t0) + u[:, 0] * (np.cos(t1) - np.cos(t0))
        st = np.sqrt(np.maximum(0.0, 1.0 - ct**2))
        phi = p0 + u[:, 1] * (p1 - p0)
        for k in range(K):
            i = m * K + k
            dirs[i] = (st[k] * np.cos(phi[k]), st[k] * np.sin(phi[k]), ct[k])
            radii[i] = shells.sample_radius(k + 1, rng.random())
    return SpacePoints(dirs, radii)
