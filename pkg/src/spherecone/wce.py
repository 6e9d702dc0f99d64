"""Worst-case integration errors for normally-weighted integration on
R^{d+1} with the spherical-cone kernel, plus their expected-value laws
and brute-force Monte Carlo oracles.

The kernel factors into a radial part K_R(r, rho) = Phi(min{r, rho}) and
a sphere part K_S(x*, y*) = 1 - C_d ||x* - y*||.  Throughout, Phi is the
cdf Phi(rho) = 1 - exp(-mu (1/A - 1/B) rho^2) paired with the Nakagami
radial density psi(r) = (2/Gamma(mu)) (mu/B)^mu r^{2 mu - 1}
exp(-(mu/B) r^2), the combination for which every radial integral has a
closed form in regularized incomplete gamma/beta functions.

The squared worst-case error of the equal-weight rule on nodes X is

    (1/N^2) sum_ij Kmod(x_i, x_j)
        - (2/N) sum_j int Kmod(x, x_j) psi(x) dlambda(x),

with Kmod = K - W(K), and it coincides with the spherical-cone L2
discrepancy (an average of squared local discrepancies over all
truncated cones), which is what the MC oracle here samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.spatial.distance import pdist, squareform

from .errors import ConfigurationError, DomainError
from .specfun import (inv_reg_gamma_q, reg_beta_i, reg_gamma_p, reg_gamma_q)
from .spheremap import SpacePoint, SpacePoints, cap_measure

__all__ = [
    "KernelParams",
    "SphereConstants",
    "WceReport",
    "StratifiedWcePrediction",
    "sphere_constants",
    "kernel_K",
    "kernel_psi_integral",
    "phi_cdf",
    "phi_psi_integral",
    "w_kr_psi",
    "w_kernel",
    "wce_nakagami",
    "wce_isotropic_general",
    "mc_cone_discrepancy_oracle",
    "wce_sphere_cap",
    "rms_wce_iid",
    "rms_wce_fixed_directions",
    "expected_wce_sq_permutation",
    "radial_discrepancy",
    "stratified_expected_wce_sq",
    "lambda_k",
]

# squared-wce values below this trigger a loud diagnostic before clamping
_CANCEL_TOL = -1e-9


@dataclass(frozen=True)
class KernelParams:
    """Radial kernel parameters: cdf Phi and Nakagami density with shape
    mu, requiring 0 < A < B; d is the sphere dimension (ambient d+1)."""

    mu: float
    A: float
    B: float
    d: int

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise DomainError(f"mu must be positive and finite, got {self.mu}")
        if not (0 < self.A < self.B) or not math.isfinite(self.B):
            raise DomainError(
                f"need 0 < A < B, got A={self.A}, B={self.B}")
        if self.d < 1 or int(self.d) != self.d:
            raise DomainError(f"d must be a positive integer, got {self.d}")


@dataclass(frozen=True)
class SphereConstants:
    C_d: float
    W_Sd: float
    W_KS: float


@dataclass(frozen=True)
class WceReport:
    wce: float
    double_sum_term: float
    single_sum_term: float
    W_K: float
    n_points: int


def sphere_constants(d):
    """C_d, the mean pairwise distance W(S^d), and W_KS = 1 - C_d W(S^d)."""
    if d < 1 or int(d) != d:
        raise DomainError(f"d must be a positive integer, got {d!r}")
    c_d = (1.0 / d) * math.gamma((d + 1) / 2.0) / (
        math.sqrt(math.pi) * math.gamma(d / 2.0))
    w_sd = 2.0**d * math.gamma((d + 1) / 2.0)**2 / (
        math.sqrt(math.pi) * math.gamma(d + 0.5))
    return SphereConstants(C_d=c_d, W_Sd=w_sd, W_KS=1.0 - c_d * w_sd)


def phi_cdf(p, rho):
    """The radial cdf Phi(rho) = 1 - exp(-mu (1/A - 1/B) rho^2)."""
    rho = np.asarray(rho, dtype=float)
    out = -np.expm1(-p.mu * (1.0 / p.A - 1.0 / p.B) * rho**2)
    return out if out.ndim else float(out)


def psi_tail(p, rho):
    """Tail mass of the radial density: Q(mu, (mu/B) rho^2)."""
    return reg_gamma_q(p.mu, (p.mu / p.B) * np.asarray(rho, dtype=float)**2)


def psi_density(p, r):
    """Nakagami radial density with shape mu and spread B."""
    r = np.asarray(r, dtype=float)
    c = p.mu / p.B
    return (2.0 / math.gamma(p.mu)) * c**p.mu * r**(2 * p.mu - 1) * np.exp(
        -c * r**2)


def phi_psi_integral(p, rho):
    """int_0^rho Phi(r) psi(r) dr
    = P(mu, (mu/B) rho^2) - (A/B)^mu P(mu, (mu/A) rho^2)."""
    rho = np.asarray(rho, dtype=float)
    out = (reg_gamma_p(p.mu, (p.mu / p.B) * rho**2)
           - (p.A / p.B)**p.mu * reg_gamma_p(p.mu, (p.mu / p.A) * rho**2))
    return out if out.ndim else float(out)


def w_kr_psi(p):
    """Double radial integral W(K_R, psi) = int int Phi(min{r, rho})
    psi(r) psi(rho) dr drho = 1 - 2 (A/B)^mu I_{B/(A+B)}(mu, mu)."""
    x = p.B / (p.A + p.B)
    return 1.0 - 2.0 * (p.A / p.B)**p.mu * float(reg_beta_i(x, p.mu, p.mu))


def w_kernel(p):
    """The kernel mean W(K) = W(K_R, psi) W(K_S)."""
    return w_kr_psi(p) * sphere_constants(p.d).W_KS


def _as_polar(X, p=None):
    """Normalize point-set input to (radii, directions) arrays.

    Accepts SpacePoints, a single SpacePoint, a sequence of SpacePoint,
    or a plain (N, d+1) Cartesian array.
    """
    if isinstance(X, SpacePoints):
        pts = X
    elif isinstance(X, SpacePoint):
        pts = SpacePoints(X.direction[None, :], [X.radius])
    elif isinstance(X, (list, tuple)) and X and isinstance(X[0], SpacePoint):
        pts = SpacePoints(np.stack([x.direction for x in X]),
                          [x.radius for x in X])
    else:
        pts = SpacePoints.from_cartesian(np.asarray(X, dtype=float))
    if len(pts) == 0:
        raise DomainError("point set must not be empty")
    if p is not None and pts.directions.shape[1] != p.d + 1:
        raise ConfigurationError(
            f"points have ambient dimension {pts.directions.shape[1]}, "
            f"kernel expects {p.d + 1}")
    return pts.radii, pts.directions


def kernel_K(p, x, y):
    """Kernel value Phi(min{||x||, ||y||}) (1 - C_d ||x* - y*||).

    Anchored at the origin: K(0, y) = 0.
    """
    rx, dx = _as_polar(x, p)
    ry, dy = _as_polar(y, p)
    r = min(rx[0], ry[0])
    if r == 0.0:
        return 0.0
    c_d = sphere_constants(p.d).C_d
    return float(phi_cdf(p, r) * (1.0 - c_d * np.linalg.norm(dx[0] - dy[0])))


def kernel_psi_integral(p, rho):
    """int K(x, rho y*) psi(x) dlambda(x), independent of y*:
    W(K_S) [1 - (1 - Phi(rho)) Q(mu, (mu/B) rho^2)
            - (A/B)^mu P(mu, (mu/A) rho^2)]."""
    rho = np.asarray(rho, dtype=float)
    w_ks = sphere_constants(p.d).W_KS
    bracket = (1.0
               - (1.0 - phi_cdf(p, rho)) * psi_tail(p, rho)
               - (p.A / p.B)**p.mu
               * reg_gamma_p(p.mu, (p.mu / p.A) * rho**2))
    out = w_ks * bracket
    return out if np.ndim(rho) else float(out)


def _finish_report(double_sum, single_sum, w_k, n):
    sq = double_sum - single_sum
    if sq < _CANCEL_TOL:
        import warnings
        warnings.warn(f"squared wce {sq} below cancellation tolerance; "
                      "clamping to 0", RuntimeWarning)
    return WceReport(wce=math.sqrt(max(sq, 0.0)),
                     double_sum_term=double_sum,
                     single_sum_term=single_sum,
                     W_K=w_k, n_points=n)


def wce_nakagami(p, X):
    """Worst-case error of the equal-weight rule on X, all radial
    integrals in closed form.  O(N^2)."""
    radii, dirs = _as_polar(X, p)
    n = len(radii)
    consts = sphere_constants(p.d)
    w_kr = w_kr_psi(p)
    w_k = w_kr * consts.W_KS
    dist = squareform(pdist(dirs)) if n > 1 else np.zeros((1, 1))
    kmat = phi_cdf(p, np.minimum.outer(radii, radii)) * (
        1.0 - consts.C_d * dist)
    double_sum = float(np.mean(kmat)) - w_k
    bracket = (1.0
               - (1.0 - phi_cdf(p, radii)) * psi_tail(p, radii)
               - (p.A / p.B)**p.mu
               * reg_gamma_p(p.mu, (p.mu / p.A) * radii**2)
               - w_kr)
    single_sum = 2.0 * consts.W_KS * float(np.mean(bracket))
    return _finish_report(double_sum, single_sum, w_k, n)


def wce_isotropic_general(Phi, psidens, d, X, psi_tail_fn=None,
                          phi_psi_integral_fn=None, w_kr=None):
    """Worst-case error for a user-supplied radial cdf Phi and density
    psidens, radial integrals by adaptive quadrature unless closed-form
    callables are given.

    Phi must be a cdf anchored at 0 and psidens a probability density on
    [0, inf); both are validated numerically.
    """
    if abs(Phi(0.0)) > 1e-8 or abs(Phi(1e8) - 1.0) > 1e-6:
        raise ConfigurationError("Phi must satisfy Phi(0)=0 and Phi(inf)=1")
    total, _ = integrate.quad(psidens, 0.0, np.inf, limit=200)
    if abs(total - 1.0) > 1e-8:
        raise ConfigurationError(
            f"psidens must integrate to 1, got {total}")
    if psi_tail_fn is None:
        def psi_tail_fn(rho):
            val, _ = integrate.quad(psidens, rho, np.inf, limit=200)
            return val
    if phi_psi_integral_fn is None:
        def phi_psi_integral_fn(rho):
            val, _ = integrate.quad(lambda r: Phi(r) * psidens(r), 0.0, rho,
                                    limit=200)
            return val
    if w_kr is None:
        w_kr, _ = integrate.quad(
            lambda r: 2.0 * Phi(r) * psidens(r) * psi_tail_fn(r),
            0.0, np.inf, limit=200, epsabs=1e-10)

    radii, dirs = _as_polar(X)
    if dirs.shape[1] != d + 1:
        raise ConfigurationError(
            f"points have ambient dimension {dirs.shape[1]}, expected {d + 1}")
    n = len(radii)
    consts = sphere_constants(d)
    w_k = w_kr * consts.W_KS
    dist = squareform(pdist(dirs)) if n > 1 else np.zeros((1, 1))
    phi_vals = np.array([Phi(r) for r in radii])
    kmat = np.array([[phi_vals[min(i, j, key=lambda k: radii[k])]
                      for j in range(n)] for i in range(n)])
    kmat = kmat * (1.0 - consts.C_d * dist)
    double_sum = float(np.mean(kmat)) - w_k
    bracket = np.array([
        phi_vals[j] * psi_tail_fn(radii[j]) + phi_psi_integral_fn(radii[j])
        - w_kr for j in range(n)])
    single_sum = 2.0 * consts.W_KS * float(np.mean(bracket))
    return _finish_report(double_sum, single_sum, w_k, n)


def mc_cone_discrepancy_oracle(p, X, n_samples, seed, chunk=100_000):
    """Monte Carlo estimate of the squared spherical-cone L2 discrepancy.

    Samples cones C(z*, t; R) with z* uniform on S^d, t uniform on
    [-1, 1] (the t-integral carries total mass 2, hence the factor 2),
    and R distributed with density Phi'.  Returns (estimate, std_error).
    """
    if n_samples < 10_000:
        raise ConfigurationError("need at least 10^4 samples")
    radii, dirs = _as_polar(X, p)
    n = len(radii)
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([int(seed)])))
    scale = p.mu * (1.0 / p.A - 1.0 / p.B)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        z = rng.standard_normal((m, p.d + 1))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        t = rng.uniform(-1.0, 1.0, size=m)
        u = rng.random(m)
        R = np.sqrt(-np.log1p(-u) / scale)
        inside = (dirs @ z.T >= t) & (radii[:, None] >= R)
        counts = inside.sum(axis=0) / n
        true_mass = psi_tail(p, R) * cap_measure(p.d, t)
        dsq = (counts - true_mass)**2
        total += float(dsq.sum())
        total_sq += float((dsq**2).sum())
        done += m
    mean = total / n_samples
    var = max(total_sq / n_samples - mean**2, 0.0)
    est = 2.0 * mean
    se = 2.0 * math.sqrt(var / n_samples)
    return est, se


def wce_sphere_cap(d, Y):
    """Worst-case error on the sphere alone:
    sqrt(C_d [W(S^d) - mean pairwise distance]), the spherical-cap L2
    discrepancy of the directions Y."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[1] != d + 1:
        raise ConfigurationError(
            f"directions have ambient dimension {Y.shape[1]}, expected {d + 1}")
    if np.any(np.abs(np.linalg.norm(Y, axis=1) - 1.0) > 1e-10):
        raise DomainError("directions must be unit vectors")
    n = Y.shape[0]
    consts = sphere_constants(d)
    if n > 1:
        mean_dist = 2.0 * pdist(Y).sum() / n**2
    else:
        mean_dist = 0.0
    return math.sqrt(max(consts.C_d * (consts.W_Sd - mean_dist), 0.0))


def rms_wce_iid(p):
    """The N-independent constant c with E[wce^2] = c / N for N i.i.d.
    psi-distributed points: 1 - (A/B)^mu - W(K)."""
    c = 1.0 - (p.A / p.B)**p.mu - w_kernel(p)
    assert c > 0.0
    return c


def rms_wce_fixed_directions(p, Y):
    """E[wce^2] for fixed directions Y with i.i.d. psi-distributed radii:
    (1/N)(A/B)^mu [2 I_{B/(A+B)}(mu, mu) - 1]
        + W(K_R, psi) C_d [W(S^d) - mean pairwise distance]."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n = Y.shape[0]
    consts = sphere_constants(p.d)
    ibeta = float(reg_beta_i(p.B / (p.A + p.B), p.mu, p.mu))
    first = (1.0 / n) * (p.A / p.B)**p.mu * (2.0 * ibeta - 1.0)
    mean_dist = 2.0 * pdist(Y).sum() / n**2 if n > 1 else 0.0
    second = w_kr_psi(p) * consts.C_d * (consts.W_Sd - mean_dist)
    return first + second


def _kernel_r_psi_integral(p, rho):
    """int_0^inf K_R(r, rho) psi(r) dr
    = Phi(rho) Q(mu, (mu/B) rho^2) + int_0^rho Phi psi."""
    return phi_cdf(p, rho) * psi_tail(p, rho) + phi_psi_integral(p, rho)


def expected_wce_sq_permutation(p, Y, radii):
    """E[wce^2] when the given radii are assigned to the given directions
    by a uniformly random permutation (selection without replacement).

    Three nonnegative parts: the sphere-only discrepancy weighted by the
    off-diagonal radial kernel mean, a diagonal-vs-off-diagonal radial
    comparison at rate 1/N, and a radial discrepancy weighted by W(K_S).
    Radii and directions must be pairwise distinct.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    radii = np.asarray(radii, dtype=float)
    n = Y.shape[0]
    if radii.shape[0] != n:
        raise ConfigurationError("need equally many radii and directions")
    if np.any(radii <= 0):
        raise DomainError("radii must be positive")
    if len(np.unique(radii)) != n:
        raise DomainError("radii must be pairwise distinct")
    if n > 1 and pdist(Y).min() == 0.0:
        raise DomainError("directions must be pairwise distinct")
    if n == 1:
        return float(wce_nakagami(p, SpacePoints(Y, radii)).wce**2)
    consts = sphere_constants(p.d)
    w_kr = w_kr_psi(p)
    kr = phi_cdf(p, np.minimum.outer(radii, radii))
    diag_mean = float(np.trace(kr)) / n
    off_mean = (float(kr.sum()) - float(np.trace(kr))) / (n * (n - 1))
    mean_dist = 2.0 * pdist(Y).sum() / n**2
    term1 = off_mean * consts.C_d * (consts.W_Sd - mean_dist)
    term2 = (1.0 / n) * (diag_mean - off_mean) * (1.0 - consts.W_KS)
    single = _kernel_r_psi_integral(p, radii)
    term3 = (float(np.mean(kr)) + w_kr - 2.0 * float(np.mean(single))
             ) * consts.W_KS
    return term1 + term2 + term3


def radial_discrepancy(p, radii):
    """L2 discrepancy of the radii against the radial density: the wce
    of the one-dimensional rule with kernel K_R(r, rho) = Phi(min)."""
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.shape[0] == 0:
        raise DomainError("need a nonempty list of radii")
    if np.any(radii < 0):
        raise DomainError("radii must be nonnegative")
    w_kr = w_kr_psi(p)
    kr = phi_cdf(p, np.minimum.outer(radii, radii))
    single = _kernel_r_psi_integral(p, radii)
    sq = float(np.mean(kr)) + w_kr - 2.0 * float(np.mean(single))
    return math.sqrt(max(sq, 0.0))


@dataclass(frozen=True)
class StratifiedWcePrediction:
    """Exact expected squared wce of one-point-per-cell stratified
    sampling, with the Monte Carlo uncertainty of the cell distance
    integrals recorded."""

    value: float
    radial_term: float
    angular_term: float
    mean_cell_distance: float
    mean_cell_distance_se: float
    M: int
    K: int


def _cell_mean_distance(t0, t1, phi_width, rng, n_samples):
    """Conditional mean of ||x - y|| for x, y independent uniform in the
    band-sector cell [t0, t1] x [0, phi_width]."""
    ct = np.cos(t0) + rng.random((2, n_samples)) * (np.cos(t1) - np.cos(t0))
    st = np.sqrt(np.maximum(0.0, 1.0 - ct**2))
    ph = rng.random((2, n_samples)) * phi_width
    x = np.stack([st[0] * np.cos(ph[0]), st[0] * np.sin(ph[0]), ct[0]])
    y = np.stack([st[1] * np.cos(ph[1]), st[1] * np.sin(ph[1]), ct[1]])
    dist = np.linalg.norm(x - y, axis=0)
    return float(dist.mean()), float(dist.var(ddof=1) / n_samples)


def stratified_expected_wce_sq(p, partition, shells, seed=0,
                               distance_samples=100_000):
    """Exact E[wce^2] for stratified sampling: one psi-conditioned point
    in each product cell (sphere cell) x (radial shell).

    The radial integrals per shell are one-dimensional quadratures in
    closed-form-reduced variables; the per-cell distance integrals are
    Monte Carlo, shared across congruent cells of the same band.
    Requires an S^2 partition (p.d == 2).
    """
    if p.d != 2:
        raise ConfigurationError("stratified prediction implemented for d=2")
    if abs(shells.mu - p.mu) > 1e-12 or abs(shells.B - p.B) > 1e-12:
        raise ConfigurationError("shells must use the kernel's (mu, B)")
    M, K = partition.M, shells.K
    consts = sphere_constants(2)
    ba = p.B / p.A
    abmu = (p.A / p.B)**p.mu
    # shell boundaries in the variable x = (mu/B) rho^2
    xs = np.concatenate([[0.0],
                         (p.mu / p.B) * shells.boundaries**2,
                         [np.inf]])
    G = np.empty(K)
    H = np.empty(K)
    for k in range(1, K + 1):
        lo, hi = xs[k - 1], xs[k]
        # (1 - Phi(rho)) psi(rho) drho = x^{mu-1} e^{-(B/A) x} dx / Gamma(mu)
        I1, _ = integrate.quad(
            lambda x: x**(p.mu - 1.0) * np.exp(-ba * x)
            * reg_gamma_q(p.mu, x) / math.gamma(p.mu),
            lo, hi, limit=200, epsabs=1e-12, epsrel=1e-10)
        p_hi = reg_gamma_p(p.mu, ba * hi) if np.isfinite(hi) else 1.0
        dPA = abmu * (p_hi - reg_gamma_p(p.mu, ba * lo))
        F_k = 2.0 * K**2 * (I1 - (1.0 - k / K) * dPA)
        H[k - 1] = 1.0 - F_k
        # conditional mean of Phi over the shell, from the closed form
        rho_lo = math.sqrt((p.B / p.mu) * lo)
        rho_hi = (math.sqrt((p.B / p.mu) * hi) if np.isfinite(hi) else np.inf)
        d_phi = (phi_psi_integral(p, rho_hi) if np.isfinite(rho_hi)
                 else 1.0 - abmu) - phi_psi_integral(p, rho_lo)
        G[k - 1] = K * d_phi - H[k - 1]
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([int(seed)])))
    dists = np.empty(len(partition.bands))
    variances = np.empty(len(partition.bands))
    weights = np.array([b[2] for b in partition.bands], dtype=float)
    for i, (t0, t1, m_i) in enumerate(partition.bands):
        dists[i], variances[i] = _cell_mean_distance(
            t0, t1, 2.0 * np.pi / m_i, rng, distance_samples)
    mean_dist = float(np.average(dists, weights=weights))
    mean_dist_se = math.sqrt(float((weights**2 * variances).sum())) / M
    radial = float(np.mean(G)) / (M * K)
    angular = consts.C_d / (M * K) * float(np.mean(H)) * mean_dist
    return StratifiedWcePrediction(
        value=radial + angular, radial_term=radial, angular_term=angular,
        mean_cell_distance=mean_dist, mean_cell_distance_se=mean_dist_se,
        M=M, K=K)


def lambda_k(mu, c, K):
    """The finite mean Lambda_K = (1/K) sum_k Q(mu, c Q^{-1}(mu, k/K)),
    which approaches I_{1/(1+c)}(mu, mu) + 1/(2K) + O(K^{-2})."""
    if mu <= 0:
        raise DomainError("mu must be positive")
    if c <= 1:
        raise DomainError("c must exceed 1")
    if K < 1 or int(K) != K:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    ks = np.arange(1, K + 1) / K
    return float(np.mean(reg_gamma_q(mu, c * inv_reg_gamma_q(mu, ks))))
