"""Samplers and quadrature for cone integrals.

Three ingredients back the Monte Carlo verification of the integral
identities:

* ``sample_riesz`` draws from the normalized density
  e^{-tr x} (det x)^(mu - n/r) / Gamma_Omega(mu) on the open cone.  Matrix
  families use the Bartlett construction Y = T T* with lower-triangular T,
  diagonal entries sqrt(Gamma(mu - (j-1)d/2)) and strictly lower entries
  Gaussian with variance 1/2 per real coordinate (the e^{-tr} convention
  forces that 1/2).  The rank-2 spin factor samples its eigenvalue pair by
  rejection and attaches a uniformly random frame.
* ``sample_orbit`` realizes the boundary-orbit measures e^{-tr y} d nu_k
  as Gaussian pushforwards Y = B B* with an r x k factor; these are
  probability measures (the Riesz normalization makes the total mass one),
  so plain sample means estimate the orbit integrals.  The spin rank-one
  orbit has no Gaussian factorization and is sampled analytically as
  lambda c with lambda ~ Gamma(d) and c a uniformly random primitive
  idempotent.
* ``rank2_expectation`` / ``rank2_laplace_transform`` integrate rank-2
  cone expectations by quadrature: Gauss-Jacobi in the eigenvalue ratio
  (absorbing both endpoint powers of the joint eigenvalue density
  exactly), an exact or generalized Gauss-Laguerre radial integral, and a
  trapezoid rule over the frame circle.  They provide the sampler-free
  oracle for the Monte Carlo paths and the Laplace-transform target for
  the tube kernel.

Gamma variates are generated from Generator primitives only (squared
normals for half-integer shapes, a standard cube-of-Gaussian rejection
otherwise) so that results are reproducible from the seed alone.
Estimators split their work into fixed-size chunks with per-chunk seeds
spawned from the master seed and merge partial sums in chunk order, so
the estimate is independent of the number of worker threads (set with the
``CONELAB_WORKERS`` environment variable).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, loggamma, roots_genlaguerre, roots_jacobi

from .algebra import (
    Algebra,
    ComplexElement,
    ConeDomainError,
    Element,
    as_complex,
    inner,
)
from .conefun import log_gamma_cone

__all__ = [
    "OperatorEstimate",
    "QuadratureError",
    "gamma_variates",
    "sample_riesz",
    "sample_orbit",
    "rank_one_samples",
    "estimate_operator_mean",
    "riesz_moment_estimate",
    "orbit_identity_estimate",
    "rank2_expectation",
    "rank2_laplace_transform",
]

_SQRT_HALF = math.sqrt(0.5)


class QuadratureError(RuntimeError):
    """Requested quadrature tolerance unreachable within the refinement cap."""


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("CONELAB_WORKERS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# gamma variates
# ---------------------------------------------------------------------------


def _gamma_mt(rng: np.random.Generator, a: float, size: int) -> np.ndarray:
    """Cube-of-Gaussian rejection sampler for Gamma(a, 1), a >= 1."""
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(size)
    need = np.ones(size, dtype=bool)
    while need.any():
        k = int(need.sum())
        x = rng.standard_normal(k)
        v = (1.0 + c * x) ** 3
        u = rng.random(k)
        pos = v > 0.0
        logv = np.log(np.where(pos, v, 1.0))
        ok = pos & (np.log(u) < 0.5 * x * x + d - d * v + d * logv)
        idx = np.nonzero(need)[0][ok]
        out[idx] = d * v[ok]
        need[idx] = False
    return out


def gamma_variates(rng: np.random.Generator, shape: float, size: int) -> np.ndarray:
    """Reproducible Gamma(shape, 1) variates built from Generator primitives.

    Half-integer shapes use sums of squared normals; general shapes use
    rejection, with the standard power boost below shape one.
    """
    if shape <= 0.0:
        raise ValueError(f"gamma shape must be positive, got {shape}")
    two_shape = 2.0 * shape
    if abs(two_shape - round(two_shape)) < 1e-12:
        k = int(round(two_shape))
        z = rng.standard_normal((size, k))
        return 0.5 * np.einsum("sk,sk->s", z, z)
    if shape >= 1.0:
        return _gamma_mt(rng, shape, size)
    g = _gamma_mt(rng, shape + 1.0, size)
    u = rng.random(size)
    return g * u ** (1.0 / shape)


# ---------------------------------------------------------------------------
# cone and orbit samplers
# ---------------------------------------------------------------------------


def _riesz_raw_batch(algebra: Algebra, mu: float, rng: np.random.Generator,
                     size: int) -> np.ndarray:
    edge = (algebra.r - 1) * algebra.d / 2.0
    if not mu > edge:
        raise ConeDomainError(f"sampler requires mu > (r-1)d/2 = {edge}; got {mu}")
    r, d = algebra.r, algebra.d
    if algebra.family == "symR":
        t = np.zeros((size, r, r))
        for j in range(r):
            t[:, j, j] = np.sqrt(gamma_variates(rng, mu - j * d / 2.0, size))
        il = np.tril_indices(r, -1)
        t[:, il[0], il[1]] = rng.standard_normal((size, len(il[0]))) * _SQRT_HALF
        y = np.einsum("sij,skj->sik", t, t)
        return 0.5 * (y + np.swapaxes(y, 1, 2))
    if algebra.family == "hermC":
        t = np.zeros((size, r, r), dtype=complex)
        for j in range(r):
            t[:, j, j] = np.sqrt(gamma_variates(rng, mu - j * d / 2.0, size))
        il = np.tril_indices(r, -1)
        m = len(il[0])
        z = (rng.standard_normal((size, m)) + 1j * rng.standard_normal((size, m)))
        t[:, il[0], il[1]] = z * _SQRT_HALF
        y = np.einsum("sij,skj->sik", t, t.conj())
        return 0.5 * (y + np.swapaxes(y, 1, 2).conj())
    # spin: eigenvalue-pair rejection with a uniform frame
    lam1, lam2 = _spin_eigenvalue_pairs(algebra, mu, rng, size)
    w = rng.standard_normal((size, algebra.n - 1))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    out = np.empty((size, algebra.n))
    out[:, 0] = 0.5 * (lam1 + lam2)
    out[:, 1:] = 0.5 * (lam1 - lam2)[:, None] * w
    return out


def _spin_eigenvalue_pairs(algebra: Algebra, mu: float, rng: np.random.Generator,
                           size: int):
    """Ordered eigenvalue pairs with density ~ e^-(l1+l2) (l1 l2)^(mu-n/2) |l1-l2|^d.

    Proposal: independent Gamma(a) and Gamma(a+d) with a = mu - d/2 and a
    fair coin for which coordinate carries the boosted shape; accept with
    probability |x-y|^d / (x^d + y^d).
    """
    a = mu - algebra.d / 2.0
    d = algebra.d
    l1 = np.empty(size)
    l2 = np.empty(size)
    need = np.ones(size, dtype=bool)
    while need.any():
        k = int(need.sum())
        boosted = rng.random(k) < 0.5
        x = np.where(boosted,
                     gamma_variates(rng, a + d, k),
                     gamma_variates(rng, a, k))
        y = np.where(boosted,
                     gamma_variates(rng, a, k),
                     gamma_variates(rng, a + d, k))
        # the two gamma draws above consume identical stream amounts per lane
        accept = rng.random(k) < np.abs(x - y) ** d / (x ** d + y ** d)
        idx = np.nonzero(need)[0][accept]
        l1[idx] = np.maximum(x, y)[accept]
        l2[idx] = np.minimum(x, y)[accept]
        need[idx] = False
    return l1, l2


def sample_riesz(algebra: Algebra, mu: float, rng: np.random.Generator) -> Element:
    """One draw from the normalized cone density e^{-tr} (det)^(mu - n/r)/Gamma_Omega(mu)."""
    raw = _riesz_raw_batch(algebra, mu, rng, 1)[0]
    return Element(algebra, raw, _checked=True)


def _orbit_raw_batch(algebra: Algebra, k: int, rng: np.random.Generator,
                     size: int) -> np.ndarray:
    if not 1 <= k <= algebra.r - 1:
        raise ValueError(f"orbit index k={k} outside 1..r-1")
    if algebra.family == "symR":
        b = rng.standard_normal((size, algebra.r, k)) * _SQRT_HALF
        y = np.einsum("sij,skj->sik", b, b)
        return 0.5 * (y + np.swapaxes(y, 1, 2))
    if algebra.family == "hermC":
        b = (rng.standard_normal((size, algebra.r, k))
             + 1j * rng.standard_normal((size, algebra.r, k))) * _SQRT_HALF
        y = np.einsum("sij,skj->sik", b, b.conj())
        return 0.5 * (y + np.swapaxes(y, 1, 2).conj())
    if k != 1:
        raise ValueError("spin factor has no Gaussian factorization for k > 1")
    # rank-one ray lambda c: the scalar weight and rotation invariance force
    # lambda ~ Gamma(d, 1) with a uniformly random primitive idempotent c
    lam = gamma_variates(rng, float(algebra.d), size)
    w = rng.standard_normal((size, algebra.n - 1))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    out = np.empty((size, algebra.n))
    out[:, 0] = 0.5 * lam
    out[:, 1:] = 0.5 * lam[:, None] * w
    return out


def sample_orbit(algebra: Algebra, k: int, rng: np.random.Generator) -> Element:
    """One draw from the probability measure e^{-tr y} d nu_k on the rank-k orbit."""
    raw = _orbit_raw_batch(algebra, k, rng, 1)[0]
    return Element(algebra, raw, _checked=True)


def rank_one_samples(algebra: Algebra, n_samples: int, master_seed: int) -> list[Element]:
    """Deterministic batch of rank-one orbit samples (all families)."""
    rng = np.random.default_rng(np.random.SeedSequence(master_seed))
    raw = _orbit_raw_batch(algebra, 1, rng, n_samples)
    return [Element(algebra, raw[i], _checked=True) for i in range(n_samples)]


# ---------------------------------------------------------------------------
# batched operator assembly
# ---------------------------------------------------------------------------


def _batch_coords(algebra: Algebra, raw: np.ndarray) -> np.ndarray:
    if algebra.family == "spin":
        return math.sqrt(2.0) * raw
    return np.real(np.einsum("sij,aji->sa", raw, algebra._basis_stack,
                             optimize=True))


def _batch_quad_rep(algebra: Algebra, raw: np.ndarray) -> np.ndarray:
    """P(Y) coordinate matrices for a stack of real cone points."""
    if algebra.family != "spin":
        b = algebra._basis_stack
        w = np.einsum("aij,sjk->saik", b, raw)
        p = np.einsum("saik,sbki->sab", w, w)
        return np.real(p)
    size = raw.shape[0]
    n = algebra.n
    t = raw[:, 0]
    u = raw[:, 1:]
    uu = np.einsum("si,si->s", u, u)
    p = np.zeros((size, n, n))
    p[:, 0, 0] = t * t + uu
    p[:, 0, 1:] = 2.0 * t[:, None] * u
    p[:, 1:, 0] = p[:, 0, 1:]
    p[:, 1:, 1:] = 2.0 * np.einsum("si,sj->sij", u, u)
    idx = np.arange(1, n)
    p[:, idx, idx] += (t * t - uu)[:, None]
    return p


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorEstimate:
    """Monte Carlo mean of an operator-valued integrand with standard errors.

    ``mean`` is symmetrized; the pre-symmetrization asymmetry is recorded
    in ``sym_defect``.  Deterministic for fixed (seed, n_samples),
    independent of the worker count.
    """

    mean: np.ndarray
    stderr: np.ndarray
    n_samples: int
    seed: int
    sym_defect: float

    def describe(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "seed": self.seed,
            "sym_defect": self.sym_defect,
            "mean": self.mean.tolist(),
            "stderr": self.stderr.tolist(),
        }


def _chunk_plan(n_samples: int, chunk_size: int) -> list[int]:
    full, rem = divmod(n_samples, chunk_size)
    return [chunk_size] * full + ([rem] if rem else [])


def _merge_moment_chunks(parts, n_samples: int, seed: int) -> OperatorEstimate:
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / n_samples
    var = np.maximum(s2 / n_samples - mean * mean, 0.0) * (n_samples / (n_samples - 1.0))
    stderr = np.sqrt(var / n_samples)
    if mean.ndim == 2:
        defect = float(np.linalg.norm(mean - mean.T))
        mean = 0.5 * (mean + mean.T)
    else:
        defect = 0.0
    return OperatorEstimate(mean, stderr, n_samples, seed, defect)


def _run_chunks(chunk_eval, sizes, seeds):
    workers = worker_count()
    if workers == 1:
        return [chunk_eval(i, sizes[i], seeds[i]) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(chunk_eval, i, sizes[i], seeds[i])
                   for i in range(len(sizes))]
        return [f.result() for f in futures]


def estimate_operator_mean(sampler: Callable[[np.random.Generator], Element],
                           f: Callable[[Element], np.ndarray],
                           n_samples: int,
                           master_seed: int,
                           *,
                           chunk_size: int = 4096) -> OperatorEstimate:
    """Mean and elementwise standard error of f over independent draws.

    ``sampler(rng)`` produces one Element per call; ``f`` maps it to an
    operator matrix (or scalar).  Work is split into fixed-size chunks
    with seeds spawned from ``master_seed`` and merged in chunk order.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    sizes = _chunk_plan(n_samples, chunk_size)
    seeds = np.random.SeedSequence(master_seed).spawn(len(sizes))

    def chunk_eval(index, size, seed):
        rng = np.random.default_rng(seed)
        s1 = None
        s2 = None
        for j in range(size):
            y = sampler(rng)
            try:
                val = np.asarray(f(y), dtype=float)
            except Exception as exc:
                raise RuntimeError(
                    f"integrand failed at chunk {index}, sample {j}: {exc}"
                ) from exc
            if s1 is None:
                s1 = np.zeros_like(val)
                s2 = np.zeros_like(val)
            s1 += val
            s2 += val * val
        return s1, s2

    parts = _run_chunks(chunk_eval, sizes, seeds)
    return _merge_moment_chunks(parts, n_samples, master_seed)


def riesz_moment_estimate(algebra: Algebra, mu: float, n_samples: int,
                          master_seed: int, *,
                          chunk_size: int = 20000) -> OperatorEstimate:
    """Vectorized estimate of E[mu P(Y) - (d/2) p_Y] under the cone sampler.

    The exact mean is mu (mu+1)(mu - d/2) times the identity.
    """
    sizes = _chunk_plan(n_samples, chunk_size)
    seeds = np.random.SeedSequence(master_seed).spawn(len(sizes))
    d = algebra.d

    def chunk_eval(index, size, seed):
        rng = np.random.default_rng(seed)
        raw = _riesz_raw_batch(algebra, mu, rng, size)
        p = _batch_quad_rep(algebra, raw)
        c = _batch_coords(algebra, raw)
        vals = mu * p - (d / 2.0) * np.einsum("sa,sb->sab", c, c)
        return vals.sum(axis=0), (vals * vals).sum(axis=0)

    parts = _run_chunks(chunk_eval, sizes, seeds)
    return _merge_moment_chunks(parts, n_samples, master_seed)


def orbit_identity_estimate(algebra: Algebra, k: int, n_samples: int,
                            master_seed: int, *,
                            chunk_size: int = 20000) -> OperatorEstimate:
    """Vectorized estimate of E[r_k(Y)] under the rank-k orbit sampler.

    The boundary identity makes the exact mean the identity operator.
    """
    if not 2 <= k <= algebra.r - 1:
        raise ValueError(f"k={k} outside 2..r-1")
    sizes = _chunk_plan(n_samples, chunk_size)
    seeds = np.random.SeedSequence(master_seed).spawn(len(sizes))
    d = algebra.d
    coeff = 4.0 / (k * (k - 1) * (k * d + 2.0) * d)

    def chunk_eval(index, size, seed):
        rng = np.random.default_rng(seed)
        raw = _orbit_raw_batch(algebra, k, rng, size)
        p = _batch_quad_rep(algebra, raw)
        c = _batch_coords(algebra, raw)
        vals = coeff * (k * p - np.einsum("sa,sb->sab", c, c))
        return vals.sum(axis=0), (vals * vals).sum(axis=0)

    parts = _run_chunks(chunk_eval, sizes, seeds)
    return _merge_moment_chunks(parts, n_samples, master_seed)


# ---------------------------------------------------------------------------
# rank-2 quadrature
# ---------------------------------------------------------------------------


def _rank2_frames(algebra: Algebra, n_theta: int):
    """Uniformly spaced ordered Jordan frames (c1, c2) on the frame circle.

    Only families of dimension three have a one-dimensional frame
    manifold; higher spin factors would need sphere quadrature.
    """
    if algebra.r != 2:
        raise ValueError("rank-2 quadrature needs a rank-2 algebra")
    if algebra.family == "symR":
        theta = np.linspace(0.0, np.pi, n_theta, endpoint=False)
        q = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        qp = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
        c1 = np.einsum("ti,tj->tij", q, q)
        c2 = np.einsum("ti,tj->tij", qp, qp)
        return c1, c2
    if algebra.family == "spin" and algebra.n == 3:
        theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
        w = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        c1 = np.concatenate([np.full((n_theta, 1), 0.5), 0.5 * w], axis=1)
        c2 = np.concatenate([np.full((n_theta, 1), 0.5), -0.5 * w], axis=1)
        return c1, c2
    raise NotImplementedError(
        "frame quadrature is implemented for the three-dimensional rank-2 "
        "families (symR r=2, spin n=3); higher spin factors support only "
        "eigenvalue integrands"
    )


def _jacobi_nodes(algebra: Algebra, mu: float, n_xi: int):
    """Nodes/weights for int_0^1 g(xi) xi^(mu - n/r) (1 - xi)^d dxi."""
    alpha = float(algebra.d)
    beta = mu - algebra.n / algebra.r
    if beta <= -1.0:
        raise ConeDomainError(f"quadrature requires mu > n/r - 1; got {mu}")
    x, w = roots_jacobi(n_xi, alpha, beta)
    xi = 0.5 * (x + 1.0)
    w = w * 0.5 ** (alpha + beta + 1.0)
    return xi, w


def _rank2_pass(algebra: Algebra, mu, f, f_spectral, boundary_k,
                n_theta: int, n_xi: int, n_rad: int):
    """One fixed-order evaluation of the normalized rank-2 expectation."""
    if boundary_k is not None:
        if boundary_k != 1:
            raise ValueError("only the rank-one boundary orbit is integrable here")
        lam, wl = roots_genlaguerre(n_rad, float(algebra.d) - 1.0)
        c1, _ = _rank2_frames(algebra, n_theta)
        total = None
        norm = math.exp(gammaln(float(algebra.d)))
        for t in range(c1.shape[0]):
            for i in range(n_rad):
                y = Element(algebra, lam[i] * c1[t], _checked=True)
                val = np.asarray(f(y), dtype=float)
                contrib = wl[i] * val / (c1.shape[0] * norm)
                total = contrib if total is None else total + contrib
        return total
    alpha = 2.0 * mu - algebra.n + algebra.d + 1.0
    xi, wxi = _jacobi_nodes(algebra, mu, n_xi)
    tau, wtau = roots_genlaguerre(n_rad, alpha)
    if f_spectral is not None:
        # frame independent: no angular loop
        total = None
        weight_sum = 0.0
        for j in range(n_xi):
            rho = 1.0 + xi[j]
            lam1 = tau / rho
            base = wxi[j] * rho ** (-(alpha + 1.0))
            vals = None
            for i in range(n_rad):
                v = np.asarray(f_spectral(lam1[i], xi[j] * lam1[i]), dtype=float)
                v = wtau[i] * v
                vals = v if vals is None else vals + v
            contrib = base * vals
            total = contrib if total is None else total + contrib
            weight_sum += base * wtau.sum()
        return total / weight_sum
    c1s, c2s = _rank2_frames(algebra, n_theta)
    total = None
    weight_sum = 0.0
    for t in range(n_theta):
        for j in range(n_xi):
            rho = 1.0 + xi[j]
            base = wxi[j] * rho ** (-(alpha + 1.0)) / n_theta
            m = c1s[t] + xi[j] * c2s[t]
            for i in range(n_rad):
                lam1 = tau[i] / rho
                raw = lam1 * m
                y = Element(algebra, raw, _checked=True)
                val = np.asarray(f(y), dtype=float)
                contrib = base * wtau[i] * val
                total = contrib if total is None else total + contrib
            weight_sum += base * wtau.sum()
    return total / weight_sum


def rank2_expectation(algebra: Algebra, f=None, *, f_spectral=None, mu=None,
                      boundary_k=None, tol: float = 1e-8,
                      max_doublings: int = 6):
    """Normalized rank-2 cone expectation by deterministic quadrature.

    With ``mu`` set, computes E[f(Y)] for the cone density
    e^{-tr}(det)^(mu - n/r)/Gamma_Omega(mu); with ``boundary_k=1``, for the
    rank-one orbit measure.  ``f`` maps an Element to a scalar or array;
    ``f_spectral(lam1, lam2)`` declares a frame-invariant integrand (the
    only form supported on spin factors above dimension three).  Orders
    are doubled until successive passes agree to ``tol`` (relative).
    """
    if (mu is None) == (boundary_k is None):
        raise ValueError("exactly one of mu / boundary_k must be given")
    if f is None and f_spectral is None:
        f_spectral = lambda l1, l2: 1.0
    n_theta, n_xi, n_rad = 16, 20, 20
    prev = None
    for _ in range(max_doublings + 1):
        cur = _rank2_pass(algebra, mu, f, f_spectral, boundary_k,
                          n_theta, n_xi, n_rad)
        if prev is not None:
            scale = np.max(np.abs(cur)) or 1.0
            if np.max(np.abs(cur - prev)) <= tol * scale:
                return cur
        prev = cur
        n_theta *= 2
        n_xi *= 2
        n_rad *= 2
    raise QuadratureError(f"tolerance {tol} unreachable within refinement cap")


def _laplace_pass(algebra: Algebra, mu: float, u: ComplexElement,
                  n_theta: int, n_xi: int):
    """Fixed-order pass of int e^{-(u|v)} dR_mu(v) with exact radial integrals.

    The density operator is quadratic in the radius, so for each frame and
    eigenvalue-ratio node the radial integral is a Gamma function over a
    complex power of the rate q = (u | c1 + xi c2), Re q > 0.
    """
    from .conefun import density_operator_part

    alpha = 2.0 * mu - algebra.n + algebra.d + 1.0
    xi, wxi = _jacobi_nodes(algebra, mu, n_xi)
    c1s, c2s = _rank2_frames(algebra, n_theta)
    n = algebra.n
    num = np.zeros((n, n), dtype=complex)
    den = 0.0
    lg_num = loggamma(alpha + 3.0)
    lg_den = loggamma(alpha + 1.0)
    for t in range(n_theta):
        for j in range(n_xi):
            m_raw = c1s[t] + xi[j] * c2s[t]
            m_el = Element(algebra, m_raw, _checked=True)
            q = complex(inner(as_complex(u), as_complex(m_el)))
            if q.real <= 0.0:
                raise ConeDomainError("Laplace rate has nonpositive real part")
            op = density_operator_part(algebra, mu, m_el)
            radial = np.exp(lg_num - (alpha + 3.0) * np.log(q))
            num += (wxi[j] / n_theta) * radial * op
            rho = 1.0 + xi[j]
            den += (wxi[j] / n_theta) * math.exp(
                lg_den - (alpha + 1.0) * math.log(rho))
    poly = mu * (mu + 1.0) * (mu - algebra.d / 2.0)
    return num / (poly * den)


def rank2_laplace_transform(algebra: Algebra, mu: float, u: ComplexElement,
                            *, tol: float = 1e-9,
                            max_doublings: int = 6) -> np.ndarray:
    """The operator Laplace transform int e^{-(u|v)} dR_mu(v) on a rank-2 cone.

    ``u`` must have real part in the open cone.  Normalized so that the
    value at u = e is the identity; this is the sampler-free target the
    tube kernel must reproduce.
    """
    if algebra.r != 2:
        raise ValueError("rank-2 quadrature needs a rank-2 algebra")
    edge = (algebra.r - 1) * algebra.d / 2.0
    if not mu > edge:
        raise ConeDomainError(f"requires mu > (r-1)d/2 = {edge}")
    u = as_complex(u)
    n_theta, n_xi = 24, 24
    prev = None
    for _ in range(max_doublings + 1):
        cur = _laplace_pass(algebra, mu, u, n_theta, n_xi)
        if prev is not None:
            scale = float(np.max(np.abs(cur))) or 1.0
            if float(np.max(np.abs(cur - prev))) <= tol * scale:
                return cur
        prev = cur
        n_theta *= 2
        n_xi *= 2
    raise QuadratureError(f"tolerance {tol} unreachable within refinement cap")
