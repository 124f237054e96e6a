"""Tube-domain geometry and the operator-valued reproducing kernel.

The tube over a symmetric cone consists of complexified algebra points
z = x + iy with y interior to the cone.  This module provides

* the kernel variable u(z, w) = (z - conj(w)) / 2i, whose real part is
  always interior to the cone;
* a branch-consistent logarithm of det(u) on tube pairs, normalized to be
  real on the diagonal z = w.  Two independent constructions are
  implemented: (A) summing principal logarithms of the eigenvalues of the
  complexified matrix (valid for the matrix families, whose eigenvalues
  stay in the right half-plane when the Hermitian part is positive
  definite), and (B) continuity tracking of arg det along the segment
  s -> Re(u) + i s Im(u), which never meets a zero of det because the real
  part stays interior;
* the operator kernel Q_mu(z, w) = det(u)^(-mu) P(u)^(-1), its Gram-matrix
  certification, and a randomized witness search falsifying positive
  definiteness outside the admissible parameter set;
* the Cayley map from the spectral-norm unit ball and the three
  generators of the biholomorphism group (translations, cone symmetries,
  inversion) with their derivative cocycles.

Certificates store point coordinates in the frozen basis order so that
any verdict can be replayed from its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import (
    Algebra,
    ComplexElement,
    ConeDomainError,
    Element,
    as_complex,
    in_cone,
    inner,
    inverse,
    quad_rep,
)

__all__ = [
    "TubePoint",
    "GramCertificate",
    "u_point",
    "log_det_tube",
    "kernel_q",
    "gram",
    "witness_search",
    "cayley",
    "spectral_norm",
    "translate",
    "act_quad",
    "invert_point",
    "invert_jacobian",
    "wallach_predicted",
]

GRAM_PSD_RTOL = 1e-9
WITNESS_RTOL = 1e-6
_BOUNDARY_DET_MIN = 1e-6


@dataclass(frozen=True)
class TubePoint:
    """A point z = x + iy of the tube, with y interior to the cone."""

    value: ComplexElement

    def __post_init__(self):
        if not in_cone(self.value.im):
            raise ConeDomainError("imaginary part must lie in the open cone")

    @property
    def algebra(self) -> Algebra:
        return self.value.algebra

    def coords(self) -> np.ndarray:
        return self.value.coords()


def tube_point(algebra: Algebra, coords) -> TubePoint:
    return TubePoint(algebra.complex_from_coords(np.asarray(coords, dtype=complex)))


def base_point(algebra: Algebra) -> TubePoint:
    """The distinguished point i e."""
    return TubePoint(ComplexElement(algebra.zero(), algebra.unit()))


def u_point(z: TubePoint, w: TubePoint) -> ComplexElement:
    """The kernel variable (z - conj(w)) / 2i; its real part lies in the cone."""
    zv, wv = z.value, w.value
    num = zv - wv.conj()
    return ComplexElement(zv.algebra, data=num.data / 2j, _checked=True)


def _logdet_eig(algebra: Algebra, u: ComplexElement) -> complex:
    """Principal-branch eigenvalue sum; matrix families only.

    When the Hermitian part of the matrix is positive definite all
    eigenvalues lie in the open right half-plane, so the principal
    logarithms sum to the determination that is real on the diagonal.
    """
    lam = np.linalg.eigvals(u.data)
    if np.any(lam.real <= 0.0):
        raise ConeDomainError("eigenvalue left the right half-plane")
    return complex(np.sum(np.log(lam)))


def _logdet_track(algebra: Algebra, u: ComplexElement) -> complex:
    """Continuity tracking of log det along s -> Re(u) + i s Im(u).

    The real part stays interior to the cone for every s, so the
    determinant never vanishes along the segment.  Steps are refined until
    each per-step phase change is below pi/2.
    """
    x = as_complex(u.re).data
    y = u.im.data
    steps = 8
    max_steps = 1 << 14
    while True:
        svals = np.linspace(0.0, 1.0, steps + 1)
        dets = np.empty(steps + 1, dtype=complex)
        for i, s in enumerate(svals):
            el = ComplexElement(algebra, data=x + 1j * s * y, _checked=True)
            dets[i] = el.det()
        if np.any(dets == 0.0):
            raise ConeDomainError("determinant vanished along the tracking segment")
        ratios = dets[1:] / dets[:-1]
        phases = np.angle(ratios)
        if np.all(np.abs(phases) < 0.5 * math.pi):
            d0 = dets[0].real
            if d0 <= 0.0:
                raise ConeDomainError("segment start must have positive determinant")
            total = math.log(d0) + float(np.sum(np.log(np.abs(ratios))))
            return complex(total, float(np.sum(phases)))
        steps *= 2
        if steps > max_steps:
            raise ConeDomainError("phase tracking failed to resolve the branch")


def log_det_tube(z: TubePoint, w: TubePoint, *, method: str = "auto") -> complex:
    """Branch-consistent log det((z - conj w)/2i), real on the diagonal.

    ``method`` is "auto" (eigenvalues for matrix families, tracking for
    spin factors), "eig", or "track"; the two constructions agree and are
    cross-checked in the test suite.
    """
    u = u_point(z, w)
    alg = u.algebra
    if method == "auto":
        method = "track" if alg.family == "spin" else "eig"
    if method == "eig":
        if alg.family == "spin":
            raise ValueError("eigenvalue method applies to matrix families")
        return _logdet_eig(alg, u)
    if method == "track":
        return _logdet_track(alg, u)
    raise ValueError(f"unknown method {method!r}")


def kernel_q(mu: float, z: TubePoint, w: TubePoint) -> np.ndarray:
    """Operator kernel Q_mu(z, w) = det(u)^(-mu) P(u)^(-1), u = (z - conj w)/2i.

    Hermitian-symmetric in (z, w); the value at (ie, ie) is the identity,
    and single-point values Q_mu(z, z) are positive definite for every
    real mu.
    """
    u = u_point(z, w)
    ld = log_det_tube(z, w)
    pu = quad_rep(u)
    pinv = np.linalg.inv(pu)
    return np.exp(-mu * ld) * pinv


@dataclass(frozen=True)
class GramCertificate:
    """Outcome of a Gram positivity test for the operator kernel.

    The verdict is "PSD" when the minimum eigenvalue clears
    -GRAM_PSD_RTOL times the largest absolute eigenvalue, "witness" when a
    genuinely negative eigenvalue was found, and "PSD-not-falsified" when
    a search budget ran out without finding one (which proves nothing).
    Witness eigenvectors are stored alongside the point coordinates, in
    the frozen basis order, so the certificate can be replayed.
    """

    mu: float
    algebra: dict
    points: list
    min_eig: float
    max_abs_eig: float
    rel_min: float
    verdict: str
    sym_defect: float
    seed: int | None = None
    witness_vectors: list = field(default_factory=list)
    configs_tried: int = 0

    def to_json(self) -> dict:
        return {
            "mu": self.mu,
            "algebra": self.algebra,
            "points": self.points,
            "min_eig": self.min_eig,
            "max_abs_eig": self.max_abs_eig,
            "rel_min": self.rel_min,
            "verdict": self.verdict,
            "sym_defect": self.sym_defect,
            "seed": self.seed,
            "witness_vectors": self.witness_vectors,
            "configs_tried": self.configs_tried,
        }


def _point_list_coords(points: Sequence[TubePoint]) -> list:
    out = []
    for p in points:
        c = p.coords()
        out.append([c.real.tolist(), c.imag.tolist()])
    return out


def gram(mu: float, points: Sequence[TubePoint], *, seed: int | None = None) -> GramCertificate:
    """Assemble the block Gram matrix of the kernel and certify its sign.

    Blocks (i, j) hold Q_mu(z_i, z_j) in the orthonormal coordinates; the
    matrix is symmetrized (defect recorded) before the eigenvalue check.
    """
    points = list(points)
    if not points:
        raise ValueError("need at least one point")
    alg = points[0].algebra
    n = alg.n
    m = len(points)
    big = np.empty((m * n, m * n), dtype=complex)
    for i in range(m):
        for j in range(i, m):
            block = kernel_q(mu, points[i], points[j])
            big[i * n:(i + 1) * n, j * n:(j + 1) * n] = block
            if j > i:
                big[j * n:(j + 1) * n, i * n:(i + 1) * n] = block.conj().T
    defect = float(np.linalg.norm(big - big.conj().T) / max(1.0, np.linalg.norm(big)))
    big = 0.5 * (big + big.conj().T)
    evals, evecs = np.linalg.eigh(big)
    min_eig = float(evals[0])
    max_abs = float(np.max(np.abs(evals)))
    rel = min_eig / max_abs if max_abs > 0 else 0.0
    verdict = "PSD" if min_eig >= -GRAM_PSD_RTOL * max_abs else "witness"
    witnesses = []
    if verdict == "witness":
        for idx in np.nonzero(evals < -WITNESS_RTOL * max_abs)[0]:
            v = evecs[:, idx]
            witnesses.append([v.real.tolist(), v.imag.tolist()])
    return GramCertificate(
        mu=float(mu),
        algebra=alg.describe(),
        points=_point_list_coords(points),
        min_eig=min_eig,
        max_abs_eig=max_abs,
        rel_min=rel,
        verdict=verdict,
        sym_defect=defect,
        seed=seed,
        witness_vectors=witnesses,
    )


# ---------------------------------------------------------------------------
# spectral norm, Cayley map, group generators
# ---------------------------------------------------------------------------


def spectral_norm(z: Element | ComplexElement) -> float:
    """Spectral norm on the complexified algebra.

    Matrix families: largest singular value of the complexified matrix.
    Spin factors: the standard rank-2 formula
    sqrt(h + sqrt(h^2 - |det z|^2)) with h the Hermitian square norm.
    """
    z = as_complex(z)
    alg = z.algebra
    if alg.family != "spin":
        return float(np.linalg.svd(z.data, compute_uv=False)[0])
    h = float(np.sum(np.abs(z.data) ** 2))
    dt = abs(z.det())
    inner_sq = max(h * h - dt * dt, 0.0)
    return math.sqrt(h + math.sqrt(inner_sq))


def cayley(w: Element | ComplexElement) -> TubePoint:
    """Cayley image i (e + w)(e - w)^(-1) of a point of the spectral unit ball."""
    w = as_complex(w)
    alg = w.algebra
    if spectral_norm(w) >= 1.0:
        raise ConeDomainError("Cayley map requires spectral norm below one")
    e = as_complex(alg.unit())
    denom = inverse(e - w)
    img = 1j * ((e + w) * denom)
    return TubePoint(img)


def translate(z: TubePoint, a: Element) -> TubePoint:
    """Real translation z + a; preserves the tube."""
    return TubePoint(z.value + as_complex(a))


def act_quad(a: Element, z: TubePoint) -> TubePoint:
    """Cone symmetry P(a) applied to a tube point (a interior to the cone)."""
    if not in_cone(a):
        raise ConeDomainError("act_quad requires a point of the open cone")
    pa = quad_rep(a)
    return TubePoint(z.algebra.complex_from_coords(pa @ z.coords()))


def invert_point(z: TubePoint) -> TubePoint:
    """The inversion z -> -z^(-1); fixes i e."""
    return TubePoint(-inverse(z.value))


def invert_jacobian(z: TubePoint) -> np.ndarray:
    """Derivative of the inversion at z: P(z)^(-1) as a complex operator."""
    return np.linalg.inv(quad_rep(z.value))


# ---------------------------------------------------------------------------
# witness search
# ---------------------------------------------------------------------------


def wallach_predicted(algebra: Algebra, mu: float, *, eps: float = 1e-9) -> bool:
    """Membership of mu in the admissible set {2,...,r-1} d/2 union [rd/2, inf)."""
    d, r = algebra.d, algebra.r
    if mu >= r * d / 2.0 - eps:
        return True
    for k in range(2, r):
        if abs(mu - k * d / 2.0) <= eps:
            return True
    return False


def _random_cone_point(algebra: Algebra, rng: np.random.Generator,
                       lam_low: float = 0.15, lam_high: float = 2.5) -> Element:
    from .algebra import spectral

    x = algebra.from_coords(rng.standard_normal(algebra.n))
    sd = spectral(x)
    lams = rng.uniform(lam_low, lam_high, size=algebra.r)
    acc = algebra.zero()
    for lam, c in zip(lams, sd.frame):
        acc = acc + float(lam) * c
    return acc


def _random_tube_point(algebra: Algebra, rng: np.random.Generator,
                       kind: int) -> TubePoint:
    """Candidate generator mixing imaginary-axis, Cayley-ball and generic points."""
    if kind == 0:
        # purely imaginary points i a, a interior: real Gram blocks
        return TubePoint(ComplexElement(algebra.zero(), _random_cone_point(algebra, rng)))
    if kind == 1:
        # Cayley image of a ball point
        c = rng.standard_normal(algebra.n) + 1j * rng.standard_normal(algebra.n)
        w = algebra.complex_from_coords(c)
        norm = spectral_norm(w)
        target = rng.uniform(0.1, 0.75)
        w = algebra.complex_from_coords(c * (target / norm))
        return cayley(w)
    x = algebra.from_coords(rng.standard_normal(algebra.n) * rng.uniform(0.3, 1.5))
    y = _random_cone_point(algebra, rng)
    return TubePoint(ComplexElement(x, y))


def _config_points(algebra: Algebra, rng: np.random.Generator) -> list[TubePoint]:
    """One random configuration: cluster, spread, or mixed, sizes 2..6."""
    size = int(rng.integers(2, 7))
    style = int(rng.integers(0, 3))
    pts: list[TubePoint] = []
    if style == 0:
        # near-diagonal cluster around a base point
        base = _random_tube_point(algebra, rng, kind=int(rng.integers(0, 3)))
        eps = rng.uniform(0.05, 0.6)
        pts.append(base)
        while len(pts) < size:
            delta = (rng.standard_normal(algebra.n)
                     + 1j * rng.standard_normal(algebra.n)) * eps
            cand = base.coords() + delta
            p = _try_point(algebra, cand)
            if p is not None:
                pts.append(p)
            else:
                eps *= 0.5
    else:
        kind = int(rng.integers(0, 3)) if style == 1 else None
        while len(pts) < size:
            k = kind if kind is not None else int(rng.integers(0, 3))
            p = _random_tube_point(algebra, rng, kind=k)
            if _boundary_ok(p):
                pts.append(p)
    return [p for p in pts if _boundary_ok(p)] or pts


def _try_point(algebra: Algebra, coords: np.ndarray) -> TubePoint | None:
    try:
        p = tube_point(algebra, coords)
    except ConeDomainError:
        return None
    return p if _boundary_ok(p) else None


def _boundary_ok(p: TubePoint) -> bool:
    # keep conditioning bounded away from the Shilov boundary
    return p.value.im.det() >= _BOUNDARY_DET_MIN


def _refine_points(mu: float, points: list[TubePoint], rng: np.random.Generator,
                   rounds: int = 40) -> list[TubePoint]:
    """Greedy coordinate descent on the relative minimum Gram eigenvalue."""
    alg = points[0].algebra
    coords = np.stack([p.coords() for p in points])
    best = gram(mu, points).rel_min
    step = 0.25
    for _ in range(rounds):
        improved = False
        for i in range(coords.shape[0]):
            for part in (1.0, 1j):
                delta = part * step * rng.standard_normal(alg.n)
                for sign in (1.0, -1.0):
                    cand = coords.copy()
                    cand[i] = cand[i] + sign * delta
                    pts = [_try_point(alg, c) for c in cand]
                    if any(p is None for p in pts):
                        continue
                    val = gram(mu, pts).rel_min
                    if val < best - 1e-15:
                        best = val
                        coords = cand
                        improved = True
                        break
        if not improved:
            step *= 0.5
            if step < 1e-3:
                break
    return [tube_point(alg, c) for c in coords]


def witness_search(algebra: Algebra, mu: float, budget: int, seed: int,
                   *, refine: bool = True) -> GramCertificate:
    """Randomized search for a Gram witness that the kernel is not PSD.

    Draws up to ``budget`` random configurations (point sets of sizes 2 to
    6 mixing clusters, imaginary-axis and Cayley-image points), keeps the
    most negative relative eigenvalue, and optionally refines the best
    candidate by coordinate descent.  The verdict is "witness" only when
    the relative eigenvalue beats the falsification threshold; otherwise
    "PSD-not-falsified", which is explicitly not a proof of positivity.
    Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    best_cert = None
    best_points = None
    for k in range(budget):
        points = _config_points(algebra, rng)
        cert = gram(mu, points, seed=seed)
        if best_cert is None or cert.rel_min < best_cert.rel_min:
            best_cert = cert
            best_points = points
        if cert.rel_min < -WITNESS_RTOL and not refine:
            break
    tried = budget
    if refine and best_points is not None and best_cert.rel_min < 0.0:
        refined = _refine_points(mu, best_points, rng)
        cert = gram(mu, refined, seed=seed)
        if cert.rel_min < best_cert.rel_min:
            best_cert = cert
    verdict = "witness" if best_cert.rel_min < -WITNESS_RTOL else "PSD-not-falsified"
    return GramCertificate(
        mu=best_cert.mu,
        algebra=best_cert.algebra,
        points=best_cert.points,
        min_eig=best_cert.min_eig,
        max_abs_eig=best_cert.max_abs_eig,
        rel_min=best_cert.rel_min,
        verdict=verdict,
        sym_defect=best_cert.sym_defect,
        seed=seed,
        witness_vectors=best_cert.witness_vectors,
        configs_tried=tried,
    )
