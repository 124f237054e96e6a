"""Special functions of a symmetric cone and operator-valued Riesz densities.

Provides the cone Gamma function (scalar and multi-index variants, carried
in signed-log form so large ranks and parameters never overflow), the two
degree-2 moment integrals it controls, the coefficient pair (alpha, beta)
of the rank-one-twisted Riesz density

    r_mu(y) = c(mu) (det y)^mu (mu P(y) - (d/2) p_y),

the boundary-orbit densities r_k, positivity margins, and the numerical
decomposition of rotation-invariant operators into alpha*Id + beta*(.|e)e.

Design notes.  Positivity questions only make sense for real mu, so the
density paths accept real parameters only, while the Gamma paths accept
complex arguments.  Parameters within 1e-8 of the singular set
{0, -1, d/2} are refused instead of regularized: the degeneracy at
mu = d/2 is structural, not a numerical nuisance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import loggamma

from .algebra import (
    Algebra,
    ConeDomainError,
    Element,
    in_closure,
    in_cone,
    invariant_polys,
    quad_rep,
    rank_of,
    rank_one_op,
)

__all__ = [
    "GammaPoleError",
    "SingularParameterError",
    "SignedLog",
    "log_gamma_cone",
    "log_gamma_cone_vec",
    "gamma_cone",
    "gamma_cone_ratio",
    "moment_i20",
    "moment_i11",
    "wallach_system",
    "alpha_beta",
    "RieszDensityValue",
    "riesz_density",
    "boundary_density",
    "positivity_margin",
    "k_invariant_decompose",
    "rank_one_obstruction",
]

_SINGULAR_EPS = 1e-8


class GammaPoleError(ValueError):
    """Cone Gamma function evaluated at a pole.

    Carries the 1-based index ``j`` of the offending factor
    Gamma(s_j - (j-1) d/2).
    """

    def __init__(self, j: int, arg):
        self.j = j
        self.arg = arg
        super().__init__(f"cone Gamma pole: factor j={j} has argument {arg}")


class SingularParameterError(ValueError):
    """Density parameter within 1e-8 of the singular set {0, -1, d/2}."""


@dataclass(frozen=True)
class SignedLog:
    """A real number carried as sign and log of magnitude."""

    sign: float
    log: float

    @property
    def value(self) -> float:
        if self.sign == 0.0:
            return 0.0
        return self.sign * math.exp(self.log)

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0.0 or other.sign == 0.0:
            return SignedLog(0.0, -math.inf)
        return SignedLog(self.sign * other.sign, self.log + other.log)

    @staticmethod
    def of(x: float) -> "SignedLog":
        if x == 0.0:
            return SignedLog(0.0, -math.inf)
        return SignedLog(math.copysign(1.0, x), math.log(abs(x)))


def _is_nonpositive_integer(z: complex) -> bool:
    if abs(z.imag) > 0:
        return False
    re = z.real
    return re <= 0 and abs(re - round(re)) < 1e-12


def log_gamma_cone_vec(algebra: Algebra, s: Sequence[complex]) -> complex:
    """log Gamma_Omega(s) = (n-r)/2 log(2 pi) + sum_j log Gamma(s_j - (j-1)d/2)."""
    s = np.asarray(s, dtype=complex)
    if s.shape != (algebra.r,):
        raise ValueError(f"s must have length r={algebra.r}")
    total = 0.5 * (algebra.n - algebra.r) * math.log(2.0 * math.pi)
    for j in range(1, algebra.r + 1):
        arg = s[j - 1] - (j - 1) * algebra.d / 2.0
        if _is_nonpositive_integer(arg):
            raise GammaPoleError(j, complex(arg))
        total += loggamma(arg)
    return complex(total)


def log_gamma_cone(algebra: Algebra, lam: complex) -> complex:
    """log Gamma_Omega(lambda), the cone Gamma function in signed-log form."""
    return log_gamma_cone_vec(algebra, np.full(algebra.r, complex(lam)))


def gamma_cone(algebra: Algebra, lam: float) -> float:
    """Gamma_Omega(lambda) for real lambda where it is representable."""
    v = log_gamma_cone(algebra, lam)
    if abs(v.imag) > 1e-12 * (1.0 + abs(v.real)):
        raise ValueError(f"Gamma_Omega({lam}) is not positive real: log = {v}")
    return math.exp(v.real)


def gamma_cone_ratio(algebra: Algebra, lam: complex) -> complex:
    """The telescoping ratio Gamma_Omega(lam+1)/Gamma_Omega(lam) = prod_j (lam - (j-1)d/2)."""
    out = 1.0 + 0.0j
    for j in range(1, algebra.r + 1):
        out *= complex(lam) - (j - 1) * algebra.d / 2.0
    return out


def _check_moment_domain(algebra: Algebra, mu: float):
    edge = (algebra.r - 1) * algebra.d / 2.0
    if not mu > edge:
        raise ConeDomainError(
            f"moment integral requires mu > (r-1)d/2 = {edge}; got {mu}"
        )


def moment_i20(algebra: Algebra, mu: float) -> SignedLog:
    """Weighted cone integral of (d/2)(tr x)^2 + tr(x^2): equals
    r(1 + rd/2) mu (mu+1) Gamma_Omega(mu), signed-log scaled."""
    _check_moment_domain(algebra, mu)
    r, d = algebra.r, algebra.d
    poly = r * (1.0 + r * d / 2.0) * mu * (mu + 1.0)
    lg = log_gamma_cone(algebra, mu).real
    return SignedLog.of(poly) * SignedLog(1.0, lg)


def moment_i11(algebra: Algebra, mu: float) -> SignedLog:
    """Weighted cone integral of (tr x)^2 - tr(x^2): equals
    r(r-1) mu (mu - d/2) Gamma_Omega(mu), signed-log scaled."""
    _check_moment_domain(algebra, mu)
    r, d = algebra.r, algebra.d
    poly = r * (r - 1.0) * mu * (mu - d / 2.0)
    lg = log_gamma_cone(algebra, mu).real
    return SignedLog.of(poly) * SignedLog(1.0, lg)


def _check_density_parameter(algebra: Algebra, mu: float):
    if not isinstance(mu, (int, float)) or isinstance(mu, bool):
        raise TypeError("density parameter mu must be real")
    for bad in (0.0, -1.0, algebra.d / 2.0):
        if abs(mu - bad) < _SINGULAR_EPS:
            raise SingularParameterError(
                f"mu={mu} is within {_SINGULAR_EPS} of singular value {bad}"
            )


def wallach_system(algebra: Algebra, mu: float):
    """The reduced 2x2 linear system determining the density coefficients.

    Returns (matrix, rhs) with rhs = (n, r) / (r mu Gamma_Omega(mu)); the
    solution is (alpha, beta).  The determinant of the matrix factors as
    (n - 1)(mu + 1)(mu - d/2).
    """
    r, n, d = algebra.r, algebra.n, algebra.d
    rd2 = (r - 1) * d / 2.0
    m = np.array(
        [
            [(rd2 + 1.0) * mu - (r - 1) * d * d / 4.0 + rd2 + 1.0, mu + rd2 + 1.0],
            [mu + rd2 + 1.0, r * mu + 1.0],
        ]
    )
    gamma = gamma_cone(algebra, mu)
    rhs = np.array([float(n), float(r)]) / (r * mu * gamma)
    return m, rhs


def alpha_beta(algebra: Algebra, mu: float, *, solve: bool = False) -> tuple[float, float]:
    """Coefficients (alpha, beta) of the rotation-covariant Riesz density.

    Closed form: alpha = mu c(mu), beta = -(d/2) c(mu) with
    c(mu) = 1 / (mu (mu+1)(mu - d/2) Gamma_Omega(mu)).  With ``solve=True``
    the reduced 2x2 system is assembled and solved numerically instead,
    which serves as an independent cross-check.
    """
    _check_density_parameter(algebra, mu)
    _check_moment_domain(algebra, mu)
    if solve:
        m, rhs = wallach_system(algebra, mu)
        a, b = np.linalg.solve(m, rhs)
        return float(a), float(b)
    c = log_c_mu(algebra, mu).value
    return mu * c, -(algebra.d / 2.0) * c


def log_c_mu(algebra: Algebra, mu: float) -> SignedLog:
    """The normalizing constant c(mu) = 1/(mu (mu+1)(mu-d/2) Gamma_Omega(mu))."""
    _check_density_parameter(algebra, mu)
    poly = mu * (mu + 1.0) * (mu - algebra.d / 2.0)
    lg = log_gamma_cone(algebra, mu).real
    s = SignedLog.of(poly)
    return SignedLog(s.sign, -s.log - lg)


@dataclass(frozen=True)
class RieszDensityValue:
    """Value of the operator Riesz density: scalar prefactor times operator.

    The prefactor c(mu) (det y)^mu is carried in signed-log form; the
    operator part mu P(y) - (d/2) p_y is a symmetric coordinate matrix.
    """

    prefactor: SignedLog
    operator: np.ndarray

    def assemble(self) -> np.ndarray:
        return self.prefactor.value * self.operator


def density_operator_part(algebra: Algebra, mu: float, y: Element) -> np.ndarray:
    """The operator factor mu P(y) - (d/2) p_y (no cone or parameter checks)."""
    op = mu * quad_rep(y) - (algebra.d / 2.0) * rank_one_op(y)
    return 0.5 * (op + op.T)


def riesz_density(algebra: Algebra, mu: float, y: Element) -> RieszDensityValue:
    """The operator-valued Riesz density r_mu(y) at a point of the open cone.

    r_mu(y) = c(mu) (det y)^mu (mu P(y) - (d/2) p_y); covariant under the
    cone symmetries ell with multiplier chi(ell)^mu, and positive
    semi-definite exactly when mu >= r d / 2.
    """
    if y.algebra != algebra:
        raise ValueError("element belongs to a different algebra")
    if not in_cone(y):
        raise ConeDomainError("riesz_density requires a point of the open cone")
    c = log_c_mu(algebra, mu)
    dt = y.det()
    pref = c * SignedLog(1.0, mu * math.log(dt))
    return RieszDensityValue(pref, density_operator_part(algebra, mu, y))


def boundary_density(algebra: Algebra, k: int, y: Element) -> np.ndarray:
    """Boundary-orbit density r_k(y) = 4/(k(k-1)(kd+2)d) (k P(y) - p_y).

    Defined for 2 <= k <= r-1 on rank-k points of the closed cone, where
    it is positive semi-definite.
    """
    if y.algebra != algebra:
        raise ValueError("element belongs to a different algebra")
    if not 2 <= k <= algebra.r - 1:
        raise ValueError(f"k={k} outside 2..r-1 = 2..{algebra.r - 1}")
    if not in_closure(y):
        raise ConeDomainError("boundary density needs a point of the closed cone")
    rk = rank_of(y)
    if rk != k:
        raise ConeDomainError(f"rank mismatch: rank(y)={rk}, expected {k}")
    d = algebra.d
    coeff = 4.0 / (k * (k - 1) * (k * d + 2.0) * d)
    op = coeff * (k * quad_rep(y) - rank_one_op(y))
    return 0.5 * (op + op.T)


def positivity_margin(algebra: Algebra, mu: float, y: Element) -> float:
    """Smallest eigenvalue of the operator part mu P(y) - (d/2) p_y."""
    if not in_closure(y):
        raise ConeDomainError("positivity margin is defined on the closed cone")
    op = density_operator_part(algebra, mu, y)
    return float(np.linalg.eigvalsh(op)[0])


def k_invariant_decompose(algebra: Algebra, q: np.ndarray) -> tuple[float, float, float]:
    """Best decomposition of a symmetric operator as alpha*Id + beta*(.|e)e.

    Solves the 2x2 trace system Tr Q = alpha n + beta r and
    (Q e | e) = alpha r + beta r^2, and returns (alpha, beta, residual)
    where the residual is the Frobenius distance of Q to the fitted
    rotation-invariant operator.  A small residual certifies invariance
    numerically.
    """
    q = np.asarray(q, dtype=float)
    n, r = algebra.n, algebra.r
    if q.shape != (n, n):
        raise ValueError(f"operator must be {n}x{n}")
    e = algebra.unit()
    ec = e.coords()
    tr_q = float(np.trace(q))
    qee = float(ec @ q @ ec)
    m = np.array([[float(n), float(r)], [float(r), float(r * r)]])
    a, b = np.linalg.solve(m, [tr_q, qee])
    fitted = a * np.eye(n) + b * np.outer(ec, ec)
    resid = float(np.linalg.norm(q - fitted))
    return float(a), float(b), resid


def rank_one_obstruction(samples: Sequence[Element]) -> dict:
    """Monte Carlo witness of the rank-one normalization obstruction.

    For the covariance-forced candidate density S(x) = alpha P(x) on the
    rank-one boundary orbit (alpha = 1 here; the conclusion is scale
    free), every sample satisfies Tr S(x) = (S(x) e | e) = alpha |x|^2, so
    any integral Sigma of S has Tr Sigma = (Sigma e | e).  The identity
    operator instead requires Tr / (. e | e) = n / r > 1, so the
    normalization cannot be met.  Returns the two estimated traces, their
    standard errors, the ratio, and the flag.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise ValueError("need at least two rank-one samples")
    alg = samples[0].algebra
    ec = alg.unit().coords()
    t_vals = np.empty(len(samples))
    q_vals = np.empty(len(samples))
    for i, y in enumerate(samples):
        if y.algebra != alg:
            raise ValueError("samples from mixed algebras")
        if rank_of(y) != 1:
            raise ValueError(f"sample {i} does not have rank one")
        p = quad_rep(y)
        t_vals[i] = np.trace(p)
        q_vals[i] = ec @ p @ ec
    if not np.any(t_vals > 0.0):
        raise ValueError("degenerate sample set: all candidate values vanish")
    nsamp = len(samples)
    t_mean, q_mean = float(t_vals.mean()), float(q_vals.mean())
    t_se = float(t_vals.std(ddof=1) / math.sqrt(nsamp))
    q_se = float(q_vals.std(ddof=1) / math.sqrt(nsamp))
    diff = t_vals - q_vals
    diff_se = float(diff.std(ddof=1) / math.sqrt(nsamp)) if nsamp > 1 else 0.0
    ratio = t_mean / q_mean
    required = alg.n / alg.r
    # the candidate forces ratio 1; the identity operator needs n/r > 1
    obstructed = abs(ratio - 1.0) <= 3.0 * diff_se / abs(q_mean) + 1e-10 and required > 1.0
    return {
        "n_samples": nsamp,
        "trace_mean": t_mean,
        "trace_stderr": t_se,
        "quad_mean": q_mean,
        "quad_stderr": q_se,
        "ratio": ratio,
        "ratio_stderr": diff_se / abs(q_mean),
        "identity_requires": required,
        "obstructed": bool(obstructed),
    }
