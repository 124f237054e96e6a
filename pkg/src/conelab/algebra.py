"""Simple Euclidean Jordan algebras and their symmetric cones.

Three simple families are implemented:

* ``"symR"``  -- real symmetric r x r matrices, Jordan product (xy+yx)/2,
  with n = r(r+1)/2 and Peirce constant d = 1;
* ``"hermC"`` -- complex Hermitian r x r matrices, same product,
  with n = r^2 and d = 2;
* ``"spin"``  -- the spin factor of rank 2: pairs (t, u) with t a real
  scalar and u a real (n-1)-vector, product
  (t,u)(s,v) = (ts + <u,v>, tv + su), so d = n - 2.

Every algebra carries a fixed orthonormal coordinate basis for the trace
form (x|y) = tr(x y).  For the matrix families the basis is E_ii followed
by (E_ij + E_ji)/sqrt(2) for i < j (plus, for the Hermitian family, the
imaginary counterparts (iE_ij - iE_ji)/sqrt(2)); for the spin factor it is
(1/sqrt(2), 0) followed by (0, e_j/sqrt(2)).  The basis order is frozen and
is part of the report format: diagonal block first, then the real
off-diagonal block in row-major (i, j) order, then (Hermitian family only)
the imaginary off-diagonal block in the same order.  In this basis the
transpose of an operator matrix coincides with its adjoint for the trace
form.

Linear operators on an algebra are plain ``numpy`` arrays of shape (n, n)
acting on coordinate vectors; complexified operators are complex arrays of
the same shape.  All values are immutable after construction and every
operation is a pure function.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "Algebra",
    "AlgebraMismatchError",
    "ConeDomainError",
    "EigenConvergenceError",
    "Element",
    "ComplexElement",
    "SingularElementError",
    "SpectralDecomposition",
    "make_algebra",
    "as_complex",
    "jordan_mul",
    "inner",
    "trace",
    "det",
    "inverse",
    "spectral",
    "mult_op",
    "quad_rep",
    "rank_one_op",
    "apply_op",
    "principal_minor",
    "delta_power",
    "peirce_projectors",
    "rank_of",
    "in_cone",
    "in_closure",
    "invariant_polys",
]

FAMILIES = ("symR", "hermC", "spin")

# eigenvalues of magnitude below RANK_RTOL*(1+|x|) count as zero
RANK_RTOL = 1e-10

_JACOBI_SWEEP_CAP = 100
_JACOBI_RTOL = 1e-14
_SQRT2 = np.sqrt(2.0)


class AlgebraMismatchError(ValueError):
    """Operands belong to different algebras."""


class SingularElementError(ArithmeticError):
    """Jordan inverse requested for an element with vanishing determinant."""


class ConeDomainError(ValueError):
    """Argument lies outside the required (open or closed) cone domain."""


class EigenConvergenceError(RuntimeError):
    """The cyclic Jacobi eigensolver failed to converge within its sweep cap."""

    def __init__(self, off_mass: float, sweeps: int):
        self.off_mass = off_mass
        self.sweeps = sweeps
        super().__init__(
            f"Jacobi eigensolver: off-diagonal mass {off_mass:.3e} "
            f"after {sweeps} sweeps"
        )


class Algebra:
    """Descriptor of a simple Euclidean Jordan algebra.

    Stores the family tag and the structure constants (rank ``r``,
    dimension ``n``, Peirce constant ``d``), which always satisfy
    n = r + r(r-1)d/2, and caches the orthonormal coordinate basis.
    """

    __slots__ = ("family", "r", "n", "d", "_basis_stack", "_iu")

    def __init__(self, family: str, r: int, n: int, d: int):
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
        if r < 2:
            raise ValueError("rank must be >= 2 (rank 1 has only scalar structure)")
        if 2 * n != 2 * r + r * (r - 1) * d:
            raise ValueError(f"inconsistent descriptor: n={n}, r={r}, d={d}")
        self.family = family
        self.r = int(r)
        self.n = int(n)
        self.d = int(d)
        if family == "spin":
            self._iu = None
            self._basis_stack = None
        else:
            self._iu = np.triu_indices(r, 1)
            self._basis_stack = self._build_basis()
            self._basis_stack.setflags(write=False)

    def _build_basis(self) -> np.ndarray:
        r = self.r
        iu, ju = self._iu
        m = len(iu)
        s = 1.0 / _SQRT2
        dtype = float if self.family == "symR" else complex
        stack = np.zeros((self.n, r, r), dtype=dtype)
        for k in range(r):
            stack[k, k, k] = 1.0
        for a, (i, j) in enumerate(zip(iu, ju)):
            stack[r + a, i, j] = s
            stack[r + a, j, i] = s
        if self.family == "hermC":
            for a, (i, j) in enumerate(zip(iu, ju)):
                stack[r + m + a, i, j] = 1j * s
                stack[r + m + a, j, i] = -1j * s
        return stack

    # -- constructors ---------------------------------------------------

    def unit(self) -> "Element":
        if self.family == "spin":
            data = np.zeros(self.n)
            data[0] = 1.0
            return Element(self, data, _checked=True)
        dtype = float if self.family == "symR" else complex
        return Element(self, np.eye(self.r, dtype=dtype), _checked=True)

    def zero(self) -> "Element":
        if self.family == "spin":
            return Element(self, np.zeros(self.n), _checked=True)
        dtype = float if self.family == "symR" else complex
        return Element(self, np.zeros((self.r, self.r), dtype=dtype), _checked=True)

    def element(self, data) -> "Element":
        """Wrap family-appropriate storage as an algebra element.

        Matrix families require an exactly symmetric / Hermitian array;
        the spin factor takes a length-n vector (t, u_1, ..., u_{n-1}).
        """
        return Element(self, data)

    def from_coords(self, c) -> "Element":
        c = np.asarray(c)
        if c.shape != (self.n,):
            raise ValueError(f"expected {self.n} coordinates, got shape {c.shape}")
        if np.iscomplexobj(c):
            raise ValueError("complex coordinates: use complex_from_coords")
        return Element(self, self._assemble(c.astype(float)), _checked=True)

    def complex_from_coords(self, c) -> "ComplexElement":
        c = np.asarray(c, dtype=complex)
        if c.shape != (self.n,):
            raise ValueError(f"expected {self.n} coordinates, got shape {c.shape}")
        return ComplexElement(self, data=self._assemble(c), _checked=True)

    def _assemble(self, c: np.ndarray):
        """Inverse of the coordinate map, for real or complex coefficients."""
        if self.family == "spin":
            return c / _SQRT2
        r = self.r
        iu, ju = self._iu
        m = len(iu)
        s = 1.0 / _SQRT2
        if self.family == "symR":
            a = np.zeros((r, r), dtype=c.dtype)
            a[np.arange(r), np.arange(r)] = c[:r]
            a[iu, ju] = s * c[r : r + m]
            a[ju, iu] = s * c[r : r + m]
            return a
        a = np.zeros((r, r), dtype=complex)
        a[np.arange(r), np.arange(r)] = c[:r]
        a[iu, ju] = s * (c[r : r + m] + 1j * c[r + m :])
        a[ju, iu] = s * (c[r : r + m] - 1j * c[r + m :])
        return a

    def basis_element(self, a: int) -> "Element":
        c = np.zeros(self.n)
        c[a] = 1.0
        return self.from_coords(c)

    def frame_idempotent(self, k: int) -> "Element":
        """Partial unit e_k = c_1 + ... + c_k of the canonical Jordan frame."""
        if not 0 <= k <= self.r:
            raise ValueError(f"k={k} outside 0..{self.r}")
        if self.family == "spin":
            data = np.zeros(self.n)
            if k >= 1:
                data[0] += 0.5
                data[1] += 0.5
            if k == 2:
                data[0] += 0.5
                data[1] -= 0.5
            return Element(self, data, _checked=True)
        dtype = float if self.family == "symR" else complex
        a = np.zeros((self.r, self.r), dtype=dtype)
        a[np.arange(k), np.arange(k)] = 1.0
        return Element(self, a, _checked=True)

    # -- misc -------------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Algebra)
            and self.family == other.family
            and self.r == other.r
            and self.n == other.n
        )

    def __hash__(self):
        return hash((self.family, self.r, self.n))

    def __repr__(self):
        return f"Algebra({self.family!r}, r={self.r}, n={self.n}, d={self.d})"

    def describe(self) -> dict:
        return {"family": self.family, "r": self.r, "n": self.n, "d": self.d}


def make_algebra(family: str, *, r: int | None = None, n: int | None = None) -> Algebra:
    """Build an algebra descriptor from its family and rank (or dimension).

    Matrix families are specified by rank ``r``; the spin factor by its
    dimension ``n`` (then r = 2 and d = n - 2).  Rank 1 is rejected.
    """
    if family == "symR":
        if r is None or r < 2:
            raise ValueError("symR requires rank r >= 2")
        return Algebra("symR", r, r * (r + 1) // 2, 1)
    if family == "hermC":
        if r is None or r < 2:
            raise ValueError("hermC requires rank r >= 2")
        return Algebra("hermC", r, r * r, 2)
    if family == "spin":
        if n is None or n < 3:
            raise ValueError("spin requires dimension n >= 3")
        return Algebra("spin", 2, n, n - 2)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def _check_storage(algebra: Algebra, data) -> np.ndarray:
    fam = algebra.family
    if fam == "spin":
        a = np.asarray(data, dtype=float)
        if a.shape != (algebra.n,):
            raise ValueError(f"spin element needs shape ({algebra.n},), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite entries in element storage")
        return a
    r = algebra.r
    if fam == "symR":
        a = np.asarray(data, dtype=float)
        if a.shape != (r, r):
            raise ValueError(f"symR element needs shape ({r},{r}), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite entries in element storage")
        if not np.array_equal(a, a.T):
            raise ValueError("symR storage must be exactly symmetric")
        return a
    a = np.asarray(data, dtype=complex)
    if a.shape != (r, r):
        raise ValueError(f"hermC element needs shape ({r},{r}), got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite entries in element storage")
    if not np.array_equal(a, a.conj().T):
        raise ValueError("hermC storage must be exactly Hermitian")
    return a


class Element:
    """A point of a simple Euclidean Jordan algebra.

    Storage is family specific (symmetric / Hermitian matrix, or the
    (t, u) vector of a spin factor); symmetry is checked exactly on
    construction.  Instances are immutable.
    """

    __slots__ = ("algebra", "data")

    def __init__(self, algebra: Algebra, data, _checked: bool = False):
        self.algebra = algebra
        a = np.asarray(data) if _checked else _check_storage(algebra, data)
        a.setflags(write=False)
        self.data = a

    def coords(self) -> np.ndarray:
        return np.real(_coords(self.algebra, self.data))

    def norm(self) -> float:
        """Trace-form norm sqrt((x|x))."""
        return float(np.linalg.norm(self.coords()))

    def __add__(self, other: "Element") -> "Element":
        if isinstance(other, ComplexElement):
            return as_complex(self) + other
        _same(self, other)
        return Element(self.algebra, self.data + other.data, _checked=True)

    def __sub__(self, other: "Element") -> "Element":
        if isinstance(other, ComplexElement):
            return as_complex(self) - other
        _same(self, other)
        return Element(self.algebra, self.data - other.data, _checked=True)

    def __neg__(self) -> "Element":
        return Element(self.algebra, -self.data, _checked=True)

    def _scaled(self, s):
        if isinstance(s, complex) and s.imag != 0.0:
            return ComplexElement(self.algebra, data=complex(s) * self.data.astype(complex),
                                  _checked=True)
        return Element(self.algebra, float(np.real(s)) * self.data, _checked=True)

    def __rmul__(self, s):
        if np.isscalar(s):
            return self._scaled(s)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (Element, ComplexElement)):
            return jordan_mul(self, other)
        if np.isscalar(other):
            return self._scaled(other)
        return NotImplemented

    def square(self) -> "Element":
        return Element(self.algebra, _square(self.algebra, self.data), _checked=True)

    def trace(self) -> float:
        return float(np.real(_trace(self.algebra, self.data)))

    def det(self) -> float:
        return float(np.real(_det(self.algebra, self.data)))

    def inner(self, other: "Element") -> float:
        return inner(self, other)

    def inv(self) -> "Element":
        return inverse(self)

    def __repr__(self):
        return f"Element({self.algebra.family}, {np.array2string(np.asarray(self.data), precision=4)})"


class ComplexElement:
    """A point of the complexified algebra.

    Construct either from real and imaginary part Elements over one
    algebra, or (internally) from raw complexified storage.  The matrix
    families complexify to complex symmetric (symR) or arbitrary complex
    matrices (hermC: H + iK with H, K Hermitian is a general matrix); the
    spin factor to a complex n-vector.  Jordan operations extend
    bilinearly over the complex field.
    """

    __slots__ = ("algebra", "data")

    def __init__(self, algebra_or_re, im: Element | None = None, *,
                 data=None, _checked: bool = False):
        if isinstance(algebra_or_re, Element):
            re = algebra_or_re
            if im is None or re.algebra != im.algebra:
                raise AlgebraMismatchError("real and imaginary parts need one algebra")
            self.algebra = re.algebra
            a = np.asarray(re.data, dtype=complex) + 1j * np.asarray(im.data)
        else:
            self.algebra = algebra_or_re
            a = np.asarray(data, dtype=complex)
            if not _checked:
                if self.algebra.family == "symR" and not np.array_equal(a, a.T):
                    raise ValueError("complexified symR storage must be symmetric")
                if self.algebra.family == "spin" and a.shape != (self.algebra.n,):
                    raise ValueError("complexified spin storage must be a length-n vector")
                if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
                    raise ValueError("non-finite entries")
        a = np.asarray(a, dtype=complex)
        a.setflags(write=False)
        self.data = a

    @property
    def re(self) -> Element:
        if self.algebra.family == "hermC":
            h = 0.5 * (self.data + self.data.conj().T)
            return Element(self.algebra, h, _checked=True)
        return Element(self.algebra, self.data.real.copy(), _checked=True)

    @property
    def im(self) -> Element:
        if self.algebra.family == "hermC":
            h = (-0.5j) * (self.data - self.data.conj().T)
            return Element(self.algebra, h, _checked=True)
        return Element(self.algebra, self.data.imag.copy(), _checked=True)

    def coords(self) -> np.ndarray:
        return _coords(self.algebra, self.data)

    def conj(self) -> "ComplexElement":
        """Complex conjugation with respect to the real form."""
        if self.algebra.family == "hermC":
            data = self.data.conj().T
        else:
            data = self.data.conj()
        return ComplexElement(self.algebra, data=data, _checked=True)

    def __add__(self, other):
        other = as_complex(other)
        _same(self, other)
        return ComplexElement(self.algebra, data=self.data + other.data, _checked=True)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_complex(other)
        _same(self, other)
        return ComplexElement(self.algebra, data=self.data - other.data, _checked=True)

    def __rsub__(self, other):
        other = as_complex(other)
        _same(self, other)
        return ComplexElement(self.algebra, data=other.data - self.data, _checked=True)

    def __neg__(self):
        return ComplexElement(self.algebra, data=-self.data, _checked=True)

    def __rmul__(self, s):
        if np.isscalar(s):
            return ComplexElement(self.algebra, data=complex(s) * self.data, _checked=True)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, (Element, ComplexElement)):
            return jordan_mul(self, other)
        if np.isscalar(other):
            return ComplexElement(self.algebra, data=complex(other) * self.data, _checked=True)
        return NotImplemented

    def square(self) -> "ComplexElement":
        return ComplexElement(self.algebra, data=_square(self.algebra, self.data),
                              _checked=True)

    def trace(self) -> complex:
        return complex(_trace(self.algebra, self.data))

    def det(self) -> complex:
        return complex(_det(self.algebra, self.data))

    def inv(self) -> "ComplexElement":
        return inverse(self)

    def __repr__(self):
        return f"ComplexElement({self.algebra.family}, {np.array2string(np.asarray(self.data), precision=4)})"


def as_complex(x: Element | ComplexElement) -> ComplexElement:
    if isinstance(x, ComplexElement):
        return x
    return ComplexElement(x.algebra, data=np.asarray(x.data, dtype=complex), _checked=True)


def _same(x, y):
    if x.algebra != y.algebra:
        raise AlgebraMismatchError(f"{x.algebra} vs {y.algebra}")


# ---------------------------------------------------------------------------
# raw storage kernels (dtype agnostic)
# ---------------------------------------------------------------------------


def _coords(algebra: Algebra, a: np.ndarray) -> np.ndarray:
    if algebra.family == "spin":
        return _SQRT2 * a
    r = algebra.r
    iu, ju = algebra._iu
    diag = a[np.arange(r), np.arange(r)]
    upper = a[iu, ju]
    if algebra.family == "symR":
        return np.concatenate([diag, _SQRT2 * upper])
    lower = a[ju, iu]
    # bilinear pairing tr(a b) against the Hermitian basis elements
    re_block = (upper + lower) / _SQRT2
    im_block = 1j * (lower - upper) / _SQRT2
    return np.concatenate([diag, re_block, im_block])


def _raw_mul(algebra: Algebra, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if algebra.family == "spin":
        out = np.empty(algebra.n, dtype=np.result_type(a, b))
        out[0] = a[0] * b[0] + a[1:] @ b[1:]
        out[1:] = a[0] * b[1:] + b[0] * a[1:]
        return out
    return 0.5 * (a @ b + b @ a)


def _square(algebra: Algebra, a: np.ndarray) -> np.ndarray:
    # a @ a of exactly symmetric/Hermitian storage is again exactly so
    if algebra.family == "spin":
        out = np.empty(algebra.n, dtype=a.dtype)
        out[0] = a[0] * a[0] + a[1:] @ a[1:]
        out[1:] = 2.0 * a[0] * a[1:]
        return out
    return a @ a


def _trace(algebra: Algebra, a: np.ndarray):
    if algebra.family == "spin":
        return 2.0 * a[0]
    return np.trace(a)


def _det(algebra: Algebra, a: np.ndarray):
    if algebra.family == "spin":
        return a[0] * a[0] - a[1:] @ a[1:]
    return np.linalg.det(a)


def _inverse(algebra: Algebra, a: np.ndarray) -> np.ndarray:
    dt = _det(algebra, a)
    c = _coords(algebra, a)
    scale = float(np.linalg.norm(c))
    thresh = 1e-12 * max(1.0, scale) ** algebra.r
    if abs(dt) <= thresh:
        raise SingularElementError(
            f"element is singular: |det| = {abs(dt):.3e} <= {thresh:.3e}"
        )
    if algebra.family == "spin":
        out = a.copy()
        out[1:] = -out[1:]
        return out / dt
    return np.linalg.inv(a)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def jordan_mul(x, y):
    """Jordan product x o y (bilinear over the complexification)."""
    _same(x, y)
    alg = x.algebra
    if isinstance(x, ComplexElement) or isinstance(y, ComplexElement):
        c = _raw_mul(alg, as_complex(x).data, as_complex(y).data)
        if alg.family == "symR":
            c = 0.5 * (c + c.T)
        return ComplexElement(alg, data=c, _checked=True)
    c = _raw_mul(alg, x.data, y.data)
    if alg.family == "symR":
        c = 0.5 * (c + c.T)
    elif alg.family == "hermC":
        c = 0.5 * (c + c.conj().T)
    return Element(alg, c, _checked=True)


def trace(x):
    return x.trace()


def det(x):
    return x.det()


def inner(x, y):
    """Trace form (x|y) = tr(x o y); complex-bilinear on the complexification."""
    _same(x, y)
    v = _coords(x.algebra, x.data) @ _coords(y.algebra, y.data)
    if isinstance(x, ComplexElement) or isinstance(y, ComplexElement):
        return complex(v)
    return float(np.real(v))


def inverse(x):
    """Jordan inverse; raises SingularElementError when |det| is below tolerance."""
    if isinstance(x, ComplexElement):
        return ComplexElement(x.algebra, data=_inverse(x.algebra, x.data), _checked=True)
    inv_data = _inverse(x.algebra, x.data)
    if x.algebra.family == "symR":
        inv_data = 0.5 * (inv_data + inv_data.T)
    elif x.algebra.family == "hermC":
        inv_data = 0.5 * (inv_data + inv_data.conj().T)
    return Element(x.algebra, inv_data, _checked=True)


def apply_op(op: np.ndarray, x):
    """Apply an (n, n) coordinate-matrix operator to an element."""
    op = np.asarray(op)
    if isinstance(x, ComplexElement) or np.iscomplexobj(op):
        return x.algebra.complex_from_coords(op @ _coords(x.algebra, x.data))
    return x.algebra.from_coords(op @ x.coords())


def mult_op(x) -> np.ndarray:
    """Matrix of the multiplication operator L(x): v -> x o v.

    Symmetric (resp. complex symmetric) thanks to the associativity of the
    trace form.
    """
    alg = x.algebra
    a = x.data
    is_complex = isinstance(x, ComplexElement)
    if alg.family == "spin":
        L = np.zeros((alg.n, alg.n), dtype=complex if is_complex else float)
        L[0, 0] = a[0]
        L[0, 1:] = a[1:]
        L[1:, 0] = a[1:]
        L[np.arange(1, alg.n), np.arange(1, alg.n)] = a[0]
        return L
    B = alg._basis_stack
    prod = 0.5 * (np.einsum("ij,ajk->aik", a, B) + np.einsum("aij,jk->aik", B, a))
    L = np.einsum("bij,aji->ba", B, prod)
    if not is_complex:
        L = L.real
    return 0.5 * (L + L.T)


def quad_rep(x) -> np.ndarray:
    """Quadratic representation P(x) = 2 L(x)^2 - L(x^2) as a coordinate matrix."""
    L = mult_op(x)
    L2 = mult_op(x.square())
    P = 2.0 * (L @ L) - L2
    return 0.5 * (P + P.T)


def rank_one_op(y) -> np.ndarray:
    """The operator p_y: v -> (v|y) y, as a coordinate matrix."""
    c = _coords(y.algebra, y.data)
    return np.outer(c, c)


class SpectralDecomposition(NamedTuple):
    """Eigenvalues (descending) and a Jordan frame of primitive idempotents."""

    eigenvalues: np.ndarray
    frame: tuple


def _jacobi_eigh(a0: np.ndarray, hermitian: bool):
    """Cyclic Jacobi diagonalization for small symmetric/Hermitian matrices.

    Converges when the off-diagonal Frobenius mass drops below
    1e-14 * ||a0||_F; capped at 100 sweeps.
    """
    n = a0.shape[0]
    a = a0.astype(complex if hermitian else float).copy()
    v = np.eye(n, dtype=a.dtype)
    norm0 = float(np.linalg.norm(a0))
    if norm0 == 0.0:
        return np.zeros(n), np.eye(n, dtype=a.dtype)
    tol = _JACOBI_RTOL * norm0
    off = np.inf
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(_JACOBI_SWEEP_CAP):
        off = float(np.linalg.norm(a[off_mask]))
        if off <= tol:
            w = np.real(np.diagonal(a)).copy()
            order = np.argsort(-w, kind="stable")
            return w[order], v[:, order]
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) == 0.0:
                    continue
                if hermitian:
                    phase = apq / abs(apq)
                    m = abs(apq)
                else:
                    phase = 1.0
                    m = apq
                theta = (a[q, q].real - a[p, p].real) / (2.0 * m)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                j = np.eye(n, dtype=a.dtype)
                j[p, p] = c
                j[q, q] = c
                j[p, q] = s * phase
                j[q, p] = -s * np.conjugate(phase)
                a = j.conj().T @ a @ j
                v = v @ j
    raise EigenConvergenceError(off, _JACOBI_SWEEP_CAP)


def spectral(x: Element) -> SpectralDecomposition:
    """Spectral decomposition x = sum_i lambda_i c_i with a Jordan frame.

    Eigenvalues are sorted in descending order; the frame is deterministic
    for a fixed input (Jacobi rotation output, reordered by a stable sort;
    closed form for the spin factor).
    """
    alg = x.algebra
    if alg.family == "spin":
        t, u = x.data[0], x.data[1:]
        nu = float(np.linalg.norm(u))
        if nu == 0.0:
            w = np.zeros(alg.n - 1)
            w[0] = 1.0
        else:
            w = u / nu
        lam = np.array([t + nu, t - nu])
        c1 = np.concatenate([[0.5], 0.5 * w])
        c2 = np.concatenate([[0.5], -0.5 * w])
        frame = (Element(alg, c1, _checked=True), Element(alg, c2, _checked=True))
        return SpectralDecomposition(lam, frame)
    w, v = _jacobi_eigh(x.data, hermitian=(alg.family == "hermC"))
    frame = []
    for i in range(alg.r):
        ci = np.outer(v[:, i], v[:, i].conj())
        if alg.family == "symR":
            ci = 0.5 * (ci.real + ci.real.T)
        else:
            ci = 0.5 * (ci + ci.conj().T)
        frame.append(Element(alg, ci, _checked=True))
    return SpectralDecomposition(w, tuple(frame))


def _rank_tol(x: Element) -> float:
    return RANK_RTOL * (1.0 + x.norm())


def rank_of(x: Element) -> int:
    lam = spectral(x).eigenvalues
    return int(np.sum(np.abs(lam) > _rank_tol(x)))


def in_cone(x: Element) -> bool:
    lam = spectral(x).eigenvalues
    return bool(np.all(lam > _rank_tol(x)))


def in_closure(x: Element) -> bool:
    lam = spectral(x).eigenvalues
    return bool(np.all(lam > -_rank_tol(x)))


def principal_minor(k: int, x: Element | ComplexElement):
    """k-th principal minor for the canonical Jordan frame.

    Matrix families: determinant of the leading k x k block.  Spin factor:
    Delta_1(x) = t + u_1 (projection onto the canonical primitive
    idempotent (1/2, (1/2, 0, ...))) and Delta_2 = det(x).
    """
    alg = x.algebra
    if not 1 <= k <= alg.r:
        raise ValueError(f"k={k} outside 1..{alg.r}")
    if alg.family == "spin":
        val = x.data[0] + x.data[1] if k == 1 else _det(alg, x.data)
    elif k < alg.r:
        val = np.linalg.det(x.data[:k, :k])
    else:
        val = _det(alg, x.data)
    if isinstance(x, ComplexElement):
        return complex(val)
    return float(np.real(val))


def delta_power(s: Sequence[complex], x: Element) -> complex:
    """Generalized power Delta_s(x) = prod_k Delta_k(x)^(s_k - s_{k+1}).

    Defined on the open cone, where all principal minors are positive;
    complex exponents are taken through the real logarithms of the minors,
    so the value is real and positive for real s.
    """
    alg = x.algebra
    s = np.asarray(s, dtype=complex)
    if s.shape != (alg.r,):
        raise ValueError(f"s must have length r={alg.r}")
    if not in_cone(x):
        raise ConeDomainError("delta_power requires a point of the open cone")
    exps = s - np.append(s[1:], 0.0)
    logs = np.array([np.log(principal_minor(k, x)) for k in range(1, alg.r + 1)])
    return complex(np.exp(np.sum(exps * logs)))


def peirce_projectors(c: Element):
    """Orthogonal projectors onto the Peirce spaces J(c,1), J(c,1/2), J(c,0).

    Requires c idempotent (within tolerance); the projectors are the
    spectral projections of L(c) for eigenvalues 1, 1/2, 0, computed as
    exact polynomials in L(c).
    """
    resid = (c.square() - c).norm()
    if resid > 1e-8 * (1.0 + c.norm() ** 2):
        raise ValueError(f"element is not idempotent: |c^2 - c| = {resid:.3e}")
    L = mult_op(c)
    eye = np.eye(c.algebra.n)
    L2 = L @ L
    p1 = 2.0 * L2 - L
    phalf = 4.0 * (L - L2)
    p0 = eye - 3.0 * L + 2.0 * L2
    return (0.5 * (p1 + p1.T), 0.5 * (phalf + phalf.T), 0.5 * (p0 + p0.T))


def invariant_polys(x: Element) -> tuple[float, float]:
    """The two degree-2 invariants ((d/2)(tr x)^2 + tr(x^2), (tr x)^2 - tr(x^2))."""
    d = x.algebra.d
    t1 = x.trace()
    t2 = x.square().trace()
    return (0.5 * d * t1 * t1 + t2, t1 * t1 - t2)
