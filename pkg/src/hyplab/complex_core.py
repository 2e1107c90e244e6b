"""Elementary building blocks.

Double powers [z]^(a|a') = z^a conj(z)^a', the Euler gamma function, the
gamma function of the complex field Gamma(a)/Gamma(1-a'), the second-order
Bernoulli polynomial, infinite q-products and Jackson's q-gamma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum
from typing import Optional

import numpy as np

from .errors import DomainError, ParameterError

INTEGER_TOL = 1e-9

_TWO_PI = 2.0 * math.pi
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Lanczos rational approximation, g = 607/128, 15 terms (Godfrey's set).
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = np.array([
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
])


@dataclass(frozen=True)
class DoubleExponent:
    """Exponent pair (a, a') of a double power, with a - a' an integer."""

    a: complex
    a_prime: complex

    def __post_init__(self):
        d = complex(self.a) - complex(self.a_prime)
        if abs(d.imag) > INTEGER_TOL or abs(d.real - round(d.real)) > INTEGER_TOL:
            raise ParameterError(
                f"a - a_prime = {d} is not an integer (tol {INTEGER_TOL})")
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "a_prime", complex(self.a_prime))

    @classmethod
    def from_mu(cls, m: int, u: complex) -> "DoubleExponent":
        """Canonical pair a = (m+iu)/2, a' = (-m+iu)/2."""
        m = int(m)
        u = complex(u)
        return cls((m + 1j * u) / 2.0, (-m + 1j * u) / 2.0)

    @property
    def m(self) -> int:
        """The integer a - a'."""
        return int(round((self.a - self.a_prime).real))

    @property
    def total(self) -> complex:
        """a + a', the modulus exponent."""
        return self.a + self.a_prime

    def swap(self) -> "DoubleExponent":
        return DoubleExponent(self.a_prime, self.a)

    def conj(self) -> "DoubleExponent":
        return DoubleExponent(self.a.conjugate(), self.a_prime.conjugate())

    def __add__(self, other: "DoubleExponent") -> "DoubleExponent":
        return DoubleExponent(self.a + other.a, self.a_prime + other.a_prime)

    def __sub__(self, other: "DoubleExponent") -> "DoubleExponent":
        return DoubleExponent(self.a - other.a, self.a_prime - other.a_prime)

    def __neg__(self) -> "DoubleExponent":
        return DoubleExponent(-self.a, -self.a_prime)


def double_power(z, e: DoubleExponent):
    """[z]^(a|a') = |z|^(a+a') exp(i (a-a') arg z), arg in (-pi, pi].

    Single valued because a - a' is an integer.  Accepts scalars or arrays.
    At z = 0 the value is 0 when Re(a+a') > 0, otherwise a DomainError.
    """
    zarr = np.asarray(z, dtype=complex)
    scalar = zarr.ndim == 0
    zarr = np.atleast_1d(zarr)
    r = np.abs(zarr)
    zero = r == 0.0
    if np.any(zero) and e.total.real <= 0:
        raise DomainError("double_power at z=0 with Re(a+a') <= 0")
    out = np.empty_like(zarr)
    nz = ~zero
    out[nz] = r[nz] ** e.total * np.exp(1j * e.m * np.angle(zarr[nz]))
    out[zero] = 0.0
    return complex(out[0]) if scalar else out


def bernoulli_b22(z, omega) -> complex:
    """Second-order Bernoulli polynomial B_{2,2}(z; w1, w2).

    ``omega`` is anything with .omega1/.omega2 attributes or a pair.
    """
    w1, w2 = _unpack_periods(omega)
    if w1 * w2 == 0:
        raise ParameterError("omega1 * omega2 must be nonzero")
    return ((z - (w1 + w2) / 2.0) ** 2 - (w1 ** 2 + w2 ** 2) / 12.0) / (w1 * w2)


def _unpack_periods(omega):
    if hasattr(omega, "omega1"):
        return complex(omega.omega1), complex(omega.omega2)
    w1, w2 = omega
    return complex(w1), complex(w2)


# ---------------------------------------------------------------------------
# Euler gamma
# ---------------------------------------------------------------------------

def log_sin_pi(z):
    """log sin(pi z), overflow-safe for large |Im z| (branch unspecified)."""
    zarr = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty_like(zarr)
    up = zarr.imag > 4.0
    dn = zarr.imag < -4.0
    mid = ~(up | dn)
    out[mid] = np.log(np.sin(np.pi * zarr[mid]))
    # sin(pi z) = -e^{-i pi z}(1 - e^{2 i pi z})/(2i) for Im z >> 0, mirrored below
    out[up] = (-1j * np.pi * zarr[up] + np.log(1.0 - np.exp(2j * np.pi * zarr[up]))
               - np.log(-2j))
    out[dn] = (1j * np.pi * zarr[dn] + np.log(1.0 - np.exp(-2j * np.pi * zarr[dn]))
               - np.log(2j))
    return complex(out[0]) if np.asarray(z).ndim == 0 else out


def log_euler_gamma(z):
    """log Gamma(z) via the Lanczos sum, with reflection for Re z < 1/2.

    Branch is unspecified modulo 2*pi*i (exp of the result is always
    Gamma(z)); vectorized over arrays.
    """
    zarr = np.asarray(z, dtype=complex)
    scalar = zarr.ndim == 0
    zarr = np.atleast_1d(zarr).astype(complex)
    out = np.empty_like(zarr)
    refl = zarr.real < 0.5
    zz = np.where(refl, 1.0 - zarr, zarr)
    w = zz - 1.0
    t = w + _LANCZOS_G + 0.5
    s = np.full_like(zz, _LANCZOS_C[0])
    for k in range(1, len(_LANCZOS_C)):
        s = s + _LANCZOS_C[k] / (w + k)
    core = _LOG_SQRT_2PI + (w + 0.5) * np.log(t) - t + np.log(s)
    out[~refl] = core[~refl]
    if np.any(refl):
        zr = zarr[refl]
        out[refl] = math.log(math.pi) - log_sin_pi(zr) - core[refl]
    return complex(out[0]) if scalar else out


def _nonpositive_integer(z: complex, tol: float = 1e-12) -> Optional[int]:
    """Return n >= 0 when z is (within tol) the pole -n of Gamma, else None."""
    z = complex(z)
    if z.real > 0.5 or abs(z.imag) > tol:
        return None
    n = round(z.real)
    if n <= 0 and abs(z.real - n) <= tol:
        return -n
    return None


def euler_gamma(z):
    """Gamma(z).  Exact non-positive-integer arguments give complex inf."""
    zarr = np.asarray(z, dtype=complex)
    if zarr.ndim == 0:
        if _nonpositive_integer(complex(zarr)) is not None:
            return complex(math.inf, 0.0)
        return complex(np.exp(log_euler_gamma(complex(zarr))))
    flat = zarr.ravel()
    out = np.exp(log_euler_gamma(flat))
    for i, v in enumerate(flat):
        if _nonpositive_integer(complex(v)) is not None:
            out[i] = complex(math.inf, 0.0)
    return out.reshape(zarr.shape)


def euler_gamma_pole_order(z: complex) -> int:
    """0 if Gamma is finite at z; 1 at the (simple) poles 0, -1, -2, ..."""
    return 0 if _nonpositive_integer(z) is None else 1


# ---------------------------------------------------------------------------
# Gamma function of the complex field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexGammaReport:
    value: complex
    kind: str               # "finite" | "pole" | "zero"
    pole_index: Optional[int] = None   # n with a = -n when kind == "pole"
    zero_index: Optional[int] = None   # n with 1-a' = -n when kind == "zero"


def complex_gamma_report(e: DoubleExponent) -> ComplexGammaReport:
    """Gamma(a)/Gamma(1-a') with pole / zero tagging.

    A pole of the numerator gives a tagged infinity, a pole of the
    denominator a tagged exact zero.  When both collide the finite limit
    (-1)^(p-q) q!/p! is returned (the ratio of residues along a - a' fixed).
    """
    p = _nonpositive_integer(e.a)
    q = _nonpositive_integer(1.0 - e.a_prime)
    if p is not None and q is not None:
        val = (-1.0) ** (p - q) * math.factorial(q) / math.factorial(p)
        return ComplexGammaReport(complex(val), "finite")
    if p is not None:
        return ComplexGammaReport(complex(math.inf, 0.0), "pole", pole_index=p)
    if q is not None:
        return ComplexGammaReport(0.0 + 0.0j, "zero", zero_index=q)
    val = np.exp(log_euler_gamma(e.a) - log_euler_gamma(1.0 - e.a_prime))
    return ComplexGammaReport(complex(val), "finite")


def complex_gamma(e: DoubleExponent) -> complex:
    """Gamma(a)/Gamma(1-a') for a pair with a - a' an integer."""
    return complex_gamma_report(e).value


def complex_gamma_mu(x: complex, n) -> complex:
    """Two-index form: the pair ((n+ix)/2, (-n+ix)/2) with n + x-lattice integer.

    2n must be an integer so the pair difference n is .. an integer; used by
    the binomial-theorem sums where n runs over Z or Z + 1/2 jointly with
    another half-integer index.
    """
    return complex_gamma(DoubleExponent((n + 1j * x) / 2.0, (-n + 1j * x) / 2.0))


def complex_gamma_mu_arr(x, n):
    """Vectorized complex_gamma_mu over x (array) at fixed integer-like n."""
    x = np.asarray(x, dtype=complex)
    a = (n + 1j * x) / 2.0
    one_minus_ap = (2.0 + n - 1j * x) / 2.0
    return np.exp(log_euler_gamma(a) - log_euler_gamma(one_minus_ap))


# ---------------------------------------------------------------------------
# q-products
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QProductSpec:
    x: complex
    q: complex
    truncation_tol: float = 1e-14

    def __post_init__(self):
        if abs(self.q) >= 1.0:
            raise DomainError(f"|q| = {abs(self.q)} >= 1: product diverges")
        if self.truncation_tol <= 0:
            raise ParameterError("truncation_tol must be positive")


@dataclass(frozen=True)
class QProductResult:
    value: complex
    log_value: complex
    terms: int              # K: factors k = 0..K were multiplied
    est_tail: float
    exact_zero_at: Optional[int] = None

    def __complex__(self):
        return self.value


def _qprod_truncation(ax: float, aq: float, tol: float) -> int:
    # Tail of sum_k log(1 - x q^k): below k0 ensure |x q^k| <= 1/2, then the
    # geometric bound |x| |q|^(K+1) / ((1-|q|)(1-|x q^(K+1)|)) <= tol.
    if ax == 0.0:
        return 0
    lq = math.log(aq) if aq > 0 else -math.inf
    if lq == -math.inf:
        return 1
    k0 = 0
    if ax >= 0.5:
        k0 = int(math.ceil(math.log(0.5 / ax) / lq))
    kt = int(math.ceil(math.log(tol * (1.0 - aq) / (2.0 * ax)) / lq))
    return max(k0, kt, 0)


def log_q_pochhammer(x: complex, q: complex, tol: float = 1e-14):
    """(log of) the infinite product prod_k (1 - x q^k), truncated.

    Returns (log_value, K, est_tail, exact_zero_at).  The log is the sum of
    principal logs of the factors; its exp is the product exactly.
    """
    aq = abs(q)
    if aq >= 1.0:
        raise DomainError(f"|q| = {aq} >= 1")
    x = complex(x)
    q = complex(q)
    K = _qprod_truncation(abs(x), aq, tol)
    k = np.arange(K + 1)
    factors = 1.0 - x * q ** k
    zero_hits = np.nonzero(factors == 0)[0]
    if zero_hits.size:
        return complex(-math.inf, 0.0), K, 0.0, int(zero_hits[0])
    terms = np.log(factors)
    log_value = complex(fsum(terms.real), fsum(terms.imag))
    axq = abs(x) * aq ** (K + 1)
    est_tail = abs(x) * aq ** (K + 1) / ((1.0 - aq) * max(1.0 - axq, 0.5))
    return log_value, K, est_tail, None


def log_q_pochhammer_arr(x, q: complex, tol: float = 1e-14):
    """Vectorized log product over an array of arguments x (common nome q)."""
    x = np.asarray(x, dtype=complex)
    aq = abs(q)
    if aq >= 1.0:
        raise DomainError(f"|q| = {aq} >= 1")
    axm = float(np.max(np.abs(x))) if x.size else 0.0
    K = _qprod_truncation(axm, aq, tol)
    k = np.arange(K + 1)
    w = np.log(1.0 - x[..., None] * q ** k)
    return w.sum(axis=-1)


def q_pochhammer(spec: QProductSpec) -> QProductResult:
    """(x; q)_infinity as a truncated product with a reported tail bound."""
    lv, K, tail, zero_at = log_q_pochhammer(spec.x, spec.q, spec.truncation_tol)
    if zero_at is not None:
        return QProductResult(0.0 + 0.0j, lv, K, 0.0, exact_zero_at=zero_at)
    return QProductResult(complex(np.exp(lv)), lv, K, tail)


def jackson_q_gamma(z: complex, q: complex, tol: float = 1e-14) -> complex:
    """Jackson's q-gamma (q;q)/(q^z;q) * (1-q)^(1-z), principal powers."""
    if abs(q) >= 1.0:
        raise DomainError(f"|q| = {abs(q)} >= 1")
    z = complex(z)
    qz = np.exp(z * np.log(q))
    ln_num, _, _, zn = log_q_pochhammer(q, q, tol)
    ln_den, _, _, zd = log_q_pochhammer(qz, q, tol)
    if zd is not None:
        return complex(math.inf, 0.0)
    if zn is not None:   # |q| < 1 makes this impossible, guard anyway
        return 0.0 + 0.0j
    return complex(np.exp(ln_num - ln_den + (1.0 - z) * np.log(1.0 - q)))
