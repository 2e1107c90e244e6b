"""Named integrals: beta identities, binomial theorem, conical functions,
Gauss and complex-field 2F1 Euler representations, the self-dual Fourier
identity, and the eight-parameter hypergeometric integrand family.

Each identity operation returns both sides and a relative residual so the
two evaluation routes stay independently testable.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .complex_core import (DoubleExponent, bernoulli_b22, complex_gamma,
                           complex_gamma_mu_arr, double_power, euler_gamma,
                           log_euler_gamma)
from .errors import DivergenceError, DomainError, ParameterError
from .hyperbolic import (ContourGrid, PeriodPair, gamma_eval, hyp_gamma,
                         make_gamma_vector)
from .quadrature import (LineSpec, QuadratureResult, adaptive_segments,
                         integrate_cylinder, integrate_line, integrate_plane,
                         CylinderDomain)

_ONE = DoubleExponent(1.0, 1.0)


# ---------------------------------------------------------------------------
# Hyperbolic beta
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HyperbolicBetaParams:
    lam: complex
    g: complex
    omega: PeriodPair

    def __post_init__(self):
        lam, g = complex(self.lam), complex(self.g)
        half = self.omega.half_total.real
        if not (abs(lam.real) < g.real < half):
            raise ParameterError(
                f"need |Re lambda| < Re g < {half}: got {abs(lam.real)}, {g.real}; "
                "the contour would not separate the two pole series")


def hyperbolic_beta(params: HyperbolicBetaParams, tol: float = 1e-8):
    """Fourier-transform beta identity: line integral vs gamma ratio.

    Returns (lhs, rhs, residual)."""
    om = params.omega
    g, lam = complex(params.g), complex(params.lam)
    c = om.half_total - g
    gv = make_gamma_vector(om, tol=min(tol * 1e-2, 1e-11))

    def f(z):
        z = np.asarray(z, dtype=complex)
        args = np.concatenate([z + c, -z + c])
        vals = gv(args).reshape(2, -1)
        return (np.exp(2j * np.pi * lam * z / om.product)
                * vals[0] * vals[1])

    res = integrate_line(f, LineSpec(tol=tol * 0.5))
    lhs = res.value / om.sqrt_product
    rhs = (gamma_eval(lam + g, om) * gamma_eval(-lam + g, om)
           / gamma_eval(2 * g, om))
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


# ---------------------------------------------------------------------------
# Complex beta
# ---------------------------------------------------------------------------

def complex_beta(a: DoubleExponent, b: DoubleExponent, tol: float = 1e-6,
                 mode: str = "cylinder"):
    """Plane Euler integral (1/pi) int [t]^(a-1) [1-t]^(b-1) d^2 t vs the
    gamma-ratio closed form.  Returns (lhs, rhs, residual)."""
    ra, rb = a.total.real, b.total.real
    if not (ra > 0 and rb > 0 and ra + rb < 2):
        raise ParameterError(
            f"convergence needs Re(a+a')={ra} > 0, Re(b+b')={rb} > 0 and "
            f"their sum {ra + rb} < 2")
    am1, bm1 = a - _ONE, b - _ONE

    def f(t):
        return double_power(t, am1) * double_power(1.0 - np.asarray(t), bm1)

    res = integrate_plane(f, tol, mode, p0=ra - 2.0, p1=rb - 2.0,
                          p_inf=4.0 - ra - rb)
    lhs = res.value / math.pi
    rhs = complex_gamma(a) * complex_gamma(b) / complex_gamma(a + b)
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


# ---------------------------------------------------------------------------
# Complex binomial theorem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComplexBinomialParams:
    ell: float
    s: complex
    alpha: float
    beta: float
    m_cutoff: int = 16

    def __post_init__(self):
        two_ell = 2 * self.ell
        if abs(two_ell - round(two_ell)) > 1e-9:
            raise ParameterError("ell must be integer or half-integer")
        if complex(self.s).imag <= -0.5:
            raise ParameterError(f"Im s = {complex(self.s).imag} must exceed -1/2")
        if self.m_cutoff < 1:
            raise ParameterError("m_cutoff must be >= 1")

    @property
    def mu(self) -> float:
        return self.ell - math.floor(self.ell)


def _oscillatory_tail(fval_hi, fval_lo, U: float, freq: float, decay_p: float):
    # first-order tail of int_{|u|>U} A(u) e^{-2 pi i freq u} du
    if abs(freq) > 1e-12:
        return (fval_hi - fval_lo) / (2j * np.pi * freq)
    if decay_p > 1.0:
        return (fval_hi + fval_lo) * U / (decay_p - 1.0)
    return 0.0


def complex_binomial(params: ComplexBinomialParams, tol: float = 1e-4):
    """Sum-plus-integral binomial identity.  Returns (lhs, rhs, residual).

    Each u-integral is truncated where the gamma-product magnitude falls
    below tol*1e-2 (monitored) and closed with a first-order stationary
    tail estimate; the m-sum runs over Z + mu up to |m| <= m_cutoff.
    """
    ell, s = params.ell, complex(params.s)
    alpha, beta = params.alpha, params.beta
    mu = params.mu
    ms = np.arange(-params.m_cutoff + mu, params.m_cutoff + mu + 0.5, 1.0)
    decay_p = 2.0 * (1.0 + s.imag)   # |integrand| ~ |u|^(-decay_p)

    def integrand(u, m):
        u = np.asarray(u, dtype=float)
        return (np.exp(-2j * np.pi * (alpha * u + beta * m))
                * complex_gamma_mu_arr(s + u, ell + m)
                * complex_gamma_mu_arr(s - u, ell - m))

    # truncation radius: grow until the residual error of the first-order
    # tail correction (or the raw magnitude cutoff) is negligible
    U = 40.0
    cutoff = tol * 1e-2
    while U < 5000.0:
        mag = float(np.max(np.abs(integrand(np.array([U, -U]), mu))))
        if abs(alpha) > 1e-12:
            corr_err = mag * decay_p / (U * (2.0 * np.pi * alpha) ** 2)
        else:
            corr_err = 0.3 * mag * U / max(decay_p - 1.0, 0.1)
        if mag < cutoff or corr_err < tol * 0.03:
            break
        U *= 1.4
    total = 0.0 + 0.0j
    evals = 0
    tail_mag = 0.0
    for m in ms:
        r = adaptive_segments(lambda u, m=m: integrand(u, m),
                              [-U, -U / 4, 0.0, U / 4, U], tol / (4 * len(ms)),
                              max_evals=400_000)
        evals += r.evals
        hi = complex(integrand(np.array([U]), m)[0])
        lo = complex(integrand(np.array([-U]), m)[0])
        tail = _oscillatory_tail(hi, lo, U, alpha, decay_p)
        total += r.value + tail
        tail_mag = max(tail_mag, abs(tail))
    lhs = total / (4.0 * np.pi)
    w = 2.0 * np.cosh(np.pi * (alpha + 1j * beta))
    rhs = (complex_gamma(DoubleExponent(ell + 1j * s, -ell + 1j * s))
           * double_power(w, DoubleExponent(-ell - 1j * s, ell - 1j * s)))
    resid = abs(lhs - rhs) / abs(rhs)
    return lhs, rhs, resid


# ---------------------------------------------------------------------------
# Conical functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConicalParams:
    x: complex
    lam: complex
    g: complex
    omega: PeriodPair

    def __post_init__(self):
        if abs(complex(self.x).real) > 1e-12 or abs(complex(self.lam).real) > 1e-12:
            raise ParameterError("x and lambda must be purely imaginary")
        half = self.omega.half_total.real
        if not (0.0 < complex(self.g).real < half):
            raise ParameterError(f"need 0 < Re g < {half}")


def four_gamma_line(x: complex, lam: complex, g: complex, omega: PeriodPair,
                    tol: float = 1e-8) -> complex:
    """Core four-gamma line integral (no parameter validation)."""
    c = omega.half_total - complex(g)
    x, lam = complex(x), complex(lam)
    gv = make_gamma_vector(omega, tol=min(tol * 1e-2, 1e-11))

    def f(z):
        z = np.asarray(z, dtype=complex)
        args = np.concatenate([z + c, -z + c, z - x + c, -(z - x) + c])
        vals = gv(args).reshape(4, -1)
        return (np.exp(2j * np.pi * lam * z / omega.product)
                * vals[0] * vals[1] * vals[2] * vals[3])

    res = integrate_line(f, LineSpec(tol=tol * 0.5))
    return res.value / omega.sqrt_product


def conical_psi(params: ConicalParams, tol: float = 1e-8) -> complex:
    """Hyperbolic conical function: the four-gamma line integral."""
    return four_gamma_line(params.x, params.lam, params.g, params.omega, tol)


@dataclass(frozen=True)
class ComplexConicalParams:
    rho: float
    sigma: float
    u: complex
    m: int
    v: float
    k: int

    def __post_init__(self):
        if abs(self.sigma) > 0.5:
            raise ParameterError("|sigma| must be <= 1/2")
        im_u = complex(self.u).imag
        if not (-1.0 < im_u < 0.0):
            raise ParameterError(f"Im u = {im_u} must lie in (-1, 0)")
        if self.rho == 0.0 and self.sigma == 0.0 and im_u <= -0.5:
            raise ParameterError(
                "rho = sigma = 0 needs the stronger condition Im u in (-1/2, 0)")


def conical_density(params: ComplexConicalParams):
    """The cylinder density of the complex conical function (vectorized)."""
    m, u, v, k = params.m, complex(params.u), params.v, params.k
    rho, sigma = params.rho, params.sigma
    e = DoubleExponent.from_mu(-2 * m, -2 * u)

    def J(alpha, beta):
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        W = (2.0 * np.sinh(np.pi * (alpha + 1j * beta))
             * 2.0 * np.sinh(np.pi * (alpha - rho + 1j * (beta - sigma))))
        return np.exp(-2j * np.pi * (alpha * v + beta * k)) * double_power(W, e)

    return J


def complex_conical_phi(params: ComplexConicalParams, tol: float = 1e-6,
                        alpha_span: Optional[float] = None) -> complex:
    """Plane conical function as a cylinder integral with two power corners."""
    im_u = complex(params.u).imag
    p = 2.0 * im_u
    J = conical_density(params)
    rho, sigma = params.rho, params.sigma
    if alpha_span is None:
        # |J| ~ e^{-4 pi |Im u| |alpha|} in the tails
        alpha_span = max(3.0, abs(rho) + 3.0,
                         math.log(1.0 / (tol * 1e-2)) / (4.0 * np.pi * abs(im_u)))
    corners = [(0.0, p, 0.0)]
    if rho != 0.0 or sigma != 0.0:
        corners.append((rho, p, sigma))
    lo, hi = _beta_window_for([c[2] for c in corners])
    dom = CylinderDomain(-alpha_span, alpha_span + max(rho, 0.0),
                         (lo, hi), tuple(corners))
    res = integrate_cylinder(J, dom, tol)
    return res.value


def _beta_window_for(betas):
    from .quadrature import _choose_beta_window
    return _choose_beta_window(betas)


# ---------------------------------------------------------------------------
# Gauss 2F1, both fields
# ---------------------------------------------------------------------------

def gauss_2f1_euler(a: complex, b: complex, c: complex, w: complex,
                    tol: float = 1e-10) -> complex:
    """2F1(a, b, c; w) from the Euler integral with endpoint grading."""
    a, b, c, w = complex(a), complex(b), complex(c), complex(w)
    if b.real <= 0 or (c - b).real <= 0:
        raise ParameterError("need Re b > 0 and Re(c-b) > 0")
    if w.imag == 0 and w.real >= 1.0:
        raise ParameterError("w on the branch cut [1, inf)")

    def core(t):
        t = np.asarray(t, dtype=complex)
        return (np.exp((b - 1.0) * np.log(t) + (c - b - 1.0) * np.log(1.0 - t))
                * (1.0 - w * t) ** (-a))

    k0 = max(1.0, 2.0 / b.real)
    k1 = max(1.0, 2.0 / (c - b).real)

    def lower(sig):
        sig = np.asarray(sig, dtype=float)
        t = 0.5 * sig ** k0
        return core(t) * 0.5 * k0 * sig ** (k0 - 1.0)

    def upper(sig):
        sig = np.asarray(sig, dtype=float)
        t = 1.0 - 0.5 * sig ** k1
        return core(t) * 0.5 * k1 * sig ** (k1 - 1.0)

    r1 = adaptive_segments(lower, [0.0, 1.0], tol / 2)
    r2 = adaptive_segments(upper, [0.0, 1.0], tol / 2)
    pref = np.exp(log_euler_gamma(c) - log_euler_gamma(b) - log_euler_gamma(c - b))
    return complex(pref * (r1.value + r2.value))


def complex_2f1_euler(a: DoubleExponent, b: DoubleExponent, c: DoubleExponent,
                      w: complex, tol: float = 1e-5) -> complex:
    """Euler-integral hypergeometric function of the complex field."""
    w = complex(w)
    p0 = b.total.real - 2.0
    p1 = (c.total - b.total).real - 2.0
    pw = -a.total.real
    p_inf = 4.0 + a.total.real - c.total.real
    for name, p, bound in (("t=0", p0, -2.0), ("t=1", p1, -2.0),
                           ("t=1/w", pw, -2.0)):
        if p <= bound:
            raise ParameterError(f"local exponent {p} at {name} not integrable")
    if p_inf <= 2.0:
        raise ParameterError(f"decay exponent {p_inf} at infinity not integrable")
    am1 = -a
    bm1 = b - _ONE
    cm1 = c - b - _ONE

    def f(t):
        t = np.asarray(t, dtype=complex)
        return (double_power(t, bm1) * double_power(1.0 - t, cm1)
                * double_power(1.0 - w * t, am1))

    extra = [] if w == 0 else [(1.0 / w, pw)]
    res = integrate_plane(f, tol, "cylinder", p0=p0, p1=p1, p_inf=p_inf,
                          extra_singular=extra)
    pref = complex_gamma(c) / (math.pi * complex_gamma(b) * complex_gamma(c - b))
    return complex(pref * res.value)


def conical_phi_reference(params: ComplexConicalParams, tol: float = 1e-5) -> complex:
    """The conical function recomputed through the plane hypergeometric
    route t = 1/(1 - e^{2 pi (alpha + i beta)}); an independent oracle."""
    m, u, v, k = params.m, complex(params.u), params.v, params.k
    rho, sigma = params.rho, params.sigma
    a = DoubleExponent.from_mu(2 * m, 2 * u)
    b = DoubleExponent.from_mu(2 * m + k, 2 * u + v)
    c = DoubleExponent.from_mu(4 * m, 4 * u)
    w = 1.0 - cmath.exp(2.0 * np.pi * (rho + 1j * sigma))
    f21 = complex_2f1_euler(a, b, c, w, tol)
    pref = ((-1.0) ** k * cmath.exp(2j * np.pi * (u * rho + m * sigma))
            / (4.0 * np.pi)
            * complex_gamma(b) * complex_gamma(c - b) / complex_gamma(c))
    return complex(pref * f21)


# ---------------------------------------------------------------------------
# Self-dual Fourier identity
# ---------------------------------------------------------------------------

def _ray_integral(f, origin: complex, theta: float, tol: float,
                  r_max: float = 400.0):
    direction = cmath.exp(1j * theta)

    def g(r):
        return np.asarray(f(origin + direction * np.asarray(r)), dtype=complex)

    # grow until decayed
    R = 8.0
    while np.max(np.abs(g(np.linspace(R, R + 2.0, 5)))) > tol * 1e-3 and R < r_max:
        R *= 1.5
    res = adaptive_segments(g, [0.0, 1.0, 4.0, R], tol)
    return direction * res.value, res


def fourier_selfdual(lam: complex, omega: PeriodPair, tol: float = 1e-5):
    """Single-gamma Fourier identity on a shifted, sector-tilted contour.

    Returns (lhs, rhs, residual).  The contour runs from infinity along a
    downward ray into the decay sector, through the shift point
    h = 0.05 Re(w1+w2), then up the vertical; eight candidate tilt angles
    are probed for integrand decay.
    """
    lam = complex(lam)
    w1, w2 = omega.omega1, omega.omega2
    if w1.real <= 0 or w2.real <= 0:
        raise ParameterError("need Re omega_j > 0")
    h0 = 0.05 * omega.total.real
    b0 = bernoulli_b22(0.0, omega)
    gv = make_gamma_vector(omega, tol=min(tol * 1e-3, 1e-11))

    def F(z):
        z = np.asarray(z, dtype=complex)
        barr = np.array([bernoulli_b22(zz, omega) for zz in np.atleast_1d(z)])
        barr = barr.reshape(z.shape) if z.shape else barr[0]
        return (np.exp(2j * np.pi * lam * z / omega.product
                       + 0.5j * np.pi * (barr - b0)) * gv(z))

    # lower sector (arg w1 - pi, arg w2) after sorting args descending
    a1, a2 = cmath.phase(w1), cmath.phase(w2)
    if a1 < a2:
        a1, a2 = a2, a1
    lo_edge, hi_edge = a1 - math.pi, -math.pi / 2.0
    best = None
    for j in range(1, 9):
        th = hi_edge - (hi_edge - lo_edge) * j / 9.0
        probe = np.abs(F(h0 + cmath.exp(1j * th) * np.array([2.0, 5.0, 8.0])))
        score = probe[-1]
        if best is None or score < best[1]:
            best = (th, score)
    theta_dn = best[0]
    if not np.isfinite(best[1]) or best[1] > 1.0:
        return np.nan, np.nan, math.inf   # unconverged: no decaying tilt found
    up_val, up_res = _ray_integral(F, h0, math.pi / 2.0, tol / 2)
    dn_val, dn_res = _ray_integral(F, h0, theta_dn, tol / 2)
    # contour from lower infinity to upper infinity: minus the downward ray
    lhs = (up_val - dn_val) / (1j * omega.sqrt_product)
    rhs = cmath.exp(-0.5j * math.pi * bernoulli_b22(lam, omega)) \
        * gamma_eval(lam, omega, min(tol * 1e-3, 1e-11))
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


# ---------------------------------------------------------------------------
# Eight-parameter hypergeometric integrand
# ---------------------------------------------------------------------------

_HADAMARD = 0.5 * np.array([
    [1, 1, 1, 1],
    [1, 1, -1, -1],
    [1, -1, 1, -1],
    [1, -1, -1, 1],
], dtype=float)


@dataclass(frozen=True)
class RuijsenaarsParams:
    c: tuple                     # four coupling constants
    x: complex
    lam: complex
    omega: PeriodPair
    degeneration: Optional[dict] = None   # m1, m2, k, u1, u2, v, rho, sigma

    def __post_init__(self):
        if len(self.c) != 4:
            raise ParameterError("c must have four entries")
        object.__setattr__(self, "c", tuple(complex(v) for v in self.c))
        half = self.omega.half_total.real
        ch = self.c_hat
        if abs(ch[0].real) >= half:
            raise ParameterError("|Re c_hat_0| must stay below Re(w1+w2)/2")
        for j, cj in enumerate(self.c):
            if 2 * cj.real >= half + ch[0].real:
                raise ParameterError(f"coupling c_{j} too large for convergence")

    @property
    def c_hat(self):
        vec = np.array(self.c, dtype=complex)
        return tuple(_HADAMARD @ vec)

    @property
    def parity_ok(self) -> Optional[bool]:
        if self.degeneration is None:
            return None
        d = self.degeneration
        return (d["m1"] + d["m2"] + d["k"]) % 2 == 0

    @classmethod
    def from_degeneration(cls, delta: float, m1: int, m2: int, k: int,
                          u1: complex, u2: complex, v: float,
                          rho: float, sigma: float) -> "RuijsenaarsParams":
        if abs(complex(u1 + u2).imag) >= 1.0 or abs(complex(u1 - u2).imag) >= 1.0:
            raise ParameterError("need |Im(u1 +- u2)| < 1")
        om = PeriodPair.degeneration(delta)
        isq = 1j * math.sqrt(1.0 + delta * delta)
        K = math.floor(rho / delta)
        c = (isq * (m1 + u1 * delta), isq * (m1 + u1 * delta),
             isq * (m2 + 0.5 + u2 * delta), isq * (m2 - 0.5 + u2 * delta))
        return cls(c, isq * (K + sigma), isq * (k + v * delta), om,
                   degeneration=dict(m1=m1, m2=m2, k=k, u1=complex(u1),
                                     u2=complex(u2), v=v, rho=rho, sigma=sigma,
                                     delta=delta, Kfloor=K))


def ruijsenaars_integrand(point, params: RuijsenaarsParams,
                          mode: str = "hyperbolic"):
    """Evaluate the twelve-gamma integrand or its degeneration limit.

    ``point`` is a complex z for the hyperbolic mode; the limit mode takes
    (alpha, beta) or (N, beta) with alpha = N * delta.  The reciprocal
    gamma pair at 2z is expanded as -4 sin(2 pi z/w1) sin(2 pi z/w2).
    """
    om = params.omega
    if mode in ("hyperbolic", "I_h"):
        z = complex(point)
        Q = om.half_total / 2.0
        ch0 = params.c_hat[0]
        shift = (ch0 + params.lam) / 2.0
        sines = -4.0 * np.sin(2.0 * np.pi * z / om.omega1) \
            * np.sin(2.0 * np.pi * z / om.omega2)
        tolg = 1e-12
        val = complex(sines)
        for cj in params.c:
            val *= gamma_eval(z + Q - cj + shift, om, tolg)
            val *= gamma_eval(-z + Q - cj + shift, om, tolg)
        for xs in (params.x, -params.x):
            val *= gamma_eval(z - xs + Q - shift, om, tolg)
            val *= gamma_eval(-(z - xs) + Q - shift, om, tolg)
        return val
    if mode in ("limit", "J_h"):
        if params.degeneration is None:
            raise ParameterError("limit mode needs degeneration data")
        d = params.degeneration
        alpha, beta = point
        m1, m2, k = d["m1"], d["m2"], d["k"]
        u1, u2, v = d["u1"], d["u2"], d["v"]
        rho, sigma = d["rho"], d["sigma"]
        e_sh = DoubleExponent.from_mu(2 * (m2 - m1 + k), 2 * (u2 - u1 + v))
        e_ch = DoubleExponent.from_mu(2 * (m1 - m2 + k), 2 * (u1 - u2 + v))
        e_w = DoubleExponent.from_mu(-(m1 + m2 + k), -(u1 + u2 + v - 1j))
        s = alpha + 1j * beta
        W = (2.0 * np.sinh(np.pi * (alpha + rho + 1j * (beta + sigma)))
             * 2.0 * np.sinh(np.pi * (alpha - rho + 1j * (beta - sigma))))
        return (double_power(2.0 * np.sinh(np.pi * s), e_sh)
                * double_power(2.0 * np.cosh(np.pi * s), e_ch)
                * double_power(W, e_w))
    raise ParameterError(f"unknown mode {mode!r}")


def reciprocal_double_pair(z: complex, omega: PeriodPair) -> complex:
    """1/(gamma^(2)(2z) gamma^(2)(-2z)) as the explicit sine product."""
    return complex(-4.0 * np.sin(2.0 * np.pi * z / omega.omega1)
                   * np.sin(2.0 * np.pi * z / omega.omega2))
