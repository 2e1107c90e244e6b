"""The hyperbolic gamma function and its machinery.

Two independent evaluation routes: the ratio of infinite q-products (valid
when Im(omega1/omega2) > 0) and the contour-integral representation on the
strip 0 < Re z < Re(omega1 + omega2) (valid for Re omega_j > 0).  Both carry
the Bernoulli-polynomial prefactor exp(-i pi B_{2,2}(z)/2).

Near a pole or zero of the product representation the evaluation point is
moved by quasi-periods with the difference equations
gamma(z + w1)/gamma(z) = 2 sin(pi z / w2) (and w1 <-> w2) and the sine
factors are reapplied.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .complex_core import bernoulli_b22, log_q_pochhammer, log_q_pochhammer_arr
from .errors import DomainError, ParameterError
from .quadrature import adaptive_segments

__all__ = [
    "PeriodPair", "GammaEvalReport", "hyp_gamma", "hyp_gamma_integral",
    "gamma_eval", "pole_zero_lattice", "asymptotic_prefactor",
    "log_hyp_gamma_qprod", "ContourGrid",
]


@dataclass(frozen=True)
class PeriodPair:
    """Quasi-periods (omega1, omega2), both with nonnegative real part."""

    omega1: complex
    omega2: complex
    delta: Optional[float] = None

    def __post_init__(self):
        w1, w2 = complex(self.omega1), complex(self.omega2)
        if w1.real < -1e-15 or w2.real < -1e-15:
            raise ParameterError("Re omega1 and Re omega2 must be >= 0")
        if w1 == 0 or w2 == 0:
            raise ParameterError("periods must be nonzero")
        object.__setattr__(self, "omega1", w1)
        object.__setattr__(self, "omega2", w2)

    @classmethod
    def degeneration(cls, delta: float) -> "PeriodPair":
        """omega1 = i + delta, omega2 = -i + delta."""
        d = float(delta)
        if d <= 0:
            raise ParameterError("delta must be positive")
        return cls(1j + d, -1j + d, delta=d)

    @property
    def q(self) -> complex:
        return cmath.exp(2j * math.pi * self.omega1 / self.omega2)

    @property
    def q_tilde(self) -> complex:
        return cmath.exp(-2j * math.pi * self.omega2 / self.omega1)

    @property
    def products_converge(self) -> bool:
        return (self.omega1 / self.omega2).imag > 0

    @property
    def total(self) -> complex:
        return self.omega1 + self.omega2

    @property
    def half_total(self) -> complex:
        return (self.omega1 + self.omega2) / 2.0

    @property
    def product(self) -> complex:
        return self.omega1 * self.omega2

    @property
    def sqrt_product(self) -> complex:
        return cmath.sqrt(self.omega1 * self.omega2)

    def swapped(self) -> "PeriodPair":
        return PeriodPair(self.omega2, self.omega1, delta=self.delta)

    def conjugate(self) -> "PeriodPair":
        return PeriodPair(self.omega1.conjugate(), self.omega2.conjugate())


@dataclass
class GammaEvalReport:
    value: complex
    method: str                      # "q_product" | "contour_integral" | "shifted"
    shift_count: int = 0
    est_abs_err: float = 0.0
    pole_at: Optional[tuple] = None  # (m1, m2) when z hit the pole lattice
    zero_at: Optional[tuple] = None

    def __post_init__(self):
        if self.est_abs_err < 0:
            raise ValueError("est_abs_err must be nonnegative")
        if self.method == "shifted" and self.shift_count <= 0:
            raise ValueError("shifted evaluations must count their shifts")

    def __complex__(self):
        return self.value


# ---------------------------------------------------------------------------
# Lattice geometry
# ---------------------------------------------------------------------------

def _lattice_nearest(z: complex, omega: PeriodPair, kind: str):
    """Nearest point of the pole lattice {-m1 w1 - m2 w2} or the zero lattice
    {w1 + w2 + m1 w1 + m2 w2}, m1, m2 >= 0.  Returns (point, (m1, m2), dist).
    """
    w1, w2 = omega.omega1, omega.omega2
    # poles: -z ~ m1 w1 + m2 w2;  zeros: z - (w1+w2) ~ m1 w1 + m2 w2
    target = -z if kind == "pole" else z - omega.total
    det = w1.real * w2.imag - w1.imag * w2.real
    cands = set()
    if abs(det) > 1e-12 * abs(w1) * abs(w2):
        c1 = (target.real * w2.imag - target.imag * w2.real) / det
        c2 = (w1.real * target.imag - w1.imag * target.real) / det
        for d1 in (-1, 0, 1):
            for d2 in (-1, 0, 1):
                m1 = max(0, int(round(c1)) + d1)
                m2 = max(0, int(round(c2)) + d2)
                cands.add((m1, m2))
    else:
        # collinear periods: enumerate along the ray
        ratio = (w2 / w1).real
        zeta = (target / w1).real
        mmax = int(abs(zeta) / max(min(1.0, abs(ratio)), 1e-6)) + 2
        for m2 in range(0, min(mmax, 400) + 1):
            rem = zeta - m2 * ratio
            m1 = max(0, int(round(rem)))
            cands.add((m1, m2))
            cands.add((max(0, m1 - 1), m2))
            cands.add((m1 + 1, m2))
    best = None
    for (m1, m2) in cands:
        lat = m1 * w1 + m2 * w2
        d = abs(target - lat)
        if best is None or d < best[2]:
            point = -lat if kind == "pole" else omega.total + lat
            best = (point, (m1, m2), d)
    return best


def pole_zero_lattice(omega: PeriodPair, m_max: int):
    """All poles -m1 w1 - m2 w2 and zeros w1 + w2 + m1 w1 + m2 w2 with
    0 <= m1, m2 <= m_max, deduplicated."""
    if m_max < 0:
        raise ParameterError("m_max must be >= 0")
    w1, w2 = omega.omega1, omega.omega2
    poles, zeros, seen_p, seen_z = [], [], set(), set()
    for m1 in range(m_max + 1):
        for m2 in range(m_max + 1):
            p = -m1 * w1 - m2 * w2
            z = omega.total + m1 * w1 + m2 * w2
            kp = (round(p.real, 12), round(p.imag, 12))
            kz = (round(z.real, 12), round(z.imag, 12))
            if kp not in seen_p:
                seen_p.add(kp)
                poles.append(p)
            if kz not in seen_z:
                seen_z.add(kz)
                zeros.append(z)
    return poles, zeros


# ---------------------------------------------------------------------------
# q-product route
# ---------------------------------------------------------------------------

def log_hyp_gamma_qprod(z, omega: PeriodPair, tol: float = 1e-14):
    """log gamma^(2)(z) by the q-product ratio; no pole handling.

    Vectorized over z.  exp of the result is the function value (the log
    itself has an unspecified 2 pi i branch).
    """
    if not omega.products_converge:
        raise DomainError("q-products diverge: Im(omega1/omega2) <= 0; "
                          "use hyp_gamma_integral")
    w1, w2 = omega.omega1, omega.omega2
    q, qt = omega.q, omega.q_tilde
    zarr = np.asarray(z, dtype=complex)
    scalar = zarr.ndim == 0
    zarr = np.atleast_1d(zarr)
    xn = qt * np.exp(2j * np.pi * zarr / w1)
    xd = np.exp(2j * np.pi * zarr / w2)
    b = np.array([bernoulli_b22(zz, omega) for zz in zarr])
    out = -0.5j * np.pi * b + log_q_pochhammer_arr(xn, qt, tol) \
        - log_q_pochhammer_arr(xd, q, tol)
    return complex(out[0]) if scalar else out


def _qprod_value(z: complex, omega: PeriodPair, tol: float):
    lv = log_hyp_gamma_qprod(z, omega, tol)
    val = complex(np.exp(lv))
    est = abs(val) * (tol * 4.0 + 1e-15 * max(abs(lv), 1.0))
    return val, est


def hyp_gamma(z: complex, omega: PeriodPair, tol: float = 1e-12) -> GammaEvalReport:
    """gamma^(2)(z; omega1, omega2) through the q-product representation.

    Exact lattice hits return tagged infinity / zero; points within
    0.1 |omega1 + omega2| of the lattice are moved away by difference
    equations (at most 8 period steps) before evaluating.
    """
    z = complex(z)
    if not omega.products_converge:
        raise DomainError("products do not converge for these periods; "
                          "use hyp_gamma_integral")
    scale = abs(omega.total)
    exact_tol = 1e-12 * max(1.0, abs(z), scale)
    p_pt, p_idx, p_d = _lattice_nearest(z, omega, "pole")
    z_pt, z_idx, z_d = _lattice_nearest(z, omega, "zero")
    if p_d <= exact_tol:
        return GammaEvalReport(complex(math.inf, 0.0), "q_product", pole_at=p_idx)
    if z_d <= exact_tol:
        return GammaEvalReport(0.0 + 0.0j, "q_product", zero_at=z_idx)
    near = 0.1 * scale
    if p_d >= near and z_d >= near:
        val, est = _qprod_value(z, omega, tol)
        return GammaEvalReport(val, "q_product", 0, est)

    w1, w2 = omega.omega1, omega.omega2
    if p_d < z_d:
        j, l = p_idx[0] + 1, p_idx[1]
        if j + l > 8:
            raise DomainError(f"would need {j + l} > 8 period shifts at z={z}")
        log_sines = 0.0 + 0.0j
        zz = z
        for _ in range(j):
            log_sines += np.log(2.0 * np.sin(np.pi * zz / w2))
            zz += w1
        for _ in range(l):
            log_sines += np.log(2.0 * np.sin(np.pi * zz / w1))
            zz += w2
        lv = log_hyp_gamma_qprod(zz, omega, tol) - log_sines
        val = complex(np.exp(lv))
        est = abs(val) * (tol * 4.0 + (j + l) * 1e-14)
        return GammaEvalReport(val, "shifted", j + l, est)
    j, l = z_idx[0] + 1, z_idx[1]
    if j + l > 8:
        raise DomainError(f"would need {j + l} > 8 period shifts at z={z}")
    log_sines = 0.0 + 0.0j
    zz = z
    for _ in range(j):
        zz -= w1
        log_sines += np.log(2.0 * np.sin(np.pi * zz / w2))
    for _ in range(l):
        zz -= w2
        log_sines += np.log(2.0 * np.sin(np.pi * zz / w1))
    lv = log_hyp_gamma_qprod(zz, omega, tol) + log_sines
    val = complex(np.exp(lv))
    est = abs(val) * (tol * 4.0 + (j + l) * 1e-14)
    return GammaEvalReport(val, "shifted", j + l, est)


# ---------------------------------------------------------------------------
# Contour-integral route
# ---------------------------------------------------------------------------

def _contour_height(omega: PeriodPair) -> float:
    # half the height of the lowest nonzero integrand pole 2 pi i k / omega_j
    hs = []
    for w in (omega.omega1, omega.omega2):
        if w.real <= 0:
            raise DomainError("contour representation needs Re omega_j > 0")
        hs.append(2.0 * math.pi * w.real / abs(w) ** 2)
    return 0.5 * min(hs)


class ContourGrid:
    """Shared panel grid for contour evaluations of log gamma^(2).

    Built once for a family of arguments with real parts inside
    [re_lo, re_hi] (within the strip) and |Im z| <= im_max; ``loggamma``
    then evaluates the whole family with one kernel pass per panel.
    """

    def __init__(self, omega: PeriodPair, re_lo: float, re_hi: float,
                 im_max: float, tol: float = 1e-10):
        w1, w2 = omega.omega1, omega.omega2
        wsum = omega.total
        if not (0.0 < re_lo <= re_hi < wsum.real):
            raise DomainError(
                f"real parts [{re_lo}, {re_hi}] outside the strip "
                f"(0, {wsum.real})")
        self.omega = omega
        self.tol = tol
        h = _contour_height(omega)
        self.h = h
        decay_r = wsum.real - re_hi
        decay_l = re_lo
        target = math.log(max(tol, 1e-16) * 1e-3)
        s_hi = min(-target / decay_r + 2.0, 1e5)
        s_lo = max(target / decay_l - 2.0, -1e5)
        freq = max(1.0, im_max, abs(w1.imag), abs(w2.imag))
        width = min(6.0 / freq, 2.0)
        edges = [s_lo]
        s = s_lo
        while s < s_hi:
            step = width if abs(s) < 8.0 else width * min(8.0, 1.0 + abs(s) / 8.0)
            step = min(step, s_hi - s) if s + step > s_hi else step
            s += step
            edges.append(s)
        extra = [x * h for x in (-4, -2, -1, 1, 2, 4)]
        edges = sorted(set(edges + extra))
        self._build(edges, re_lo, re_hi, im_max)

    def _kernel(self, t):
        w1, w2 = self.omega.omega1, self.omega.omega2
        with np.errstate(over="ignore"):
            den = (-np.expm1(w1 * t)) * (-np.expm1(w2 * t)) * t
        return 1.0 / den

    def _build(self, edges, re_lo, re_hi, im_max):
        from .quadrature import _GK_X, _GK_WG, _GK_WK
        probes = np.array([complex(re_lo, 0), complex(re_hi, 0),
                           complex(0.5 * (re_lo + re_hi), im_max)])
        panels = [(a, b) for a, b in zip(edges[:-1], edges[1:])]
        rounds = 0
        while True:
            nodes, wk = [], []
            for (a, b) in panels:
                half = 0.5 * (b - a)
                nodes.append(0.5 * (a + b) + half * _GK_X)
                wk.append(half * _GK_WK)
            t = np.concatenate(nodes) + 1j * self.h
            ker = self._kernel(t)
            nt = len(panels)
            ker_p = ker.reshape(nt, 15)
            wk_p = np.array(wk)
            errs = np.zeros(nt)
            half_w = np.array([(0.5 * (b - a)) for a, b in panels])
            for pz in probes:
                fi = np.exp(pz * t).reshape(nt, 15) * ker_p
                ik = (fi * wk_p).sum(axis=1)
                ig = (fi[:, 1::2] * (_GK_WG[None, :] * half_w[:, None])).sum(axis=1)
                errs = np.maximum(errs, np.abs(ik - ig))
            tot = float(errs.sum())
            rounds += 1
            if tot <= 0.25 * self.tol or len(panels) > 4000 or rounds >= 14:
                self.panels = panels
                self.t = t
                self.wker = ker * wk_p.ravel()
                self.quad_err = tot
                return
            worst_set = set(int(i) for i in np.argsort(errs)[-max(1, nt // 4):])
            new_panels = []
            for i, (a, b) in enumerate(panels):
                if i in worst_set and (b - a) > 1e-12:
                    mid = 0.5 * (a + b)
                    new_panels += [(a, mid), (mid, b)]
                else:
                    new_panels.append((a, b))
            panels = new_panels

    def loggamma(self, z):
        """log gamma^(2) at z (scalar or array with Re z in the built band)."""
        zarr = np.atleast_1d(np.asarray(z, dtype=complex))
        ez = np.exp(zarr[:, None] * self.t[None, :])
        integral = ez @ self.wker
        b = np.array([bernoulli_b22(zz, self.omega) for zz in zarr])
        out = -0.5j * np.pi * b - integral
        return complex(out[0]) if np.asarray(z).ndim == 0 else out


def hyp_gamma_integral(z: complex, omega: PeriodPair,
                       tol: float = 1e-9) -> GammaEvalReport:
    """gamma^(2)(z) by the contour-integral representation.

    Requires Re omega_j > 0 and z strictly inside the strip
    0 < Re z < Re(omega1 + omega2).
    """
    z = complex(z)
    wsum = omega.total
    if not (0.0 < z.real < wsum.real):
        raise DomainError(
            f"Re z = {z.real} outside the strip (0, {wsum.real}); "
            "use hyp_gamma (q-products) or shift by difference equations")
    grid = ContourGrid(omega, z.real, z.real, abs(z.imag), tol)
    lv = grid.loggamma(z)
    val = complex(np.exp(lv))
    return GammaEvalReport(val, "contour_integral", 0, abs(val) * tol * 4.0)


def gamma_eval(z: complex, omega: PeriodPair, tol: float = 1e-11) -> complex:
    """Value dispatcher: q-products when they converge, else the contour
    integral with automatic difference-equation shifts into the strip."""
    if omega.products_converge:
        return hyp_gamma(z, omega, tol).value
    return _contour_value_shifted(z, omega, tol)[0]


def _contour_value_shifted(z: complex, omega: PeriodPair, tol: float):
    """Contour evaluation with strip shifts; returns (value, shift_count)."""
    z = complex(z)
    w1, w2 = omega.omega1, omega.omega2
    wsum = omega.total
    margin = 0.05 * wsum.real
    log_corr = 0.0 + 0.0j
    shifts = 0
    zz = z
    while zz.real <= margin:
        # gamma(z) = gamma(z + w1) / (2 sin(pi z / w2))
        log_corr -= np.log(2.0 * np.sin(np.pi * zz / w2))
        zz += w1
        shifts += 1
        if shifts > 400:
            raise DomainError("too many strip shifts")
    while zz.real >= wsum.real - margin:
        zz -= w1
        log_corr += np.log(2.0 * np.sin(np.pi * zz / w2))
        shifts += 1
        if shifts > 400:
            raise DomainError("too many strip shifts")
    rep = hyp_gamma_integral(zz, omega, tol)
    return complex(rep.value * np.exp(log_corr)), shifts


def make_gamma_vector(omega: PeriodPair, tol: float = 1e-12,
                      im_hint: float = 40.0):
    """Vectorized gamma^(2) evaluator for integrand arguments.

    With convergent q-products this is the raw product formula applied to the
    whole array.  With real-type periods a shared contour grid covers the
    strip; arguments outside it are first moved in by omega1 steps and the
    difference-equation sine factors are reapplied, grouped by shift count.
    The grid grows automatically when larger |Im z| shows up.
    """
    if omega.products_converge:
        def ev(z):
            return np.exp(log_hyp_gamma_qprod(np.asarray(z, dtype=complex),
                                              omega, tol))
        return ev

    wsum = omega.total
    w1, w2 = omega.omega1, omega.omega2
    margin = 0.05 * wsum.real
    band = (margin, wsum.real - margin)
    state = {"grid": None, "im_max": float(im_hint)}

    def _grid(im_needed):
        if state["grid"] is None or im_needed > state["im_max"]:
            state["im_max"] = max(im_needed * 1.3, state["im_max"])
            state["grid"] = ContourGrid(omega, band[0], band[1],
                                        state["im_max"], tol)
        return state["grid"]

    def ev(z):
        zarr = np.atleast_1d(np.asarray(z, dtype=complex))
        # omega1 steps needed to land Re inside the band
        k = np.zeros(len(zarr), dtype=int)
        lo_mask = zarr.real <= band[0]
        k[lo_mask] = np.ceil((band[0] - zarr.real[lo_mask]) / w1.real + 1e-12)
        hi_mask = zarr.real >= band[1]
        k[hi_mask] = -np.ceil((zarr.real[hi_mask] - band[1]) / w1.real + 1e-12)
        zsh = zarr + k * w1
        grid = _grid(float(np.max(np.abs(zsh.imag))) if len(zsh) else 1.0)
        lv = grid.loggamma(zsh)
        # gamma(z) = gamma(z + k w1) / prod_{a=0}^{k-1} 2 sin(pi (z + a w1)/w2)
        # for k > 0, and gamma(z) = gamma(z + k w1) * prod(...) for k < 0.
        for kk in np.unique(k):
            if kk == 0:
                continue
            idx = np.nonzero(k == kk)[0]
            steps = np.arange(0, kk) if kk > 0 else np.arange(kk, 0)
            args = zarr[idx, None] + steps[None, :] * w1
            ls = np.log(2.0 * np.sin(np.pi * args / w2)).sum(axis=1)
            lv[idx] = lv[idx] - ls if kk > 0 else lv[idx] + ls
        out = np.exp(lv)
        return out if np.asarray(z).ndim else complex(out[0])

    return ev


# ---------------------------------------------------------------------------
# Asymptotics
# ---------------------------------------------------------------------------

def _angle_in(theta, lo, hi):
    # strict containment of the angle modulo 2 pi
    twopi = 2.0 * math.pi
    t = (theta - lo) % twopi
    return 0.0 < t < (hi - lo) % twopi if (hi - lo) % twopi != 0 else False


def asymptotic_prefactor(z: complex, omega: PeriodPair) -> complex:
    """exp(+- i pi B_{2,2}(z)/2), the factor cancelling gamma^(2)(z) at
    infinity in the corresponding pole-free sector.

    With arg omega1 >= arg omega2 (the pair is symmetric, so they are sorted
    first): the plus sign on (arg w1, arg w2 + pi), the minus sign on
    (arg w1 - pi, arg w2); anywhere else is inside a wedge of poles/zeros.
    """
    w1, w2 = omega.omega1, omega.omega2
    if cmath.phase(w1) < cmath.phase(w2):
        w1, w2 = w2, w1
    a1, a2 = cmath.phase(w1), cmath.phase(w2)
    th = cmath.phase(z)
    b = bernoulli_b22(z, omega)
    if _angle_in(th, a1, a2 + math.pi):
        return cmath.exp(0.5j * math.pi * b)
    if _angle_in(th, a1 - math.pi, a2):
        return cmath.exp(-0.5j * math.pi * b)
    raise DomainError(
        f"arg z = {th:.4f} lies in a pole/zero wedge; no power-free asymptotics")
