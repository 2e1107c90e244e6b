"""Integration engines.

One-dimensional adaptive Gauss-Kronrod panels are the workhorse; on top of
them sit the imaginary-axis line integrator with magnitude-triggered tail
truncation, a cylinder (strip x unit period) integrator with polar patches
around power-law corners, a complex-plane integrator working through the
exponential change of variables t = 1/(1 - e^{2 pi (alpha + i beta)}), and
the sum-of-period-integrals operator delta * sum_N int dbeta.

All integrands must be numpy-vectorized (arrays in, arrays out).
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from math import fsum
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DivergenceError, DomainError, ParameterError, PinchError

__all__ = [
    "LineSpec", "CylinderDomain", "QuadratureResult",
    "adaptive_segments", "integrate_line", "integrate_cylinder",
    "integrate_plane", "cylinder_sum",
]

# 15-point Kronrod extension of 7-point Gauss, nodes ascending; the Gauss
# points sit at the odd indices.
_GK_X = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_GK_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GK_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


@dataclass(frozen=True)
class LineSpec:
    """Controls for the imaginary-axis integrator."""

    tol: float = 1e-8
    max_evals: int = 2_000_000
    tail_threshold: Optional[float] = None   # defaults to tol * 1e-4
    initial_radius: float = 4.0

    def __post_init__(self):
        if self.tol <= 0:
            raise ParameterError("tol must be positive")
        thr = self.tail_threshold
        if thr is not None and thr >= self.tol:
            raise ParameterError("tail_threshold must be below tol")

    @property
    def threshold(self) -> float:
        return self.tail_threshold if self.tail_threshold is not None else self.tol * 1e-4


@dataclass
class QuadratureResult:
    value: complex
    est_abs_err: float
    evals: int
    converged: bool
    meta: dict = field(default_factory=dict)


def _gk_panel(f, a: float, b: float):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _GK_X
    y = np.asarray(f(x), dtype=complex)
    if not np.all(np.isfinite(y)):
        raise DivergenceError(
            f"non-finite integrand values on panel [{a:g}, {b:g}]")
    ik = half * np.dot(_GK_WK, y)
    ig = half * np.dot(_GK_WG, y[1::2])
    return complex(ik), abs(ik - ig)


def adaptive_segments(f, breaks: Sequence[float], tol: float,
                      max_evals: int = 2_000_000) -> QuadratureResult:
    """Adaptive GK15 over the chain of intervals given by ``breaks``.

    Deterministic: the worst-error panel is split first, ties broken by the
    left endpoint, and the final sum runs over panels sorted by position.
    """
    breaks = sorted(set(float(b) for b in breaks))
    if len(breaks) < 2:
        raise ParameterError("need at least two breakpoints")
    heap = []         # (-err, a, seq, b, value)
    frozen = []       # panels too narrow to split further
    evals = 0
    seq = 0
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 0:
            continue
        val, err = _gk_panel(f, a, b)
        evals += 15
        heapq.heappush(heap, (-err, a, seq, b, val))
        seq += 1
    min_width = 1e-13 * max(1.0, abs(breaks[0]), abs(breaks[-1]))
    frozen_err = 0.0
    while heap:
        total_err = -fsum(item[0] for item in heap) + frozen_err
        if total_err <= tol or evals + 30 > max_evals:
            break
        neg_err, a, _, b, val = heapq.heappop(heap)
        if (b - a) < min_width:
            frozen.append((neg_err, a, None, b, val))
            frozen_err += -neg_err
            continue
        mid = 0.5 * (a + b)
        for lo, hi in ((a, mid), (mid, b)):
            val, err = _gk_panel(f, lo, hi)
            evals += 15
            heapq.heappush(heap, (-err, lo, seq, hi, val))
            seq += 1
    panels = sorted(heap + frozen, key=lambda item: item[1])
    value = complex(fsum(p[4].real for p in panels),
                    fsum(p[4].imag for p in panels))
    err = fsum(-p[0] for p in panels)
    return QuadratureResult(value, err, evals, err <= tol)


def _probe_max(g, lo: float, width: float, n: int = 21) -> float:
    xs = np.linspace(lo, lo + width, n)
    vals = np.abs(np.asarray(g(xs), dtype=complex))
    vals = vals[np.isfinite(vals)]
    return float(vals.max()) if vals.size else 0.0


def integrate_line(f, spec: LineSpec = LineSpec(), shift: complex = 0.0,
                   probe_width: float = 5.0) -> QuadratureResult:
    """integral of f along the contour ``shift + i R`` with measure dy.

    Equals int f(z) dz / i over the (possibly shifted) imaginary axis.  The
    radius grows geometrically until |f| stays below the tail threshold over
    a probe window on both ends; failure to decay within ten doublings is a
    divergence error.
    """
    thr = spec.threshold

    def g(y):
        return np.asarray(f(shift + 1j * np.asarray(y, dtype=float)), dtype=complex)

    radii = {}
    for sign in (+1.0, -1.0):
        r = spec.initial_radius
        while _probe_max(lambda y: g(sign * y), r, probe_width) >= thr:
            r *= 2.0
            if r > spec.initial_radius * 2 ** 10:
                raise DivergenceError(
                    "integrand magnitude did not fall below the tail "
                    f"threshold {thr:g} by radius {r:g}")
        radii[sign] = r + probe_width
    breaks = sorted({-radii[-1.0], -spec.initial_radius, -1.0, 0.0, 1.0,
                     spec.initial_radius, radii[+1.0]})
    breaks = [b for b in breaks if -radii[-1.0] <= b <= radii[+1.0]]
    res = adaptive_segments(g, breaks, spec.tol, spec.max_evals)
    tail_est = thr * probe_width * 2.0
    res.est_abs_err += tail_est
    res.converged = res.est_abs_err <= spec.tol
    res.meta["radius"] = (radii[-1.0], radii[+1.0])
    return res


# ---------------------------------------------------------------------------
# Cylinder integration
# ---------------------------------------------------------------------------

def _normalize_corner(item):
    if len(item) == 2:
        alpha, p = item
        beta = 0.0
    else:
        alpha, p, beta = item
    return float(alpha), float(p), float(beta)


@dataclass(frozen=True)
class CylinderDomain:
    """alpha strip times one beta period, with declared power-law corners.

    ``singular_alphas`` holds (alpha, exponent) or (alpha, exponent, beta)
    tuples; the local model near a corner is ((alpha-a)^2+(beta-b)^2)^(p/2).
    """

    alpha_min: float
    alpha_max: float
    beta_interval: tuple = (-0.5, 0.5)
    singular_alphas: tuple = ()

    def __post_init__(self):
        lo, hi = self.beta_interval
        if abs((hi - lo) - 1.0) > 1e-12:
            raise ParameterError("beta interval must have length exactly 1")
        if self.alpha_max <= self.alpha_min:
            raise ParameterError("empty alpha range")
        for item in self.singular_alphas:
            _, p, _ = _normalize_corner(item)
            if p <= -2.0:
                raise DivergenceError(
                    f"corner exponent {p} <= -2 is not integrable in 2D")

    def corners(self):
        lo, hi = self.beta_interval
        out = []
        for item in self.singular_alphas:
            a, p, b = _normalize_corner(item)
            b = b - math.floor(b - lo)   # wrap into [lo, lo+1)
            out.append((a, p, b))
        return out


def _tensor_polar_square(f, ca: float, cb: float, h: float, p: float,
                         tol: float):
    """Integral of f over the square [ca-h,ca+h]x[cb-h,cb+h] in graded polar
    coordinates centered on the (ca, cb) corner where f ~ r^p."""
    kappa = 2.0 / (2.0 + p)
    octants = np.linspace(-math.pi, math.pi, 9)

    def compute(n):
        tq, tw = leggauss(n)
        sq, sw = leggauss(n)
        total = 0.0 + 0.0j
        for t0, t1 in zip(octants[:-1], octants[1:]):
            th = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * tq
            wth = 0.5 * (t1 - t0) * tw
            rb = h / np.maximum(np.abs(np.cos(th)), np.abs(np.sin(th)))
            sig = 0.5 * (sq + 1.0)
            wsig = 0.5 * sw
            r = rb[:, None] * sig[None, :] ** kappa
            drdsig = rb[:, None] * kappa * sig[None, :] ** (kappa - 1.0)
            A = ca + r * np.cos(th)[:, None]
            B = cb + r * np.sin(th)[:, None]
            vals = np.asarray(f(A, B), dtype=complex)
            total += np.einsum("i,j,ij->", wth, wsig, vals * r * drdsig)
        return total, 8 * n * n

    n = 16
    prev, evals = compute(n)
    while True:
        n *= 2
        cur, ev = compute(n)
        evals += ev
        if abs(cur - prev) <= tol or n >= 128:
            return cur, abs(cur - prev), evals
        prev = cur


def _rect_nested(f, a0: float, a1: float, b0: float, b1: float, tol: float,
                 beta_breaks: Sequence[float] = (), max_evals: int = 4_000_000):
    """Nested adaptive integral over [a0,a1]x[b0,b1] (outer alpha)."""
    inner_tol = max(tol / (4.0 * max(a1 - a0, 1.0)), 1e-15)
    inner_breaks = sorted({b0, b1, *[b for b in beta_breaks if b0 < b < b1]})
    evals = [0]

    def outer_integrand(alphas):
        out = np.empty(len(alphas), dtype=complex)
        for i, a in enumerate(alphas):
            r = adaptive_segments(lambda bb: f(np.full_like(bb, a), bb),
                                  inner_breaks, inner_tol, max_evals // 8)
            evals[0] += r.evals
            out[i] = r.value
        return out

    res = adaptive_segments(outer_integrand, [a0, a1], tol, max_evals)
    res.evals += evals[0]
    return res.value, res.est_abs_err, res.evals


def integrate_cylinder(f, dom: CylinderDomain, tol: float) -> QuadratureResult:
    """Integral of f(alpha, beta) over the cylinder domain.

    Away from declared corners a tensor-adaptive rule is used; each corner
    owns a small square (half-width 0.1, shrunk if corners crowd) handled in
    polar coordinates with the radial grading matched to the declared power.
    """
    corners = dom.corners()
    blo, bhi = dom.beta_interval
    h = 0.1
    for (a1, _, b1) in corners:
        if not (dom.alpha_min < a1 < dom.alpha_max):
            raise ParameterError(f"corner alpha {a1} outside the alpha range")
        for (a2, _, b2) in corners:
            if (a1, b1) != (a2, b2):
                d = math.hypot(a1 - a2, b1 - b2)
                h = min(h, 0.45 * d)
        h = min(h, (b1 - blo) * 0.9, (bhi - b1) * 0.9,
                (a1 - dom.alpha_min) * 0.9, (dom.alpha_max - a1) * 0.9)
    if corners and h < 1e-3:
        raise ParameterError("singular corners too close together or to the "
                             "domain boundary; shift the beta window")

    pieces = []           # (kind, payload)
    alpha_edges = [dom.alpha_min, dom.alpha_max]
    for (a, p, b) in corners:
        alpha_edges += [a - h, a + h]
    alpha_edges = sorted(set(alpha_edges))
    corner_strips = {}
    for (a, p, b) in corners:
        corner_strips[(a - h, a + h)] = (a, p, b)
    for a0, a1 in zip(alpha_edges[:-1], alpha_edges[1:]):
        if (a0, a1) in corner_strips:
            a, p, b = corner_strips[(a0, a1)]
            pieces.append(("corner", (a, b, p)))
            if b - h > blo:
                pieces.append(("rect", (a0, a1, blo, b - h)))
            if b + h < bhi:
                pieces.append(("rect", (a0, a1, b + h, bhi)))
        else:
            pieces.append(("rect", (a0, a1, blo, bhi)))

    beta_breaks = [b for (_, _, b) in corners]
    tol_piece = tol / max(len(pieces), 1)
    total = 0.0 + 0.0j
    err = 0.0
    evals = 0
    for kind, payload in pieces:
        if kind == "corner":
            a, b, p = payload
            v, e, n = _tensor_polar_square(f, a, b, h, p, tol_piece)
        else:
            a0, a1, b0, b1 = payload
            v, e, n = _rect_nested(f, a0, a1, b0, b1, tol_piece, beta_breaks)
        total += v
        err += e
        evals += n
    return QuadratureResult(total, err, evals, err <= tol,
                            meta={"pieces": len(pieces), "corner_halfwidth": h})


# ---------------------------------------------------------------------------
# Plane integration
# ---------------------------------------------------------------------------

def _choose_beta_window(betas):
    """Pick a length-1 window whose cut sits in the largest circular gap."""
    if not betas:
        return (-0.5, 0.5)
    fr = sorted(b - math.floor(b) for b in betas)
    gaps = [(fr[(i + 1) % len(fr)] - fr[i]) % 1.0 for i in range(len(fr))]
    if len(fr) == 1:
        cut = fr[0] + 0.5
    else:
        i = max(range(len(fr)), key=lambda j: (gaps[j], -j))
        cut = fr[i] + gaps[i] / 2.0
    cut -= math.floor(cut)
    return (cut - 1.0, cut)


def integrate_plane(f, tol: float, mode: str = "cylinder", *,
                    p0: float, p1: float, p_inf: float,
                    extra_singular: Sequence = ()) -> QuadratureResult:
    """integral of f over the complex plane, d^2 t = dRe t dIm t.

    The integrand may have power-law singularities |t|^p0 at 0, |1-t|^p1 at 1
    and extra declared points, and must decay like |t|^(-p_inf) at infinity.
    ``mode='cylinder'`` substitutes t = 1/(1 - e^{2 pi (alpha + i beta)}) and
    integrates on the cylinder; ``mode='polar'`` is an independent cross-check
    built from polar patches around 0 and 1 plus an outer radial patch.
    """
    if p0 <= -2.0:
        raise DivergenceError(f"exponent at t=0 is {p0} <= -2: divergent")
    if p1 <= -2.0:
        raise DivergenceError(f"exponent at t=1 is {p1} <= -2: divergent")
    if p_inf <= 2.0:
        raise DivergenceError(
            f"decay exponent at infinity is {p_inf} <= 2: divergent")
    for (ts, ps) in extra_singular:
        if ps <= -2.0:
            raise DivergenceError(f"exponent at t={ts} is {ps} <= -2")
    if mode == "cylinder":
        return _plane_via_cylinder(f, tol, p0, p1, p_inf, extra_singular)
    if mode == "polar":
        if extra_singular:
            raise ParameterError(
                "polar cross-check mode handles singular points at 0 and 1 only")
        return _plane_via_polar(f, tol, p0, p1, p_inf)
    raise ParameterError(f"unknown plane mode {mode!r}")


def _plane_via_cylinder(f, tol, p0, p1, p_inf, extra_singular):
    def F(alpha, beta):
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        ex = np.exp(2.0 * np.pi * (alpha + 1j * beta))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = 1.0 / (1.0 - ex)
            vals = np.asarray(f(t), dtype=complex)
            jac = 4.0 * np.pi ** 2 * np.exp(4.0 * np.pi * alpha) * np.abs(t) ** 4
            out = vals * jac
        return np.where(np.isfinite(out), out, 0.0)

    corners = [(0.0, p_inf - 4.0, 0.0)]
    for (ts, ps) in extra_singular:
        s = np.log(1.0 - 1.0 / complex(ts)) / (2.0 * np.pi)
        corners.append((float(s.real), float(ps), float(s.imag)))
    window = _choose_beta_window([c[2] for c in corners])

    # magnitude-triggered alpha truncation on both ends
    scale = 1.0
    probe_b = np.linspace(window[0] + 0.05, window[1] - 0.05, 9)
    for a_probe in (0.3, -0.3, 0.7, -0.7):
        scale = max(scale, float(np.max(np.abs(F(np.full_like(probe_b, a_probe), probe_b)))))
    cutoff = tol * 1e-2 * scale

    def edge_max(a):
        return float(np.max(np.abs(F(np.full_like(probe_b, a), probe_b))))

    a_hi = 1.0
    while edge_max(a_hi) > cutoff and a_hi < 80.0:
        a_hi += 1.0
    a_lo = -1.0
    while edge_max(a_lo) > cutoff and a_lo > -80.0:
        a_lo -= 1.0
    a_lo = min(a_lo, min(c[0] for c in corners) - 1.0)
    a_hi = max(a_hi, max(c[0] for c in corners) + 1.0)
    dom = CylinderDomain(a_lo, a_hi, window, tuple((a, p, b) for (a, p, b) in corners))
    res = integrate_cylinder(F, dom, tol)
    res.meta["alpha_range"] = (a_lo, a_hi)
    return res


def _graded_radial(g, r_lo, r_hi, p, n):
    """int_{r_lo}^{r_hi} g(r) r dr with grading r = r_hi * sigma^kappa
    matched to g ~ r^p near 0 (used with r_lo = 0)."""
    kappa = 2.0 / (2.0 + p)
    sq, sw = leggauss(n)
    sig = 0.5 * (sq + 1.0)
    w = 0.5 * sw
    r = r_hi * sig ** kappa
    dr = r_hi * kappa * sig ** (kappa - 1.0)
    vals = np.asarray(g(r), dtype=complex)
    return np.dot(w, vals * r * dr)


def _tail_radial(g, r_lo, p_inf, n):
    """int_{r_lo}^{inf} g(r) r dr via u = 1/r, graded at u = 0."""
    kappa = 2.0 / (p_inf - 2.0)
    sq, sw = leggauss(n)
    sig = 0.5 * (sq + 1.0)
    w = 0.5 * sw
    u = (1.0 / r_lo) * sig ** kappa
    du = (1.0 / r_lo) * kappa * sig ** (kappa - 1.0)
    vals = np.asarray(g(1.0 / u), dtype=complex)
    return np.dot(w, vals * u ** (-3.0) * du)


def _plane_via_polar(f, tol, p0, p1, p_inf):
    evals = [0]

    def region(center, p_here, left_half):
        # polar patch around `center`; the half plane boundary Re t = 1/2
        def radial_value(theta_arr, n):
            out = np.empty(len(theta_arr), dtype=complex)
            for i, th in enumerate(theta_arr):
                e = complex(math.cos(th), math.sin(th))
                gg = lambda r: f(center + np.asarray(r) * e)
                c = math.cos(th)
                outward = (c < 0) if left_half else (c > 0)
                if outward or abs(c) < 1e-14:
                    v = _graded_radial(gg, 0.0, 1.0, p_here, n)
                    v += _tail_radial(gg, 1.0, p_inf, n)
                else:
                    rb = 1.0 / (2.0 * abs(c))
                    if rb <= 1.0:
                        v = _graded_radial(gg, 0.0, rb, p_here, n)
                    else:
                        v = _graded_radial(gg, 0.0, 1.0, p_here, n)
                        uq, uw = leggauss(n)
                        u = 0.5 * (1.0 / rb + 1.0) + 0.5 * (1.0 - 1.0 / rb) * uq
                        wu = 0.5 * (1.0 - 1.0 / rb) * uw
                        vals = np.asarray(gg(1.0 / u), dtype=complex)
                        v += np.dot(wu, vals * u ** (-3.0))
                evals[0] += 2 * n
                out[i] = v
            return out

        def run(n):
            splits = [-math.pi, -math.pi / 2, 0.0, math.pi / 2, math.pi]
            r = adaptive_segments(lambda th: radial_value(th, n), splits,
                                  tol / 4.0, 1_000_000)
            return r.value

        v1 = run(48)
        v2 = run(96)
        return v2, abs(v2 - v1)

    vL, eL = region(0.0, p0, left_half=True)
    vR, eR = region(1.0, p1, left_half=False)
    err = eL + eR
    return QuadratureResult(vL + vR, err, evals[0], err <= tol,
                            meta={"mode": "polar"})


# ---------------------------------------------------------------------------
# Cylinder sums
# ---------------------------------------------------------------------------

def cylinder_sum(I, regime, M: int, tol: float,
                 seed_beta_breaks: Sequence[float] = (0.0,)) -> QuadratureResult:
    """delta * sum over |N| <= M/delta of the unit-period integrals of I.

    ``I`` is the integrand as a function of the complex point
    z = i sqrt(w1 w2) (N + beta); ``regime`` provides delta and sqrt(w1 w2).
    Each beta integral is adaptive with an equal share of the tolerance.
    """
    delta = float(regime.delta)
    n_over = M / delta
    if abs(n_over - round(n_over)) > 1e-9:
        raise ParameterError("M/delta must be an integer")
    nmax = int(round(n_over))
    zs = 1j * regime.sqrt_w1w2
    per_tol = tol / (2 * nmax + 1)
    breaks = sorted({-0.5, 0.5, *[b for b in seed_beta_breaks if -0.5 < b < 0.5]})
    total = []
    err = 0.0
    evals = 0
    costs = {}
    for N in range(-nmax, nmax + 1):
        def g(beta, N=N):
            vals = np.asarray(I(zs * (N + np.asarray(beta))), dtype=complex)
            if not np.all(np.isfinite(vals)):
                raise PinchError(f"non-finite integrand at N={N}", index=N)
            return vals
        r = adaptive_segments(g, breaks, per_tol)
        total.append(r.value)
        err += r.est_abs_err
        evals += r.evals
        costs[N] = r.evals
    value = delta * complex(fsum(v.real for v in total), fsum(v.imag for v in total))
    err *= delta
    return QuadratureResult(value, err, evals, err <= tol, meta={"per_N_evals": costs})
