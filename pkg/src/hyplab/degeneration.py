"""Limit experiments.

Quantitative convergence runs for the shrinking-parameter family: the point
and ratio limits of the hyperbolic gamma function, the beta-integral and
conical-function degenerations (sum-of-period-integrals against the plane
densities), the classical small-period limits, excluded-term decay, and the
Riemann-sum versus improper-integral gaps.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from math import fsum
from typing import Callable, Optional, Sequence

import numpy as np

from .complex_core import (DoubleExponent, complex_gamma, double_power,
                           euler_gamma, log_euler_gamma)
from .errors import ParameterError
from .hyperbolic import (PeriodPair, hyp_gamma, hyp_gamma_integral,
                         log_hyp_gamma_qprod)
from .integrals import (ComplexConicalParams, complex_conical_phi,
                        conical_density, four_gamma_line, gauss_2f1_euler)
from .quadrature import (CylinderDomain, LineSpec, adaptive_segments,
                         cylinder_sum, integrate_cylinder, integrate_line)
from .regimes import ComplexRegime
from .util import parallel_map

_QTOL = 1e-13


@dataclass(frozen=True)
class ConvergenceRecord:
    delta: float
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    evals: int
    runtime_ms: float

    @classmethod
    def make(cls, delta, lhs, rhs, evals=0, runtime_ms=0.0):
        lhs, rhs = complex(lhs), complex(rhs)
        abs_err = abs(lhs - rhs)
        rel_err = abs_err / max(abs(rhs), 1e-300)
        return cls(float(delta), lhs, rhs, abs_err, rel_err, int(evals),
                   float(runtime_ms))


@dataclass
class LimitReport:
    records: list
    fitted_rate: float
    monotone: bool
    aux: dict = field(default_factory=dict)

    @classmethod
    def from_records(cls, records: Sequence[ConvergenceRecord],
                     metric: str = "rel", aux: Optional[dict] = None):
        recs = sorted(records, key=lambda r: -r.delta)
        if not recs:
            raise ParameterError("no records")
        errs = [r.rel_err if metric == "rel" else r.abs_err for r in recs]
        mono = all(errs[i + 1] <= 1.1 * errs[i] for i in range(len(errs) - 1))
        if len(recs) >= 2 and all(e > 0 for e in errs):
            x = np.log([r.delta for r in recs])
            y = np.log(errs)
            rate = float(np.polyfit(x, y, 1)[0])
        else:
            rate = math.nan
        return cls(recs, rate, mono, aux or {})


# ---------------------------------------------------------------------------
# Regime integrands
# ---------------------------------------------------------------------------

def beta_line_integrand(regime: ComplexRegime) -> Callable:
    """The beta-identity integrand in its reflected two-gamma ratio form,
    as a vectorized function of the contour point z."""
    om = regime.omega
    isq = regime.i_sqrt_w1w2
    d, m, u, k, v = regime.delta, regime.m, complex(regime.u), regime.k, regime.v
    eps = regime.epsilon

    def I(z):
        z = np.asarray(z, dtype=complex)
        w = z / isq
        phase = np.exp(-2j * np.pi * (v * d + k) * w)
        A = isq * (w - m - (u + 1j) * d + eps * d * d)
        B = isq * (w + m + (u - 1j) * d + eps * d * d)
        return phase * np.exp(log_hyp_gamma_qprod(A, om, _QTOL)
                              - log_hyp_gamma_qprod(B, om, _QTOL))

    return I


def beta_line_integrand_direct(regime: ComplexRegime) -> Callable:
    """Same integrand assembled from the four-gamma definition (slow path,
    kept as an independent cross-check of the reflected form)."""
    om = regime.omega
    g, lam = regime.g, regime.lam
    c = om.half_total - g

    def I(z):
        z = np.asarray(z, dtype=complex)
        return (np.exp(2j * np.pi * lam * z / om.product)
                * np.exp(log_hyp_gamma_qprod(z + c, om, _QTOL)
                         + log_hyp_gamma_qprod(-z + c, om, _QTOL)))

    return I


def beta_density(regime: ComplexRegime) -> Callable:
    """The plane-limit density of the beta experiment (vectorized)."""
    m, u, k, v = regime.m, complex(regime.u), regime.k, regime.v
    e = DoubleExponent.from_mu(-2 * m, -2 * u)

    def J(alpha, beta):
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        z1 = 2.0 * np.sinh(np.pi * (alpha + 1j * beta))
        return np.exp(-2j * np.pi * (alpha * v + beta * k)) * double_power(z1, e)

    return J


def conical_line_integrand(regime: ComplexRegime) -> Callable:
    """The conical integrand: two reflected gamma-ratio factors."""
    om = regime.omega
    isq = regime.i_sqrt_w1w2
    d, m, u, k, v = regime.delta, regime.m, complex(regime.u), regime.k, regime.v
    eps = regime.epsilon
    K, sigma = regime.K, regime.sigma

    def ratio(w):
        A = isq * (w - m - (u + 1j) * d + eps * d * d)
        B = isq * (w + m + (u - 1j) * d + eps * d * d)
        return np.exp(log_hyp_gamma_qprod(A, om, _QTOL)
                      - log_hyp_gamma_qprod(B, om, _QTOL))

    def I(z):
        z = np.asarray(z, dtype=complex)
        w = z / isq
        phase = np.exp(-2j * np.pi * (v * d + k) * w)
        return phase * ratio(w) * ratio(w - K - sigma)

    return I


def regime_conical_params(regime: ComplexRegime) -> ComplexConicalParams:
    return ComplexConicalParams(regime.rho, regime.sigma, regime.u,
                                regime.m, regime.v, regime.k)


def beta_rhs_closed(regime: ComplexRegime) -> complex:
    """The gamma closed form of the beta limit target."""
    m, k = regime.m, regime.k
    u, v = complex(regime.u), regime.v
    a = DoubleExponent.from_mu(m + k, u + v)
    b = DoubleExponent.from_mu(m - k, u - v)
    return (np.exp(1j * np.pi * (m + k)) / (4.0 * np.pi)
            * complex_gamma(a) * complex_gamma(b) / complex_gamma(a + b))


def beta_rhs_integral(regime: ComplexRegime, tol: float = 1e-7):
    """Plane-density integral over [-M, M] plus the measured tail.

    Returns (inner, tail, evals)."""
    J = beta_density(regime)
    M = float(regime.M)
    im_u = abs(complex(regime.u).imag)
    dom = CylinderDomain(-M, M, (-0.5, 0.5), ((0.0, 2.0 * complex(regime.u).imag, 0.0),))
    inner = integrate_cylinder(J, dom, tol)
    span = M + math.log(1.0 / tol) / (2.0 * np.pi * im_u) + 2.0
    tail = 0.0 + 0.0j
    evals = inner.evals
    for sgn in (+1.0, -1.0):
        dom_t = CylinderDomain(min(sgn * M, sgn * span), max(sgn * M, sgn * span))
        r = integrate_cylinder(J, dom_t, tol)
        tail += r.value
        evals += r.evals
    return inner.value, tail, evals


# ---------------------------------------------------------------------------
# Gamma-function limits
# ---------------------------------------------------------------------------

def gamma_point_limit(m: int, u: complex, deltas: Sequence[float],
                      threads: int = 1) -> LimitReport:
    """Point limit of the hyperbolic gamma against the complex-field gamma."""
    e = DoubleExponent.from_mu(m, u)
    gfac = complex_gamma(e)

    def one(delta):
        t0 = time.perf_counter()
        reg = ComplexRegime(delta, m, u, 0, 0.0)
        om = reg.omega
        z0 = reg.i_sqrt_w1w2 * (m + complex(u) * delta)
        rep = hyp_gamma(z0, om, 1e-13)
        if rep.pole_at is not None or rep.zero_at is not None:
            return None   # skip-with-flag
        rhs = (np.exp(0.5j * np.pi * m * m)
               * (4.0 * np.pi * delta) ** (1j * complex(u) - 1.0) * gfac)
        return ConvergenceRecord.make(delta, rep.value, rhs, 0,
                                      (time.perf_counter() - t0) * 1e3)

    recs = parallel_map(one, sorted(deltas, reverse=True), threads)
    skipped = [d for d, r in zip(sorted(deltas, reverse=True), recs) if r is None]
    recs = [r for r in recs if r is not None]
    return LimitReport.from_records(recs, aux={"skipped": skipped})


def gamma_ratio_limit(alpha: float, beta: float, m: int, u: complex,
                      deltas: Sequence[float], threads: int = 1) -> LimitReport:
    """Shifted-ratio limit against the plane double power."""
    rhs = double_power(2.0 * np.sinh(np.pi * (alpha + 1j * beta)),
                       DoubleExponent.from_mu(m, u))

    def one(delta):
        t0 = time.perf_counter()
        reg = ComplexRegime(delta, m, u, 0, 0.0)
        om = reg.omega
        isq = reg.i_sqrt_w1w2
        N = round(alpha / delta)
        zn = isq * (N + beta + m + complex(u) * delta)
        zd = isq * (N + beta)
        lv = log_hyp_gamma_qprod(np.array([zn, zd]), om, _QTOL)
        lhs = (np.exp(-1j * np.pi * N * m - 0.5j * np.pi * m * m)
               * np.exp(lv[0] - lv[1]))
        return ConvergenceRecord.make(delta, lhs, rhs, 0,
                                      (time.perf_counter() - t0) * 1e3)

    recs = parallel_map(one, sorted(deltas, reverse=True), threads)
    return LimitReport.from_records(recs)


# ---------------------------------------------------------------------------
# Theorem experiments
# ---------------------------------------------------------------------------

def beta_limit_experiment(template: ComplexRegime, deltas: Sequence[float],
                          tol: float = 1e-6, threads: int = 1) -> LimitReport:
    """Sum-of-period-integrals of the beta integrand against the plane
    density integral (and the gamma closed form, kept in ``aux``)."""
    closed = beta_rhs_closed(template)
    inner, tail, rhs_evals = beta_rhs_integral(template, tol)
    rhs = inner + tail

    def one(delta):
        t0 = time.perf_counter()
        reg = template.with_delta(delta)
        res = cylinder_sum(beta_line_integrand(reg), reg, reg.M, tol)
        return ConvergenceRecord.make(delta, res.value, rhs, res.evals,
                                      (time.perf_counter() - t0) * 1e3)

    recs = parallel_map(one, sorted(deltas, reverse=True), threads)
    aux = {
        "closed_form": closed,
        "density_integral": inner,
        "density_tail": tail,
        "rhs_vs_closed_rel": abs(rhs - closed) / abs(closed),
        "rel_err_vs_closed": [abs(r.lhs - closed) / abs(closed) for r in recs],
    }
    return LimitReport.from_records(recs, aux=aux)


def conical_limit_experiment(template: ComplexRegime, deltas: Sequence[float],
                             tol: float = 1e-5, threads: int = 1) -> LimitReport:
    """Sum-of-period-integrals of the conical integrand against the plane
    conical function."""
    if template.rho is None:
        raise ParameterError("conical experiment needs rho and sigma")
    rhs = complex_conical_phi(regime_conical_params(template), tol)

    def one(delta):
        t0 = time.perf_counter()
        reg = template.with_delta(delta)
        res = cylinder_sum(conical_line_integrand(reg), reg, reg.M, tol,
                           seed_beta_breaks=(0.0, reg.sigma))
        return ConvergenceRecord.make(delta, res.value, rhs, res.evals,
                                      (time.perf_counter() - t0) * 1e3)

    recs = parallel_map(one, sorted(deltas, reverse=True), threads)
    return LimitReport.from_records(recs, aux={"phi": rhs})


def beta_sum_tails(template: ComplexRegime, delta: float,
                   Ms: Sequence[int] = (1, 2, 3), M_ref: int = 6,
                   tol: float = 1e-8) -> dict:
    """Measured truncation tails of the beta sum at fixed delta, with the
    exponential envelope fitted at the smallest cutoff."""
    reg = template.with_delta(delta)
    I = beta_line_integrand(reg)
    sums = {M: cylinder_sum(I, reg, M, tol).value for M in (*Ms, M_ref)}
    tails = {M: abs(sums[M_ref] - sums[M]) for M in Ms}
    im_u = abs(complex(reg.u).imag)
    rate = 2.0 * np.pi * im_u
    C = tails[Ms[0]] * math.exp(rate * Ms[0])
    bound = {M: C * math.exp(-rate * M) for M in Ms}
    ok = all(tails[M] <= bound[M] * (1.0 + 1e-9) for M in Ms)
    return {"tails": tails, "bound": bound, "C": C, "rate": rate, "ok": ok,
            "sums": {M: sums[M] for M in sums}}


def exact_rewrite_check(template: ComplexRegime, delta: float = 0.5,
                        M: int = 16, tol: float = 1e-8) -> dict:
    """At a coarse delta the period decomposition is an exact rewriting of
    the line integral; measure the discrepancy."""
    reg = template.with_delta(delta)
    I = beta_line_integrand(reg)
    s = cylinder_sum(I, reg, M, tol)
    line = integrate_line(I, LineSpec(tol=tol))
    sum_val = s.value / reg.delta
    line_val = line.value / reg.sqrt_w1w2
    return {"sum": sum_val, "line": line_val,
            "abs_diff": abs(sum_val - line_val),
            "evals": s.evals + line.evals}


# ---------------------------------------------------------------------------
# Classical limits
# ---------------------------------------------------------------------------

def euler_beta2_identity(u: float, v: float, tol: float = 1e-10,
                         omega2: float = 1.0):
    """The classical-degenerate beta identity (an exact identity, no limit).

    Returns (lhs, rhs, residual)."""
    if not (abs(v) < u):
        raise ParameterError("need |v| < u for convergence")

    def f(z):
        z = np.asarray(z, dtype=complex)
        return (np.exp(2j * np.pi * v * z / omega2)
                * (2.0 * np.cos(np.pi * z / omega2)) ** (-2.0 * u))

    res = integrate_line(f, LineSpec(tol=tol))
    lhs = 2.0 * np.pi * res.value / omega2
    rhs = euler_gamma(v + u) * euler_gamma(-v + u) / euler_gamma(2.0 * u)
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


def classical_limit_experiment(u: float, v: float, x: complex,
                               omega1_list: Sequence[float],
                               z_point: float = 0.4,
                               z_ratio: complex = 0.4 + 0.2j,
                               tol: float = 1e-9,
                               threads: int = 1) -> dict:
    """Small-first-period limits: (i) gamma point normalization -> 1,
    (ii) gamma ratio -> sine power, (iii) conical -> hypergeometric.

    Returns {"point": ..., "ratio": ..., "conical": ...} limit reports,
    with omega2 = 1 fixed and omega1 descending."""
    om1s = sorted(omega1_list, reverse=True)

    def point_one(w1):
        t0 = time.perf_counter()
        om = PeriodPair(1.0, 1.0 / w1)   # gamma(z w1; w1, 1) = gamma(z; 1, 1/w1)
        g = hyp_gamma_integral(z_point, om, tol)
        lhs = (g.value * math.sqrt(2.0 * np.pi)
               * (2.0 * np.pi * w1) ** (0.5 - z_point)
               / euler_gamma(z_point))
        return ConvergenceRecord.make(w1, lhs, 1.0, 0,
                                      (time.perf_counter() - t0) * 1e3)

    def ratio_one(w1):
        t0 = time.perf_counter()
        om = PeriodPair(1.0, 1.0 / w1)
        zs = complex(z_ratio) / w1
        gn = hyp_gamma_integral(zs + u, om, tol)
        gd = hyp_gamma_integral(zs, om, tol)
        lhs = gn.value / gd.value
        rhs = (2.0 * np.sin(np.pi * complex(z_ratio))) ** u
        return ConvergenceRecord.make(w1, lhs, rhs, 0,
                                      (time.perf_counter() - t0) * 1e3)

    wt = 1.0 - np.exp(2j * np.pi * complex(x))
    f21 = gauss_2f1_euler(2 * u, 2 * u - v, 4 * u, wt, 1e-12)
    rhs_con = (np.exp(2j * np.pi * complex(x) * u)
               * euler_gamma(2 * u - v) * euler_gamma(2 * u + v)
               / (2.0 * np.pi * euler_gamma(4 * u)) * f21)

    def conical_one(w1):
        t0 = time.perf_counter()
        om = PeriodPair(w1, 1.0)
        psi = four_gamma_line(x, v * w1, u * w1, om, tol=1e-8)
        lhs = np.sqrt(w1) * psi
        return ConvergenceRecord.make(w1, lhs, rhs_con, 0,
                                      (time.perf_counter() - t0) * 1e3)

    out = {
        "point": LimitReport.from_records(parallel_map(point_one, om1s, threads)),
        "ratio": LimitReport.from_records(parallel_map(ratio_one, om1s, threads)),
        "conical": LimitReport.from_records(parallel_map(conical_one, om1s, threads)),
    }
    return out


def classical_conical_quadrature(u: float, v: float, x: complex,
                                 tol: float = 1e-10, omega2: float = 1.0) -> complex:
    """Direct quadrature of the classical limit of the conical function."""
    x = complex(x)

    def f(z):
        z = np.asarray(z, dtype=complex)
        return (np.exp(2j * np.pi * v * z / omega2)
                * (2.0 * np.cos(np.pi * z / omega2)) ** (-2.0 * u)
                * (2.0 * np.cos(np.pi * (z - x) / omega2)) ** (-2.0 * u))

    res = integrate_line(f, LineSpec(tol=tol))
    return res.value / omega2


# ---------------------------------------------------------------------------
# Excluded terms and Riemann gaps
# ---------------------------------------------------------------------------

def _beta_period_integral(I, regime: ComplexRegime, N: int, tol: float,
                          seed: Sequence[float] = (0.0,)):
    isq = regime.i_sqrt_w1w2

    def g(beta):
        return I(isq * (N + np.asarray(beta)))

    breaks = sorted({-0.5, 0.5, *[b for b in seed if -0.5 < b < 0.5]})
    r = adaptive_segments(g, breaks, tol)
    return r.value, r.evals


def envelope_value(delta: float, im_u: float, C1: float, C2: float) -> float:
    """C1 delta^{2(1+Im u)} + C2 delta ln(1/delta), the excluded-term envelope."""
    p = 2.0 * (1.0 + im_u)
    return C1 * delta ** p + C2 * delta * math.log(1.0 / delta)


def fit_envelope(deltas: Sequence[float], values: Sequence[float],
                 im_u: float):
    """Fit nonnegative (C1, C2) through the two coarsest grid values."""
    order = np.argsort(deltas)[::-1]
    d0, v0 = deltas[order[0]], values[order[0]]
    p = 2.0 * (1.0 + im_u)
    if len(order) == 1:
        c2 = v0 / (d0 * math.log(1.0 / d0))
        return 0.0, c2
    d1, v1 = deltas[order[1]], values[order[1]]
    A = np.array([[d0 ** p, d0 * math.log(1.0 / d0)],
                  [d1 ** p, d1 * math.log(1.0 / d1)]])
    c1, c2 = np.linalg.solve(A, [v0, v1])
    if c1 < 0 or c2 < 0:
        # clamp to the single-term fit that still dominates both points
        c1 = 0.0
        c2 = max(v0 / (d0 * math.log(1.0 / d0)),
                 v1 / (d1 * math.log(1.0 / d1)))
    return float(c1), float(c2)


def excluded_term_decay(template: ComplexRegime, N: int,
                        deltas: Sequence[float], tol: float = 1e-9,
                        threads: int = 1) -> LimitReport:
    """delta * (one period integral) at index N.

    Records hold the complex term delta * int I dbeta; the absolute mass
    delta * int |I| dbeta (the quantity the decay proof actually bounds) is
    kept in ``aux`` together with its fitted power/log envelope.  The
    plane-density counterpart is recorded whenever its alpha-point is
    regular."""
    conical = template.rho is not None

    def one(delta):
        t0 = time.perf_counter()
        reg = template.with_delta(delta)
        if conical:
            I = conical_line_integrand(reg)
            seed = (0.0, reg.sigma)
        else:
            I = beta_line_integrand(reg)
            seed = (0.0,)
        val, ev = _beta_period_integral(I, reg, N, tol, seed)
        absval, ev2 = _beta_period_integral(
            lambda z, I=I: np.abs(I(z)), reg, N, tol, seed)
        term = delta * val
        jterm = None
        singular = {0}
        if conical:
            singular |= {reg.K, reg.K + 1}
        if N not in singular:
            J = (conical_density(regime_conical_params(reg)) if conical
                 else beta_density(reg))
            r = adaptive_segments(lambda b: J(np.full_like(b, N * delta), b),
                                  sorted({-0.5, 0.5, *seed}), tol)
            jterm = delta * r.value
        rec = ConvergenceRecord.make(delta, term, 0.0, ev + ev2,
                                     (time.perf_counter() - t0) * 1e3)
        return rec, delta * absval.real, jterm

    out = parallel_map(one, sorted(deltas, reverse=True), threads)
    recs = [r for r, _, _ in out]
    masses = [m for _, m, _ in out]
    jterms = [j for _, _, j in out]
    im_u = complex(template.u).imag
    ds = [r.delta for r in recs]
    c1, c2 = fit_envelope(ds, masses, im_u)
    env = [envelope_value(d, im_u, c1, c2) for d in ds]
    aux = {
        "abs_mass": masses,
        "envelope": env,
        "C1": c1, "C2": c2,
        "within_envelope": all(m <= 1.1 * e for m, e in zip(masses, env)),
        "mass_monotone": all(masses[i + 1] <= 1.1 * masses[i]
                             for i in range(len(masses) - 1)),
        "j_terms": jterms,
    }
    return LimitReport.from_records(recs, metric="abs", aux=aux)


def _graded_alpha_integral(G, a: float, b: float, sing: Sequence[tuple],
                           tol: float) -> complex:
    """int_a^b G(alpha) dalpha with power grading at singular alphas.

    ``sing``: (location, exponent) pairs with exponent > -1 describing
    G ~ |alpha - a0|^exponent."""
    pts = sorted({a, b, *[s for s, _ in sing if a < s < b]})
    total = 0.0 + 0.0j
    for lo, hi in zip(pts[:-1], pts[1:]):
        q_lo = next((q for s, q in sing if abs(s - lo) < 1e-14), 0.0)
        q_hi = next((q for s, q in sing if abs(s - hi) < 1e-14), 0.0)
        mid = 0.5 * (lo + hi)
        for (x0, x1, q, flip) in ((lo, mid, q_lo, False), (hi, mid, q_hi, True)):
            w = abs(x1 - x0)
            if q == 0.0:
                r = adaptive_segments(G, [min(x0, x1), max(x0, x1)], tol / 4)
                total += r.value
                continue
            kappa = 2.0 / (1.0 + q)

            def sub(sig, x0=x0, x1=x1, kappa=kappa):
                # anchored at the singular end x0; |step| keeps orientation +
                sig = np.asarray(sig, dtype=float)
                step = x1 - x0
                al = x0 + step * sig ** kappa
                jac = abs(step) * kappa * sig ** (kappa - 1.0)
                return G(al) * jac

            r = adaptive_segments(sub, [0.0, 1.0], tol / 4)
            total += r.value
    return total


def riemann_improper_gap(kind: str, template: ComplexRegime,
                         deltas: Sequence[float], M: int,
                         tol: float = 1e-7, threads: int = 1) -> LimitReport:
    """|delta sum G(N delta) - int G| with the singular indices excluded.

    ``kind`` is "beta" (exclude N = 0) or "conical" (exclude N = 0,
    K, K + 1 inside the three partial sums); the gaps must shrink with delta.
    """
    im_u = complex(template.u).imag
    if kind == "beta":
        J = beta_density(template)
        sing_alphas = [(0.0, 2.0 * im_u + 1.0)]
        seed = (0.0,)
    elif kind == "conical":
        if template.rho is None:
            raise ParameterError("conical kind needs rho/sigma")
        if M < template.rho + 2:
            raise ParameterError("need M >= rho + 2")
        J = conical_density(regime_conical_params(template))
        sing_alphas = [(0.0, 2.0 * im_u + 1.0),
                       (template.rho, 2.0 * im_u + 1.0)]
        seed = (0.0, template.sigma)
    else:
        raise ParameterError(f"unknown kind {kind!r}")

    def G_scalar(alpha):
        r = adaptive_segments(lambda b: J(np.full_like(b, alpha), b),
                              sorted({-0.5, 0.5, *seed}), tol * 1e-2)
        return r.value

    def G_vec(alphas):
        return np.array([G_scalar(a) for a in np.atleast_1d(alphas)])

    integral = _graded_alpha_integral(G_vec, -float(M), float(M),
                                      sing_alphas, tol)

    def one(delta):
        t0 = time.perf_counter()
        reg = template.with_delta(delta)
        nmax = int(round(M / delta))
        if kind == "beta":
            idx = [N for N in range(-nmax, nmax + 1) if N != 0]
        else:
            K = reg.K
            idx = (list(range(-nmax, 0)) + list(range(1, K))
                   + list(range(K + 2, nmax + 1)))
        vals = [G_scalar(N * delta) for N in idx]
        s = delta * complex(fsum(v.real for v in vals),
                            fsum(v.imag for v in vals))
        return ConvergenceRecord.make(delta, s, integral, len(idx),
                                      (time.perf_counter() - t0) * 1e3)

    recs = parallel_map(one, sorted(deltas, reverse=True), threads)
    return LimitReport.from_records(recs, metric="abs",
                                    aux={"integral": integral})


def conical_three_sum_split(template: ComplexRegime, delta: float,
                            tol: float = 1e-8) -> dict:
    """Bookkeeping check: the three partial sums equal the full index sum
    minus the excluded terms, exactly."""
    reg = template.with_delta(delta)
    J = conical_density(regime_conical_params(reg))
    nmax = int(round(reg.M / delta))
    K = reg.K

    def term(N):
        r = adaptive_segments(lambda b: J(np.full_like(b, N * delta), b),
                              sorted({-0.5, 0.5, 0.0, reg.sigma}), tol)
        return r.value

    full = [term(N) for N in range(-nmax, nmax + 1)]
    full_sum = complex(fsum(v.real for v in full), fsum(v.imag for v in full))
    excl = [full[N + nmax] for N in (0, K, K + 1)]
    excl_sum = complex(fsum(v.real for v in excl), fsum(v.imag for v in excl))
    three = [full[N + nmax] for N in range(-nmax, 0)] \
        + [full[N + nmax] for N in range(1, K)] \
        + [full[N + nmax] for N in range(K + 2, nmax + 1)]
    three_sum = complex(fsum(v.real for v in three), fsum(v.imag for v in three))
    return {"three_sum": three_sum, "full_minus_excluded": full_sum - excl_sum,
            "diff": abs(three_sum - (full_sum - excl_sum))}
