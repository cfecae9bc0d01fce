"""Mittag-Leffler and Wright functions on the real line.

Evaluation strategy for ``mittag_leffler`` at real ``z``:

* ``z >= 0``: compensated power series (all terms share a sign).
* ``z < 0``: the scaled magnitude ``s = |z|**(1/nu)`` controls cancellation.
  The series loses about ``exp(s) * eps`` to rounding, so it is used only
  while that stays below ``tol``. Past ``s_asym = log(100/tol)`` the
  algebraic asymptotic expansion (plus the residue terms for ``1 < nu < 3``)
  is accurate. In between, for ``mu == 1`` and ``0 < nu < 2``, a real-line
  Laplace-type integral representation is integrated numerically.

``wright`` uses its series, switching to an integral representation of the
M-Wright function ``W_{-lam, 1-lam}(-x)`` when the series would cancel.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from ._backend import kernels
from .errors import InvalidParams, NonConvergence, PoleError

EPS = np.finfo(float).eps
DEFAULT_MAX_TERMS = 10_000
# Plain |z| threshold; the adaptive rule above supersedes it in "auto" mode.
Z_SWITCH = 50.0


@dataclass(frozen=True)
class MLParams:
    nu: float
    mu: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise InvalidParams(f"Mittag-Leffler needs nu > 0, got {self.nu}")
        if not math.isfinite(self.mu):
            raise InvalidParams(f"mu must be finite, got {self.mu}")


@dataclass(frozen=True)
class WrightParams:
    nu: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > -1):
            raise InvalidParams(f"Wright function needs nu > -1, got {self.nu}")
        if not math.isfinite(self.mu):
            raise InvalidParams(f"mu must be finite, got {self.mu}")


@dataclass(frozen=True)
class EvalResult:
    """Value with an error estimate.

    ``tail_bound`` is the truncation part of ``est_abs_error`` (zero for the
    quadrature branches).
    """

    value: float
    est_abs_error: float
    terms_used: int
    method: str = "series"
    tail_bound: float = 0.0

    def __float__(self):
        return self.value


def gamma_fn(x):
    """Gamma function for real ``x``; raises PoleError at 0, -1, -2, ..."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return math.gamma(x)


def rgamma(x):
    """1/Gamma(x), exactly 0 at the poles of Gamma."""
    return kernels.rgamma(float(x))


def _check_tol(tol):
    if not (tol > 0 and math.isfinite(tol)):
        raise InvalidParams(f"tol must be positive, got {tol}")


def s_asymptotic(tol):
    return max(math.log(100.0 / tol), 20.0)


def _predicted_series_rounding(nu, mu, s):
    # sum of |terms| ~ E_{nu,mu}(|z|) ~ s**(1-mu) exp(s) / nu
    log_pred = math.log(16.0 * EPS / nu) + s + max(0.0, (1.0 - mu) * math.log(s))
    return math.exp(min(log_pred, 700.0))


def _has_exact_asymptotics(nu, mu):
    # residues plus a finite algebraic sum (1/Gamma(mu - nu k) = 0 once mu - nu k <= 0)
    return nu in (1.0, 2.0) and mu == math.floor(mu) and mu >= 1


def _ml_series(nu, mu, z, tol, max_terms):
    v, tail, rnd, n, ok = kernels.ml_series(nu, mu, z, tol, max_terms)
    if not ok:
        raise NonConvergence(
            f"E_{{{nu},{mu}}}({z}): series needs more than {max_terms} terms"
        )
    return EvalResult(v, tail + rnd, max(n, 1), "series", tail)


def _ml_asymptotic(nu, mu, z, tol, max_terms):
    if z >= 0:
        raise InvalidParams("asymptotic branch is implemented for z < 0 only")
    v, err, n = kernels.ml_asymptotic(nu, mu, z, tol, max_terms)
    if math.isnan(v):
        raise InvalidParams(f"no asymptotic expansion for nu={nu}, mu={mu}")
    return EvalResult(v, err, n, "asymptotic", err)


_GL_HI = np.polynomial.legendre.leggauss(20)
_GL_LO = np.polynomial.legendre.leggauss(13)
_CHUNK = 2048


def _angle_setup(nu):
    sn = math.sin(nu * math.pi)
    cn = math.cos(nu * math.pi)
    a = abs(sn)
    return sn, cn, a, a * a + cn * cn


def _angle_breaks_r(nu, cn, a):
    """Breakpoints in r that do not depend on t (Lorentzian peak and its flanks)."""
    if cn >= 0:
        return np.empty(0)
    peak = (-cn) ** (1.0 / nu)
    extra = [peak]
    if a < 0.25:
        # the flanks of the peak sit a distance ~a from it; bisect down to that scale
        k = int(min(45, math.ceil(math.log2(1.0 / a)) + 2))
        fr = 2.0 ** -np.arange(1, k + 1)
        extra = np.concatenate([[peak], peak * (1 - fr), peak * (1 + fr)])
    return np.asarray(extra, dtype=float)


# t r values where exp(-t r) changes character; beyond t r = 50 it is below 2e-22
_TR_BREAKS = np.concatenate([4.0 ** -np.arange(7, -1, -1), np.arange(2.0, 51.0, 2.0)])


def _ml_integral_many(nu, x):
    """Fixed-panel Gauss-Legendre version of ``_ml_integral`` for an array of x > 0.

    Returns (values, est_abs_errors); the error is the 20- vs 13-point difference.
    """
    x = np.asarray(x, dtype=float)
    sn, cn, a, h2 = _angle_setup(nu)
    inv_nu = 1.0 / nu
    peak_r = _angle_breaks_r(nu, cn, a)
    scale = 1.0 / (math.pi * nu)
    vals = np.empty(x.shape)
    errs = np.empty(x.shape)
    for c0 in range(0, x.size, _CHUNK):
        xc = x[c0:c0 + _CHUNK]
        t = xc ** inv_nu
        r = _TR_BREAKS[None, :] / t[:, None]
        if peak_r.size:
            r = np.concatenate([r, np.broadcast_to(peak_r, (t.size, peak_r.size))], axis=1)
        rn = np.sort(r, axis=1) ** nu
        edges = np.concatenate([np.zeros((t.size, 1)), np.arctan2(rn * a, h2 + cn * rn)], axis=1)
        lo = edges[:, :-1, None]
        half = 0.5 * (edges[:, 1:, None] - lo)
        sums = []
        for xg, wg in (_GL_HI, _GL_LO):
            d = lo + half * (1.0 + xg)
            den = a * np.cos(d) - cn * np.sin(d)
            ok = den > 0
            u = np.where(ok, h2 * np.sin(d) / np.where(ok, den, 1.0), np.inf)
            g = np.exp(-t[:, None, None] * u ** inv_nu)
            sums.append(np.sum(g * wg * half, axis=(1, 2)))
        vals[c0:c0 + _CHUNK] = math.copysign(scale, sn) * sums[0]
        errs[c0:c0 + _CHUNK] = scale * np.abs(sums[0] - sums[1])
    if nu > 1:
        vals += np.array([kernels.ml_exponential_part(nu, 1.0, xi) for xi in x])
        errs += np.array([kernels.ml_exponential_rounding(nu, 1.0, xi) for xi in x])
    errs += 4 * EPS * np.abs(vals)
    return vals, errs


def _ml_integral_adaptive(nu, x, tol):
    sn, cn, a, h2 = _angle_setup(nu)
    t = x ** (1.0 / nu)
    inv_nu = 1.0 / nu

    def integrand(d):
        den = a * math.cos(d) - cn * math.sin(d)
        if den <= 0.0:
            return 0.0
        return math.exp(-t * (h2 * math.sin(d) / den) ** inv_nu)

    rs = np.concatenate([_TR_BREAKS / t, _angle_breaks_r(nu, cn, a)])
    rn = rs ** nu
    edges = sorted({0.0} | set(np.arctan2(rn * a, h2 + cn * rn).tolist()))
    total = 0.0
    abserr = 0.0
    neval = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e, info = integrate.quad(integrand, lo, hi, epsabs=0.01 * tol, epsrel=1e-13,
                                    limit=200, full_output=1)[:3]
        total += v
        abserr += e
        neval += info["neval"]
    scale = 1.0 / (math.pi * nu)
    total *= math.copysign(scale, sn)
    err = abserr * scale + 4 * EPS * abs(total)
    if nu > 1:
        total += kernels.ml_exponential_part(nu, 1.0, x)
        err += kernels.ml_exponential_rounding(nu, 1.0, x) + 4 * EPS * abs(total)
    return total, err, neval


def _ml_integral(nu, z, tol):
    """E_{nu,1}(-x) for 0 < nu < 2, nu != 1, via a real-line integral.

    E_nu(-t**nu) = int_0^inf exp(-r t) K(r) dr  (+ two residues if nu > 1),
    K(r) = sin(nu pi) r**(nu-1) / (pi (r**(2nu) + 2 r**nu cos(nu pi) + 1)).

    K is a Lorentzian in r**nu of width ~|sin(nu pi)|, so we integrate in
    the angle d with r**nu = h2 sin(d) / (a cos(d) - c sin(d)), which turns
    K dr into a constant times dd and stays well conditioned as nu -> 1.
    A fixed Gauss-Legendre panel rule is tried first, adaptive quadrature
    only when its error estimate misses ``tol``.
    """
    if not (0 < nu < 2) or nu == 1:
        raise InvalidParams(f"integral representation needs 0 < nu < 2, nu != 1 (got {nu})")
    x = -z
    v, e = _ml_integral_many(nu, np.array([x]))
    if e[0] <= tol:
        n_panels = _TR_BREAKS.size + _angle_breaks_r(nu, *_angle_setup(nu)[1:3]).size
        return EvalResult(float(v[0]), float(e[0]), 33 * n_panels, "integral", 0.0)
    total, err, neval = _ml_integral_adaptive(nu, x, tol)
    return EvalResult(total, err, neval, "integral", 0.0)


def mittag_leffler(params, z, tol=1e-12, *, method="auto", max_terms=DEFAULT_MAX_TERMS):
    """E_{nu,mu}(z) = sum_r z**r / Gamma(nu r + mu) for real ``z``.

    ``method`` is one of ``auto``, ``series``, ``asymptotic``, ``integral``.
    The postcondition is ``|value - E| <= max(tol, est_abs_error)``.
    """
    if not isinstance(params, MLParams):
        params = MLParams(*params)
    _check_tol(tol)
    nu, mu, z = float(params.nu), float(params.mu), float(z)
    if method == "series":
        return _ml_series(nu, mu, z, tol, max_terms)
    if method == "asymptotic":
        return _ml_asymptotic(nu, mu, z, tol, max_terms)
    if method == "integral":
        if mu != 1.0:
            raise InvalidParams("integral representation needs mu == 1")
        if z >= 0:
            raise InvalidParams("integral representation needs z < 0")
        return _ml_integral(nu, z, tol)
    if method != "auto":
        raise InvalidParams(f"unknown method {method!r}")

    if z >= 0:
        return _ml_series(nu, mu, z, tol, max_terms)
    s = (-z) ** (1.0 / nu)
    candidates = []
    if _predicted_series_rounding(nu, mu, s) <= tol:
        res = _ml_series(nu, mu, z, tol, max_terms)
        if res.est_abs_error <= tol:
            return res
        candidates.append(res)
    asym_ok = nu < 3 and not (nu == 1 and mu != math.floor(mu))
    if asym_ok and (_has_exact_asymptotics(nu, mu) or s >= s_asymptotic(tol)):
        res = _ml_asymptotic(nu, mu, z, tol, max_terms)
        if res.est_abs_error <= tol:
            return res
        candidates.append(res)
    if mu == 1.0 and 0 < nu < 2 and nu != 1:
        return _ml_integral(nu, z, tol)
    if not candidates:
        # no accurate branch exists here; report the least bad one honestly
        if asym_ok:
            candidates.append(_ml_asymptotic(nu, mu, z, tol, max_terms))
        if s < 700:
            try:
                candidates.append(_ml_series(nu, mu, z, tol, max_terms))
            except NonConvergence:
                pass
        if not candidates:
            raise NonConvergence(f"E_{{{nu},{mu}}}({z}): no branch converged")
    return min(candidates, key=lambda r: r.est_abs_error)


def mittag_leffler_one_param(alpha_plus_one, z, tol=1e-12, **kw):
    """E_gamma(z) = E_{gamma,1}(z), the kernel of the bounded-domain series."""
    return mittag_leffler(MLParams(alpha_plus_one, 1.0), z, tol, **kw)


def ml_values(nu, mu, z, tol=1e-12, *, max_terms=DEFAULT_MAX_TERMS):
    """Vectorised E_{nu,mu}(z) returning (values, est_abs_errors) arrays.

    Uses the same branch rule as ``mittag_leffler``; the bulk series and
    asymptotic work goes through the compiled kernels in one call each.
    """
    params = MLParams(nu, mu)
    _check_tol(tol)
    nu, mu = float(params.nu), float(params.mu)
    z = np.asarray(z, dtype=float)
    shape = z.shape
    zf = z.ravel()
    vals = np.empty(zf.shape)
    errs = np.empty(zf.shape)
    done = np.zeros(zf.shape, dtype=bool)

    neg = zf < 0
    s = np.where(neg, np.abs(zf), 0.0) ** (1.0 / nu)
    with np.errstate(over="ignore", divide="ignore"):
        pred = 16.0 * EPS * np.exp(s) * np.maximum(1.0, s ** (1.0 - mu)) / nu
    try_series = ~neg | (pred <= tol)
    idx = np.flatnonzero(try_series)
    if idx.size:
        v, e, _, ok = kernels.ml_series_many(nu, mu, zf[idx], tol, max_terms)
        good = ok & ((e <= tol) | ~neg[idx])
        vals[idx[good]] = v[good]
        errs[idx[good]] = e[good]
        done[idx[good]] = True
    asym_ok = nu < 3 and not (nu == 1 and mu != math.floor(mu))
    if asym_ok:
        if _has_exact_asymptotics(nu, mu):
            cand = neg & ~done
        else:
            cand = neg & ~done & (s >= s_asymptotic(tol))
        idx = np.flatnonzero(cand)
        if idx.size:
            v, e, _ = kernels.ml_asymptotic_many(nu, mu, zf[idx], tol, max_terms)
            good = e <= tol
            vals[idx[good]] = v[good]
            errs[idx[good]] = e[good]
            done[idx[good]] = True
    if mu == 1.0 and 0 < nu < 2 and nu != 1:
        idx = np.flatnonzero(neg & ~done)
        if idx.size:
            v, e = _ml_integral_many(nu, -zf[idx])
            good = e <= tol
            vals[idx[good]] = v[good]
            errs[idx[good]] = e[good]
            done[idx[good]] = True
    for i in np.flatnonzero(~done):
        r = mittag_leffler(params, zf[i], tol, max_terms=max_terms)
        vals[i] = r.value
        errs[i] = r.est_abs_error
    return vals.reshape(shape), errs.reshape(shape)


def _is_m_wright(nu, mu):
    return -1 < nu < 0 and abs(mu - (1.0 + nu)) <= 4 * EPS


def _m_wright_integral(lam, x, tol):
    """M_lam(x) = W_{-lam,1-lam}(-x) for 0 < lam < 1, x > 0.

    M_lam(x) = x**(lam/(1-lam)) / (pi (1-lam)) * int_0^pi A exp(-A x**(1/(1-lam))) dphi
    with A(phi) = (sin(lam phi)**lam sin((1-lam) phi)**(1-lam) / sin(phi))**(1/(1-lam)).
    """
    c = 1.0 - lam
    lx = math.log(x)
    big_x = math.exp(lx / c)
    lpref = (lam / c) * lx - math.log(math.pi * c)
    la0 = (lam * math.log(lam) + c * math.log(c)) / c

    def integrand(phi):
        if phi <= 0.0:
            la = la0
        elif phi >= math.pi:
            return 0.0
        else:
            la = (lam * math.log(math.sin(lam * phi)) + c * math.log(math.sin(c * phi))
                  - math.log(math.sin(phi))) / c
        e = lpref + la - math.exp(la) * big_x
        return math.exp(e) if e > -745.0 else 0.0

    v, err, info = integrate.quad(integrand, 0.0, math.pi, epsabs=0.01 * tol, epsrel=1e-13,
                                  limit=200, full_output=1)[:3]
    return EvalResult(v, err + 4 * EPS * abs(v), info["neval"], "integral", 0.0)


def _wright_series_peak(nu, mu, z):
    """(index, log-magnitude) of the largest series term, rough Stirling estimate."""
    az = abs(z)
    if nu < 0:
        a = -nu
        r = (az * a ** a) ** (1.0 / (1.0 - a))
        return r, (1.0 - a) * r
    r = (az / max(nu, 1e-300) ** nu) ** (1.0 / (1.0 + nu)) if nu > 0 else az
    return r, (1.0 + nu) * r


def wright(params, z, tol=1e-12, *, method="auto", max_terms=DEFAULT_MAX_TERMS):
    """W_{nu,mu}(z) = sum_r z**r / (r! Gamma(nu r + mu)) for real ``z``.

    For ``-1 < nu < 0`` only ``z <= 0`` is supported. ``method`` is ``auto``,
    ``series`` or ``integral`` (the latter only for the M-Wright case
    ``mu = 1 + nu``).
    """
    if not isinstance(params, WrightParams):
        params = WrightParams(*params)
    _check_tol(tol)
    nu, mu, z = float(params.nu), float(params.mu), float(z)
    if nu < 0 and z > 0:
        raise InvalidParams("for -1 < nu < 0 only z <= 0 is supported")
    mw = _is_m_wright(nu, mu) and z < 0
    if method == "integral":
        if not mw:
            raise InvalidParams("integral branch needs mu = 1 + nu, -1 < nu < 0, z < 0")
        return _m_wright_integral(-nu, -z, tol)
    if method not in ("auto", "series"):
        raise InvalidParams(f"unknown method {method!r}")

    if method == "auto" and nu == 0.0:
        # the series is exp(z) / Gamma(mu) term by term; for z << 0 it cancels badly
        v = math.exp(z) * rgamma(mu)
        return EvalResult(v, 4 * EPS * (1.0 + abs(z)) * abs(v), 1, "closed-form", 0.0)
    if method == "auto" and mw:
        r_peak, log_peak = _wright_series_peak(nu, mu, z)
        if r_peak > max_terms / 2 or 16 * EPS * math.exp(min(log_peak, 700.0)) > tol:
            return _m_wright_integral(-nu, -z, tol)
    v, tail, rnd, n, ok = kernels.wright_series(nu, mu, z, tol, max_terms)
    if not ok:
        if method == "auto" and mw:
            return _m_wright_integral(-nu, -z, tol)
        raise NonConvergence(f"W_{{{nu},{mu}}}({z}): series needs more than {max_terms} terms")
    res = EvalResult(v, tail + rnd, max(n, 1), "series", tail)
    if method == "auto" and mw and res.est_abs_error > tol:
        alt = _m_wright_integral(-nu, -z, tol)
        if alt.est_abs_error < res.est_abs_error:
            return alt
    return res


def m_wright(lam, x, tol=1e-12):
    """M-Wright function M_lam(x) = W_{-lam,1-lam}(-x) at each |x| (vectorised)."""
    if not 0 < lam < 1:
        raise InvalidParams(f"M-Wright index must lie in (0, 1), got {lam}")
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty(x.shape)
    params = WrightParams(-lam, 1.0 - lam)
    flat = out.reshape(-1)
    for i, xi in enumerate(x.reshape(-1)):
        flat[i] = wright(params, -xi, tol).value
    return out
