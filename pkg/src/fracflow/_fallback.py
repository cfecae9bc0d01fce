"""Pure-Python implementations of the hot kernels.

Every function here has a twin with the same signature in ``_core.pyx``.
``fracflow._backend`` picks the compiled one when it imports cleanly.
"""

import math

import numpy as np

EPS = 2.220446049250313e-16
LOG_PI = math.log(math.pi)
# |x| beyond which Gamma(x) or 1/Gamma(x) leaves the double range
GAMMA_DIRECT_LIMIT = 170.0
TINY_ARG = 1e-8
EXP_LIMIT = 700.0


def sinpi(x):
    """sin(pi*x) with exact argument reduction, exactly 0 at integers."""
    y = math.fmod(x, 2.0)
    if y < -1.0:
        y += 2.0
    elif y > 1.0:
        y -= 2.0
    if y > 0.5:
        y = 1.0 - y
    elif y < -0.5:
        y = -1.0 - y
    return math.sin(math.pi * y)


def is_nonpositive_integer(x):
    return x <= 0.0 and x == math.floor(x)


def log_abs_rgamma(x):
    """Return (log|1/Gamma(x)|, sign of 1/Gamma(x)); sign 0 at the poles."""
    if x > 0.0:
        return -math.lgamma(x), 1.0
    if is_nonpositive_integer(x):
        return -math.inf, 0.0
    sp = sinpi(x)
    return math.log(abs(sp)) + math.lgamma(1.0 - x) - LOG_PI, (1.0 if sp > 0 else -1.0)


def rgamma(x):
    """Reciprocal gamma function, entire: exactly 0 at 0, -1, -2, ..."""
    if is_nonpositive_integer(x):
        return 0.0
    if abs(x) < TINY_ARG:
        # Gamma(x) overflows near 0; 1/Gamma(x) = x / Gamma(1 + x)
        return x / math.gamma(1.0 + x)
    if -GAMMA_DIRECT_LIMIT < x < GAMMA_DIRECT_LIMIT:
        return 1.0 / math.gamma(x)
    lg, sg = log_abs_rgamma(x)
    if lg > EXP_LIMIT:
        return sg * math.inf
    return sg * math.exp(lg)


def log_renv(x):
    """log of an upper bound for |1/Gamma(x)| that never vanishes."""
    if x > 0.5:
        return -math.lgamma(x)
    # |1/Gamma(x)| = Gamma(1-x) |sin(pi x)| / pi <= Gamma(1-x) / pi
    return math.lgamma(1.0 - x) - LOG_PI


def _series_term(nu, mu, z, lz, r, wright):
    """One series term and the log of its envelope.

    Mittag-Leffler: z^r / Gamma(nu r + mu)
    Wright:         z^r / (r! Gamma(nu r + mu))
    """
    x = nu * r + mu
    lfact = math.lgamma(r + 1.0) if wright else 0.0
    lenv = r * lz - lfact + log_renv(x)
    rlz = r * lz
    # x carries a rounding error of ~eps |x|, which moves 1/Gamma(x) by ~psi(x) eps |x|
    cond = abs(x) * (math.log1p(abs(x)) + 1.0)
    if abs(x) < GAMMA_DIRECT_LIMIT and abs(rlz) < EXP_LIMIT and r < 170:
        t = z ** r * rgamma(x)
        if wright:
            t /= math.factorial(r)
        return t, lenv, cond
    lg, sg = log_abs_rgamma(x)
    if sg == 0.0:
        return 0.0, lenv, 0.0
    lm = rlz - lfact + lg
    if z < 0 and r % 2 == 1:
        sg = -sg
    if lm > EXP_LIMIT:
        return sg * math.inf, lenv, 0.0
    # exp() turns the absolute rounding error of its argument into a relative one;
    # that error scales with the pieces of lm, not with lm after they cancel
    return sg * math.exp(lm), lenv, abs(rlz) + lfact + abs(lg) + cond


def _series(nu, mu, z, tol, max_terms, wright):
    if z == 0.0:
        v = rgamma(mu)
        return v, 0.0, EPS * abs(v), 1, True
    lz = math.log(abs(z))
    tol_trunc = 0.25 * tol
    ltol = math.log(tol_trunc)
    s = 0.0
    comp = 0.0
    abs_sum = 0.0
    prev_lenv = math.inf
    for r in range(max_terms):
        t, lenv, amp = _series_term(nu, mu, z, lz, r, wright)
        past_poles = (nu * r + mu > 0.0) if nu >= 0.0 else (1.0 - mu - nu * r > 0.0)
        tail = math.inf
        if r >= 2 and past_poles and lenv <= ltol and lenv < prev_lenv:
            q = math.exp(lenv - prev_lenv)
            # Gamma(x)/Gamma(x+nu) never increases for x > 0, so any q < 1 bounds the tail
            monotone = not wright and nu * (r - 1) + mu > 0.5
            if (q <= 0.5 or monotone) and lenv - math.log1p(-q) <= ltol:
                tail = math.exp(lenv) / (1.0 - q)
        if tail < math.inf:
            if z < 0.0 and not wright:
                # alternating with decreasing magnitude from here on
                tail = min(tail, abs(t))
            value = s + comp
            return value, tail, 16.0 * EPS * abs_sum, r, True
        if not math.isfinite(t):
            return s + comp, math.inf, math.inf, r, False
        y = s + t
        if abs(s) >= abs(t):
            comp += (s - y) + t
        else:
            comp += (t - y) + s
        s = y
        abs_sum += abs(t) * (1.0 + amp / 16.0)
        prev_lenv = lenv
    return s + comp, math.exp(prev_lenv), 16.0 * EPS * abs_sum, max_terms, False


def ml_series(nu, mu, z, tol, max_terms):
    """Compensated partial sum of sum_r z^r / Gamma(nu r + mu).

    Returns (value, truncation_bound, rounding_estimate, terms_used, converged).
    """
    return _series(float(nu), float(mu), float(z), float(tol), int(max_terms), False)


def wright_series(nu, mu, z, tol, max_terms):
    """Compensated partial sum of sum_r z^r / (r! Gamma(nu r + mu)); same return shape."""
    return _series(float(nu), float(mu), float(z), float(tol), int(max_terms), True)


def ml_exponential_part(nu, mu, x):
    """Residue contribution to E_{nu,mu}(-x) for x > 0; nan where unsupported."""
    if nu < 1.0:
        return 0.0
    if nu == 1.0:
        if mu != math.floor(mu):
            return math.nan
        return (-x) ** (1.0 - mu) * math.exp(-x)
    if nu >= 3.0:
        return math.nan
    s = x ** (1.0 / nu)
    th = math.pi / nu
    mag = s ** (1.0 - mu) * math.exp(s * math.cos(th))
    return (2.0 / nu) * mag * math.cos(th * (1.0 - mu) + s * math.sin(th))


def ml_asymptotic(nu, mu, z, tol, max_terms):
    """Large-|z| expansion of E_{nu,mu}(z) for real z < 0.

    Returns (value, error_estimate, terms_used). The algebraic part is
    truncated at its smallest envelope term; the omitted remainder is bounded
    by the envelope, which stays positive where 1/Gamma happens to vanish.
    For nu in (1, 2) with integer mu >= 1 the algebraic part is a finite sum
    and the result is exact up to rounding.
    """
    nu = float(nu)
    mu = float(mu)
    x = -float(z)
    ex = ml_exponential_part(nu, mu, x)
    if math.isnan(ex):
        return math.nan, math.inf, 1
    exact = nu in (1.0, 2.0) and mu == math.floor(mu) and mu >= 1.0
    lx = math.log(x)
    ltol = math.log(0.125 * tol)
    s = 0.0
    abs_sum = abs(ex)
    prev_lenv = math.inf
    first_omitted = 0.0
    k_used = 0
    for k in range(1, max_terms + 1):
        arg = mu - nu * k
        if exact and arg <= 0.0:
            break
        lenv = -k * lx + log_renv(arg)
        if not exact and lenv > prev_lenv:
            first_omitted = math.exp(lenv)
            break
        lg, sg = log_abs_rgamma(arg)
        a = -((-1.0) ** k) * sg * math.exp(lg - k * lx) if sg != 0.0 else 0.0
        s += a
        abs_sum += abs(a)
        k_used = k
        prev_lenv = lenv
        if not exact and lenv <= ltol:
            first_omitted = math.exp(-(k + 1) * lx + log_renv(mu - nu * (k + 1)))
            break
    # the remainder of the geometric expansion carries 1/|1 - t**nu / z|,
    # which on the integration ray is at most 1/|sin(nu pi)| for nu near 1
    if first_omitted > 0.0 and 0.5 < nu < 1.5:
        first_omitted /= abs(math.sin(nu * math.pi))
    err = first_omitted + 4.0 * EPS * abs_sum + ml_exponential_rounding(nu, mu, x)
    return ex + s, err, max(k_used, 1)


def ml_exponential_rounding(nu, mu, x):
    """Rounding bound for ``ml_exponential_part``: exponent and phase are O(s) large."""
    if nu < 1.0:
        return 0.0
    s = x ** (1.0 / nu)
    if nu == 1.0:
        mag = x ** (1.0 - mu) * math.exp(-x)
    else:
        mag = (2.0 / nu) * s ** (1.0 - mu) * math.exp(s * math.cos(math.pi / nu))
    return 4.0 * EPS * mag * (1.0 + s)


def ml_series_many(nu, mu, z, tol, max_terms):
    z = np.ascontiguousarray(z, dtype=float)
    n = z.shape[0]
    val = np.empty(n)
    err = np.empty(n)
    terms = np.empty(n, dtype=np.int64)
    ok = np.empty(n, dtype=bool)
    for i in range(n):
        v, tr, ro, nt, c = ml_series(nu, mu, z[i], tol, max_terms)
        val[i] = v
        err[i] = tr + ro
        terms[i] = nt
        ok[i] = c
    return val, err, terms, ok


def ml_asymptotic_many(nu, mu, z, tol, max_terms):
    z = np.ascontiguousarray(z, dtype=float)
    n = z.shape[0]
    val = np.empty(n)
    err = np.empty(n)
    terms = np.empty(n, dtype=np.int64)
    for i in range(n):
        val[i], err[i], terms[i] = ml_asymptotic(nu, mu, z[i], tol, max_terms)
    return val, err, terms


def history_convolve(values, conv, first):
    """Causal product-integration sum along axis 0.

    out[0] = 0, out[n] = sum_{i=1}^{n} conv[n-i] * values[i] + first[n-1] * values[0]
    """
    f = np.ascontiguousarray(values, dtype=float)
    squeeze = f.ndim == 1
    if squeeze:
        f = f[:, None]
    n_t, n_c = f.shape
    out = np.zeros((n_t, n_c))
    for n in range(1, n_t):
        # reversed weights so that row i of f meets conv[n-i]
        out[n] = conv[n - 1::-1] @ f[1:n + 1] + first[n - 1] * f[0]
    return out[:, 0] if squeeze else out


def march(u0, conv, first, coef, n_steps, growth_bound):
    """Explicit memory march u^{n+1} = u^n + coef * D2[Q_n], walls pinned to 0.

    Q_n is the product-integration sum of the stored history. Returns the
    full history (n_steps+1, J+1) and the index of the first step that broke
    the growth bound (-1 when none did).
    """
    u0 = np.ascontiguousarray(u0, dtype=float)
    n_nodes = u0.shape[0]
    hist = np.zeros((n_steps + 1, n_nodes))
    hist[0] = u0
    hist[0, 0] = 0.0
    hist[0, -1] = 0.0
    norm0 = np.max(np.abs(hist[0]))
    limit = growth_bound * norm0
    for n in range(n_steps):
        if n == 0:
            q = np.zeros(n_nodes)
        else:
            q = conv[n - 1::-1] @ hist[1:n + 1] + first[n - 1] * hist[0]
        nxt = hist[n + 1]
        nxt[1:-1] = hist[n, 1:-1] + coef * (q[:-2] - 2.0 * q[1:-1] + q[2:])
        m = np.max(np.abs(nxt))
        if not math.isfinite(m) or m > limit and norm0 > 0.0:
            return hist, n + 1
    return hist, -1
