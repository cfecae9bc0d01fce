# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_fallback.py`` (same signatures, same results)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport (lgamma, log1p, tgamma, exp, log, pow, sin, cos, fabs, floor,
                        fmod, isfinite, INFINITY, NAN)

cnp.import_array()

cdef double EPS = 2.220446049250313e-16
cdef double PI = 3.141592653589793
cdef double LOG_PI = 1.1447298858494002
cdef double GAMMA_DIRECT_LIMIT = 170.0
cdef double TINY_ARG = 1e-8
cdef double EXP_LIMIT = 700.0


cdef inline double c_sinpi(double x) nogil:
    cdef double y = fmod(x, 2.0)
    if y < -1.0:
        y += 2.0
    elif y > 1.0:
        y -= 2.0
    if y > 0.5:
        y = 1.0 - y
    elif y < -0.5:
        y = -1.0 - y
    return sin(PI * y)


cdef inline bint c_nonpos_int(double x) nogil:
    return x <= 0.0 and x == floor(x)


cdef inline double c_log_abs_rgamma(double x, double* sign) nogil:
    cdef double sp
    if x > 0.0:
        sign[0] = 1.0
        return -lgamma(x)
    if c_nonpos_int(x):
        sign[0] = 0.0
        return -INFINITY
    sp = c_sinpi(x)
    sign[0] = 1.0 if sp > 0 else -1.0
    return log(fabs(sp)) + lgamma(1.0 - x) - LOG_PI


cdef inline double c_rgamma(double x) nogil:
    cdef double sg, lg
    if c_nonpos_int(x):
        return 0.0
    if fabs(x) < TINY_ARG:
        return x / tgamma(1.0 + x)
    if -GAMMA_DIRECT_LIMIT < x < GAMMA_DIRECT_LIMIT:
        return 1.0 / tgamma(x)
    lg = c_log_abs_rgamma(x, &sg)
    if lg > EXP_LIMIT:
        return sg * INFINITY
    return sg * exp(lg)


cdef inline double c_log_renv(double x) nogil:
    if x > 0.5:
        return -lgamma(x)
    return lgamma(1.0 - x) - LOG_PI


def sinpi(double x):
    return c_sinpi(x)


def rgamma(double x):
    return c_rgamma(x)


def log_abs_rgamma(double x):
    cdef double sg
    cdef double lg = c_log_abs_rgamma(x, &sg)
    return lg, sg


cdef double c_series_term(double nu, double mu, double z, double lz, long r,
                          bint wright, double* lenv, double* amp) nogil:
    cdef double x = nu * r + mu
    cdef double lfact = lgamma(r + 1.0) if wright else 0.0
    cdef double rlz = r * lz
    cdef double t, lg, sg, lm
    lenv[0] = rlz - lfact + c_log_renv(x)
    # x carries a rounding error of ~eps |x|, which moves 1/Gamma(x) by ~psi(x) eps |x|
    amp[0] = fabs(x) * (log1p(fabs(x)) + 1.0)
    if fabs(x) < GAMMA_DIRECT_LIMIT and fabs(rlz) < EXP_LIMIT and r < 170:
        t = pow(z, <double>r) * c_rgamma(x)
        if wright:
            t /= tgamma(r + 1.0)
        return t
    lg = c_log_abs_rgamma(x, &sg)
    if sg == 0.0:
        return 0.0
    lm = rlz - lfact + lg
    if z < 0 and r % 2 == 1:
        sg = -sg
    if lm > EXP_LIMIT:
        return sg * INFINITY
    amp[0] += fabs(rlz) + lfact + fabs(lg)
    return sg * exp(lm)


cdef void c_series(double nu, double mu, double z, double tol, long max_terms,
                   bint wright, double* out) nogil:
    # out = [value, tail, rounding, terms, converged]
    cdef double lz, ltol, s = 0.0, comp = 0.0, abs_sum = 0.0
    cdef double prev_lenv = INFINITY, t, lenv, amp, y, q, tail, v
    cdef long r
    cdef bint past_poles
    if z == 0.0:
        v = c_rgamma(mu)
        out[0] = v
        out[1] = 0.0
        out[2] = EPS * fabs(v)
        out[3] = 1
        out[4] = 1
        return
    lz = log(fabs(z))
    ltol = log(0.25 * tol)
    for r in range(max_terms):
        t = c_series_term(nu, mu, z, lz, r, wright, &lenv, &amp)
        if nu >= 0.0:
            past_poles = nu * r + mu > 0.0
        else:
            past_poles = 1.0 - mu - nu * r > 0.0
        if r >= 2 and past_poles and lenv <= ltol and lenv < prev_lenv:
            q = exp(lenv - prev_lenv)
            # Gamma(x)/Gamma(x+nu) never increases for x > 0, so any q < 1 bounds the tail
            if q > 0.5 and (wright or nu * (r - 1) + mu <= 0.5):
                q = 1.0
            if q < 1.0 and lenv - log(1.0 - q) <= ltol:
                tail = exp(lenv) / (1.0 - q)
            else:
                tail = INFINITY
        else:
            tail = INFINITY
        if tail < INFINITY:
            if z < 0.0 and not wright and fabs(t) < tail:
                tail = fabs(t)
            out[0] = s + comp
            out[1] = tail
            out[2] = 16.0 * EPS * abs_sum
            out[3] = r
            out[4] = 1
            return
        if not isfinite(t):
            out[0] = s + comp
            out[1] = INFINITY
            out[2] = INFINITY
            out[3] = r
            out[4] = 0
            return
        y = s + t
        if fabs(s) >= fabs(t):
            comp += (s - y) + t
        else:
            comp += (t - y) + s
        s = y
        abs_sum += fabs(t) * (1.0 + amp / 16.0)
        prev_lenv = lenv
    out[0] = s + comp
    out[1] = exp(prev_lenv)
    out[2] = 16.0 * EPS * abs_sum
    out[3] = max_terms
    out[4] = 0


def ml_series(double nu, double mu, double z, double tol, long max_terms):
    cdef double out[5]
    c_series(nu, mu, z, tol, max_terms, False, out)
    return out[0], out[1], out[2], <long>out[3], bool(out[4])


def wright_series(double nu, double mu, double z, double tol, long max_terms):
    cdef double out[5]
    c_series(nu, mu, z, tol, max_terms, True, out)
    return out[0], out[1], out[2], <long>out[3], bool(out[4])


cdef double c_ml_exponential_part(double nu, double mu, double x) nogil:
    cdef double s, th, mag
    if nu < 1.0:
        return 0.0
    if nu == 1.0:
        if mu != floor(mu):
            return NAN
        return pow(-x, 1.0 - mu) * exp(-x)
    if nu >= 3.0:
        return NAN
    s = pow(x, 1.0 / nu)
    th = PI / nu
    mag = pow(s, 1.0 - mu) * exp(s * cos(th))
    return (2.0 / nu) * mag * cos(th * (1.0 - mu) + s * sin(th))


def ml_exponential_part(double nu, double mu, double x):
    return c_ml_exponential_part(nu, mu, x)


cdef double c_ml_exponential_rounding(double nu, double mu, double x) nogil:
    cdef double s, mag
    if nu < 1.0:
        return 0.0
    s = pow(x, 1.0 / nu)
    if nu == 1.0:
        mag = pow(x, 1.0 - mu) * exp(-x)
    else:
        mag = (2.0 / nu) * pow(s, 1.0 - mu) * exp(s * cos(PI / nu))
    return 4.0 * EPS * mag * (1.0 + s)


def ml_exponential_rounding(double nu, double mu, double x):
    return c_ml_exponential_rounding(nu, mu, x)


cdef void c_ml_asymptotic(double nu, double mu, double z, double tol, long max_terms,
                          double* out) nogil:
    # out = [value, err, terms]
    cdef double x = -z, ex, lx, ltol, s = 0.0, abs_sum, prev_lenv = INFINITY
    cdef double first_omitted = 0.0, arg, lenv, lg, sg, a
    cdef long k, k_used = 0
    cdef bint exact
    ex = c_ml_exponential_part(nu, mu, x)
    if ex != ex:
        out[0] = NAN
        out[1] = INFINITY
        out[2] = 1
        return
    exact = (nu == 1.0 or nu == 2.0) and mu == floor(mu) and mu >= 1.0
    lx = log(x)
    ltol = log(0.125 * tol)
    abs_sum = fabs(ex)
    for k in range(1, max_terms + 1):
        arg = mu - nu * k
        if exact and arg <= 0.0:
            break
        lenv = -k * lx + c_log_renv(arg)
        if not exact and lenv > prev_lenv:
            first_omitted = exp(lenv)
            break
        lg = c_log_abs_rgamma(arg, &sg)
        if sg != 0.0:
            a = -(1.0 if k % 2 == 0 else -1.0) * sg * exp(lg - k * lx)
        else:
            a = 0.0
        s += a
        abs_sum += fabs(a)
        k_used = k
        prev_lenv = lenv
        if not exact and lenv <= ltol:
            first_omitted = exp(-(k + 1) * lx + c_log_renv(mu - nu * (k + 1)))
            break
    if first_omitted > 0.0 and 0.5 < nu < 1.5:
        first_omitted /= fabs(sin(nu * PI))
    out[0] = ex + s
    out[1] = first_omitted + 4.0 * EPS * abs_sum + c_ml_exponential_rounding(nu, mu, x)
    out[2] = k_used if k_used > 1 else 1


def ml_asymptotic(double nu, double mu, double z, double tol, long max_terms):
    cdef double out[3]
    c_ml_asymptotic(nu, mu, z, tol, max_terms, out)
    return out[0], out[1], <long>out[2]


def ml_series_many(double nu, double mu, z, double tol, long max_terms):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = zz.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] val = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] err = np.empty(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] terms = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.npy_bool, ndim=1, cast=True] ok = np.empty(n, dtype=bool)
    cdef double out[5]
    for i in range(n):
        c_series(nu, mu, zz[i], tol, max_terms, False, out)
        val[i] = out[0]
        err[i] = out[1] + out[2]
        terms[i] = <long>out[3]
        ok[i] = out[4] != 0
    return val, err, terms, ok


def ml_asymptotic_many(double nu, double mu, z, double tol, long max_terms):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = zz.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] val = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] err = np.empty(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] terms = np.empty(n, dtype=np.int64)
    cdef double out[3]
    for i in range(n):
        c_ml_asymptotic(nu, mu, zz[i], tol, max_terms, out)
        val[i] = out[0]
        err[i] = out[1]
        terms[i] = <long>out[2]
    return val, err, terms


cdef void c_history_sum(const double[:, ::1] f, const double[::1] conv,
                        const double[::1] first, Py_ssize_t n, double[::1] q) nogil:
    cdef Py_ssize_t i, j, nc = f.shape[1]
    cdef double w
    for j in range(nc):
        q[j] = 0.0
    if n == 0:
        return
    # same summation order as the fallback: i = 1..n, then the t=0 endpoint
    for i in range(1, n + 1):
        w = conv[n - i]
        for j in range(nc):
            q[j] += w * f[i, j]
    w = first[n - 1]
    for j in range(nc):
        q[j] += w * f[0, j]


def history_convolve(values, conv, first):
    f = np.ascontiguousarray(values, dtype=np.float64)
    squeeze = f.ndim == 1
    if squeeze:
        f = f[:, None]
    cdef const double[:, ::1] fv = f
    cdef const double[::1] cv = np.ascontiguousarray(conv, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(first, dtype=np.float64)
    cdef Py_ssize_t nt = fv.shape[0], nc = fv.shape[1], n
    out = np.zeros((nt, nc))
    cdef double[:, ::1] ov = out
    with nogil:
        for n in range(1, nt):
            c_history_sum(fv, cv, bv, n, ov[n])
    return out[:, 0] if squeeze else out


def march(u0, conv, first, double coef, long n_steps, double growth_bound):
    cdef const double[::1] cv = np.ascontiguousarray(conv, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(first, dtype=np.float64)
    u = np.ascontiguousarray(u0, dtype=np.float64)
    cdef Py_ssize_t nn = u.shape[0], n, j
    hist = np.zeros((n_steps + 1, nn))
    cdef double[:, ::1] h = hist
    q_arr = np.zeros(nn)
    cdef double[::1] q = q_arr
    cdef double norm0 = 0.0, m, limit, v
    cdef long failed = -1
    for j in range(1, nn - 1):
        h[0, j] = u[j]
        if fabs(u[j]) > norm0:
            norm0 = fabs(u[j])
    limit = growth_bound * norm0
    with nogil:
        for n in range(n_steps):
            c_history_sum(h, cv, bv, n, q)
            m = 0.0
            for j in range(1, nn - 1):
                v = h[n, j] + coef * (q[j - 1] - 2.0 * q[j] + q[j + 1])
                h[n + 1, j] = v
                if not (fabs(v) <= m):
                    m = fabs(v)
            if not isfinite(m) or (m > limit and norm0 > 0.0):
                failed = n + 1
                break
    return hist, failed
