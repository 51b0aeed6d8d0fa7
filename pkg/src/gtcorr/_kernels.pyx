# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels (Bessel functions, Rice quadrature, quantiles).

Line-for-line port of :mod:`gtcorr._pykernels`; keep the two in sync.
"""

from libc.math cimport exp, sqrt, fabs, ceil, M_PI

cdef double SERIES_MAX_Z = 15.0
cdef double TAIL_SIGMAS = 38.0
cdef int MAX_PANELS = 4096
cdef int MAX_BISECT = 200
cdef int MAX_DEPTH = 40

cdef double[8] XGK = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
]
cdef double[8] WGK = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
]
cdef double[4] WG = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
]


cdef inline double _series_i0(double z) noexcept nogil:
    cdef double h = 0.25 * z * z
    cdef double term = 1.0
    cdef double total = 1.0
    cdef int k = 0
    while True:
        k += 1
        term *= h / (<double>k * k)
        total += term
        if term < 1e-17 * total:
            return total


cdef inline double _series_i1(double z) noexcept nogil:
    cdef double h = 0.25 * z * z
    cdef double term = 0.5 * z
    cdef double total = term
    cdef int k = 0
    while True:
        k += 1
        term *= h / (<double>k * (k + 1))
        total += term
        if term <= 1e-17 * total:
            return total


cdef double _asymptotic_scaled(double z, double nu) noexcept nogil:
    cdef double mu = 4.0 * nu * nu
    cdef double term = 1.0
    cdef double total = 1.0
    cdef double odd, nxt
    cdef int k = 0
    while k < 200:
        k += 1
        odd = 2.0 * k - 1.0
        nxt = -term * (mu - odd * odd) / (8.0 * k * z)
        if fabs(nxt) >= fabs(term):
            break
        term = nxt
        total += term
        if fabs(term) < 1e-17 * fabs(total):
            break
    return total / sqrt(2.0 * M_PI * z)


cdef inline double _i0e(double z) noexcept nogil:
    z = fabs(z)
    if z <= SERIES_MAX_Z:
        return _series_i0(z) * exp(-z)
    return _asymptotic_scaled(z, 0.0)


cdef inline double _i1e(double z) noexcept nogil:
    cdef double a = fabs(z)
    cdef double r
    if a == 0.0:
        return 0.0
    if a <= SERIES_MAX_Z:
        r = _series_i1(a) * exp(-a)
    else:
        r = _asymptotic_scaled(a, 1.0)
    return r if z > 0 else -r


cdef inline double _pdf(double x, double v, double sigma) noexcept nogil:
    cdef double s2, d
    if x <= 0.0:
        return 0.0
    s2 = sigma * sigma
    d = (x - v) / sigma
    return x / s2 * exp(-0.5 * d * d) * _i0e(x * v / s2)


cdef inline double _f(double x, double v, double sigma, int moment) noexcept nogil:
    if moment:
        return x * _pdf(x, v, sigma)
    return _pdf(x, v, sigma)


cdef void _gk15(double a, double b, double v, double sigma, int moment,
                double* val, double* err) noexcept nogil:
    cdef double c = 0.5 * (a + b)
    cdef double h = 0.5 * (b - a)
    cdef double fc = _f(c, v, sigma, moment)
    cdef double resk = fc * WGK[7]
    cdef double resg = fc * WG[3]
    cdef double dx, f1, f2
    cdef int j
    for j in range(7):
        dx = h * XGK[j]
        f1 = _f(c - dx, v, sigma, moment)
        f2 = _f(c + dx, v, sigma, moment)
        resk += WGK[j] * (f1 + f2)
        if j & 1:
            resg += WG[j >> 1] * (f1 + f2)
    val[0] = resk * h
    err[0] = fabs((resk - resg) * h)


cdef double _adaptive(double a, double b, double v, double sigma, int moment,
                      double tol) noexcept nogil:
    cdef double[128] st_lo
    cdef double[128] st_hi
    cdef int[128] st_depth
    cdef int top = 0
    cdef double total = 0.0
    cdef double lo, hi, mid, val, err
    cdef int depth
    st_lo[0] = a
    st_hi[0] = b
    st_depth[0] = 0
    top = 1
    while top > 0:
        top -= 1
        lo = st_lo[top]
        hi = st_hi[top]
        depth = st_depth[top]
        _gk15(lo, hi, v, sigma, moment, &val, &err)
        if err <= tol or depth >= MAX_DEPTH or hi - lo <= 1e-14 * (fabs(lo) + fabs(hi)):
            total += val
        else:
            mid = 0.5 * (lo + hi)
            st_lo[top] = mid
            st_hi[top] = hi
            st_depth[top] = depth + 1
            st_lo[top + 1] = lo
            st_hi[top + 1] = mid
            st_depth[top + 1] = depth + 1
            top += 2
    return total


cdef double _integral(double a, double b, double v, double sigma, int moment) noexcept nogil:
    cdef double lo = v - TAIL_SIGMAS * sigma
    cdef double hi = v + TAIL_SIGMAS * sigma
    cdef double width, p0, p1, total
    cdef int n, i
    if lo < 0.0:
        lo = 0.0
    if a < lo:
        a = lo
    if b > hi:
        b = hi
    if b <= a:
        return 0.0
    n = <int>ceil((b - a) / sigma)
    if n < 1:
        n = 1
    if n > MAX_PANELS:
        n = MAX_PANELS
    width = (b - a) / n
    total = 0.0
    for i in range(n):
        p0 = a + i * width
        p1 = b if i == n - 1 else p0 + width
        total += _adaptive(p0, p1, v, sigma, moment, 1e-15)
    return total


cdef double _quantile(double v, double sigma, double q) noexcept nogil:
    cdef double a = 0.0
    cdef double fa = 0.0
    cdef double b = v + 10.0 * sigma
    cdef double fb = _integral(a, b, v, sigma, 0)
    cdef double m, fm
    cdef int it
    while fb < q:
        a = b
        fa = fb
        b = 2.0 * b
        fb = fa + _integral(a, b, v, sigma, 0)
        if b > 1e300:
            break
    for it in range(MAX_BISECT):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = fa + _integral(a, m, v, sigma, 0)
        if fm < q:
            a = m
            fa = fm
        else:
            b = m
    return 0.5 * (a + b)


def i0e(double z):
    """Exponentially scaled I0: ``I0(z) * exp(-|z|)``."""
    return _i0e(z)


def i1e(double z):
    """Exponentially scaled I1: ``I1(z) * exp(-|z|)`` (odd in z)."""
    return _i1e(z)


def rice_pdf(double x, double v, double sigma):
    return _pdf(x, v, sigma)


def support(double v, double sigma):
    """Interval outside which the Rice density is below double precision."""
    return max(0.0, v - TAIL_SIGMAS * sigma), v + TAIL_SIGMAS * sigma


def rice_integral(double a, double b, double v, double sigma, int moment=0):
    """Integrate ``x**moment * pdf(x)`` over ``[a, b]`` with ``a <= b``."""
    return _integral(a, b, v, sigma, moment)


def rice_cdf(double x, double v, double sigma):
    if x <= 0.0:
        return 0.0
    return min(1.0, _integral(0.0, x, v, sigma, 0))


def rice_mean_quad(double v, double sigma):
    lo = max(0.0, v - TAIL_SIGMAS * sigma)
    return _integral(lo, v + TAIL_SIGMAS * sigma, v, sigma, 1)


def rice_quantile(double v, double sigma, double q):
    """Bisection on the CDF, integrating only the newly bracketed slice."""
    cdef double r
    with nogil:
        r = _quantile(v, sigma, q)
    return r


def rice_quantiles_into(double v, double sigma, double[::1] qs, double[::1] out):
    """Quantiles for ascending probabilities ``qs``, written into ``out``.

    Same search as the pure-Python kernel: Newton on the CDF with a bisection
    fallback, each search starting from the previous lower bracket.
    """
    cdef Py_ssize_t n = qs.shape[0]
    cdef Py_ssize_t idx
    cdef double a = 0.0
    cdef double fa = 0.0
    cdef double q, step, b, fb, lo, flo, hi, fhi, p, fp, dens, x, fx
    cdef int it
    with nogil:
        for idx in range(n):
            q = qs[idx]
            step = sigma
            b = a + step
            fb = fa + _integral(a, b, v, sigma, 0)
            while fb < q and b < 1e300:
                a = b
                fa = fb
                step *= 2.0
                b = a + step
                fb = fa + _integral(a, b, v, sigma, 0)
            lo = a
            flo = fa
            hi = b
            fhi = fb
            if q - flo < fhi - q:
                p = lo
                fp = flo
            else:
                p = hi
                fp = fhi
            for it in range(MAX_BISECT):
                dens = _pdf(p, v, sigma)
                x = p + (q - fp) / dens if dens > 0.0 else lo
                if not (lo < x < hi):
                    x = 0.5 * (lo + hi)
                    if x <= lo or x >= hi:
                        break
                fx = flo + _integral(lo, x, v, sigma, 0)
                p = x
                fp = fx
                if fx < q:
                    lo = x
                    flo = fx
                else:
                    hi = x
                    fhi = fx
                if fabs(fx - q) <= 1e-14 or hi - lo <= 1e-15 * hi:
                    break
            out[idx] = p
            a = lo
            fa = flo
    return out
