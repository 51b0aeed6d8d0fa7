"""Pure-Python numerical kernels.

Reference implementation of the hot loops in :mod:`gtcorr._kernels`. Both
modules expose the same functions with the same algorithms, so results agree
to rounding. This one is used when the compiled extension is unavailable or
when ``GTCORR_PURE_PYTHON=1`` is set.
"""

import math

SERIES_MAX_Z = 15.0
# pdf(x) < 1e-300 outside v -/+ TAIL_SIGMAS * sigma
TAIL_SIGMAS = 38.0
MAX_PANELS = 4096
MAX_BISECT = 200

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1]
_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


def _series_i0(z):
    h = 0.25 * z * z
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        term *= h / (k * k)
        total += term
        if term < 1e-17 * total:
            return total


def _series_i1(z):
    h = 0.25 * z * z
    term = 0.5 * z
    total = term
    k = 0
    while True:
        k += 1
        term *= h / (k * (k + 1))
        total += term
        if term <= 1e-17 * total:
            return total


def _asymptotic_scaled(z, nu):
    # I_nu(z) e^{-z} ~ (2 pi z)^{-1/2} sum_k (-1)^k prod_j (4nu^2 - (2j-1)^2) / (k! (8z)^k)
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    k = 0
    while k < 200:
        k += 1
        odd = 2.0 * k - 1.0
        nxt = -term * (mu - odd * odd) / (8.0 * k * z)
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return total * _INV_SQRT_2PI / math.sqrt(z)


def i0e(z):
    """Exponentially scaled I0: ``I0(z) * exp(-|z|)``."""
    z = abs(z)
    if z <= SERIES_MAX_Z:
        return _series_i0(z) * math.exp(-z)
    return _asymptotic_scaled(z, 0)


def i1e(z):
    """Exponentially scaled I1: ``I1(z) * exp(-|z|)`` (odd in z)."""
    a = abs(z)
    if a == 0.0:
        return 0.0
    if a <= SERIES_MAX_Z:
        r = _series_i1(a) * math.exp(-a)
    else:
        r = _asymptotic_scaled(a, 1)
    return r if z > 0 else -r


def rice_pdf(x, v, sigma):
    if x <= 0.0:
        return 0.0
    s2 = sigma * sigma
    d = (x - v) / sigma
    return x / s2 * math.exp(-0.5 * d * d) * i0e(x * v / s2)


def _gk15(a, b, v, sigma, moment):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fc = rice_pdf(c, v, sigma)
    if moment:
        fc *= c
    resk = fc * _WGK[7]
    resg = fc * _WG[3]
    for j in range(7):
        dx = h * _XGK[j]
        x1 = c - dx
        x2 = c + dx
        f1 = rice_pdf(x1, v, sigma)
        f2 = rice_pdf(x2, v, sigma)
        if moment:
            f1 *= x1
            f2 *= x2
        resk += _WGK[j] * (f1 + f2)
        if j & 1:
            resg += _WG[j >> 1] * (f1 + f2)
    return resk * h, abs((resk - resg) * h)


def _adaptive(a, b, v, sigma, moment, tol):
    total = 0.0
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        val, err = _gk15(lo, hi, v, sigma, moment)
        if err <= tol or depth >= 40 or hi - lo <= 1e-14 * (abs(lo) + abs(hi)):
            total += val
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))
    return total


def support(v, sigma):
    """Interval outside which the Rice density is below double precision."""
    return max(0.0, v - TAIL_SIGMAS * sigma), v + TAIL_SIGMAS * sigma


def rice_integral(a, b, v, sigma, moment=0):
    """Integrate ``x**moment * pdf(x)`` over ``[a, b]`` with ``a <= b``.

    The interval is clipped to the effective support and split into panels of
    width at most ``sigma`` before adaptive Gauss-Kronrod.
    """
    lo, hi = support(v, sigma)
    a = max(a, lo)
    b = min(b, hi)
    if b <= a:
        return 0.0
    n = min(MAX_PANELS, max(1, int(math.ceil((b - a) / sigma))))
    width = (b - a) / n
    total = 0.0
    for i in range(n):
        p0 = a + i * width
        p1 = b if i == n - 1 else p0 + width
        total += _adaptive(p0, p1, v, sigma, moment, 1e-15)
    return total


def rice_cdf(x, v, sigma):
    if x <= 0.0:
        return 0.0
    return min(1.0, rice_integral(0.0, x, v, sigma, 0))


def rice_mean_quad(v, sigma):
    lo, hi = support(v, sigma)
    return rice_integral(lo, hi, v, sigma, 1)


def rice_quantile(v, sigma, q):
    """Bisection on the CDF, integrating only the newly bracketed slice."""
    a = 0.0
    fa = 0.0
    b = v + 10.0 * sigma
    fb = rice_integral(a, b, v, sigma, 0)
    while fb < q:
        a, fa = b, fb
        b = 2.0 * b
        fb = fa + rice_integral(a, b, v, sigma, 0)
        if b > 1e300:
            break
    for _ in range(MAX_BISECT):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = fa + rice_integral(a, m, v, sigma, 0)
        if fm < q:
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def rice_quantiles_into(v, sigma, qs, out):
    """Quantiles for ascending probabilities ``qs``, written into ``out``.

    Each search starts from the previous lower bracket and runs Newton's
    method on the CDF, falling back to bisection whenever a step leaves the
    bracket.
    """
    a = 0.0
    fa = 0.0
    for idx in range(len(qs)):
        q = qs[idx]
        step = sigma
        b = a + step
        fb = fa + rice_integral(a, b, v, sigma, 0)
        while fb < q and b < 1e300:
            a, fa = b, fb
            step *= 2.0
            b = a + step
            fb = fa + rice_integral(a, b, v, sigma, 0)
        lo, flo, hi, fhi = a, fa, b, fb
        p, fp = (lo, flo) if q - flo < fhi - q else (hi, fhi)
        for _ in range(MAX_BISECT):
            dens = rice_pdf(p, v, sigma)
            x = p + (q - fp) / dens if dens > 0.0 else lo
            if not lo < x < hi:
                x = 0.5 * (lo + hi)
                if x <= lo or x >= hi:
                    break
            fx = flo + rice_integral(lo, x, v, sigma, 0)
            p, fp = x, fx
            if fx < q:
                lo, flo = x, fx
            else:
                hi, fhi = x, fx
            if abs(fx - q) <= 1e-14 or hi - lo <= 1e-15 * hi:
                break
        out[idx] = p
        a, fa = lo, flo
    return out
