#!/usr/bin/env python3
"""Generate the reference conformal-map fixtures used by the convergence runs.

Two domains are covered:

* square [-1,1]^2 -> unit disk. The inverse map is the Schwarz-Christoffel
  integral f(w) = C * int_0^w (1 + t^4)^(-1/2) dt. The Taylor coefficients of
  the forward map F = f^{-1} are obtained by exact Lagrange inversion in
  rational arithmetic. Validation samples are computed independently by
  adaptive quadrature of f plus Newton iteration (no series involved).

* ellipse x^2/a^2 + y^2/b^2 < 1 -> unit disk, via the classical
  Jacobi-sn closed form. Taylor coefficients come from mpmath.taylor at
  high precision; validation samples from direct evaluation of the closed form.

Run: python3 gen_oracles.py   (writes square_oracle.json, ellipse_oracle.json)
"""

import json
from fractions import Fraction

import mpmath as mp

mp.mp.dps = 40


def series_log(q, n):
    # log of a power series with q[0] == 1, truncated to n terms
    d = [Fraction(0)] * n
    # q' / q integrated
    qp = [(k + 1) * q[k + 1] for k in range(n - 1)] + [Fraction(0)]
    # r = q' / q
    r = [Fraction(0)] * n
    for k in range(n):
        s = qp[k]
        for j in range(1, k + 1):
            s -= q[j] * r[k - j]
        r[k] = s
    for k in range(1, n):
        d[k] = r[k - 1] / k
    return d


def series_exp(a, n):
    # exp of a power series with a[0] == 0
    e = [Fraction(0)] * n
    e[0] = Fraction(1)
    for k in range(1, n):
        s = Fraction(0)
        for j in range(1, k + 1):
            s += j * a[j] * e[k - j]
        e[k] = s / k
    return e


def square_coefficients(terms):
    # Q(x) = sum_k binom(-1/2, k) x^k / (4k+1), so that f(w)/C = w Q(w^4)
    q = []
    c = Fraction(1)
    for k in range(terms):
        q.append(c / (4 * k + 1))
        c = c * Fraction(-(2 * k + 1), 2 * (k + 1))
    log_q = series_log(q, terms)
    beta = []
    for k in range(terms):
        p = -(4 * k + 1)
        e = series_exp([p * x for x in log_q], k + 1)
        beta.append(e[k] / (4 * k + 1))
    quarter = mp.quad(lambda s: 1 / mp.sqrt(1 - s**4), [0, 1])
    scale = mp.sqrt(2) / quarter
    coeffs = [mp.mpf(b.numerator) / b.denominator / scale ** (4 * k + 1) for k, b in enumerate(beta)]
    return coeffs, scale


def square_inverse(w, scale):
    return scale * mp.quad(lambda t: w / mp.sqrt(1 + (t * w) ** 4), [0, 1])


def square_forward_newton(z, scale):
    # solve f(w) = z by Newton with the exact derivative f'(w) = C (1+w^4)^(-1/2)
    w = mp.mpc(z) / scale
    for _ in range(100):
        r = square_inverse(w, scale) - z
        step = r * mp.sqrt(1 + w**4) / scale
        w -= step
        if abs(step) < mp.mpf(10) ** -30:
            break
    return w


def ellipse_map(a, b):
    c = mp.sqrt(a * a - b * b)
    xi0 = mp.atanh(b / a)
    # nome q = exp(-pi K'/K) with K'/K = 4 xi0 / pi ... solved below by matching
    # the modulus so that the boundary lands on the unit circle.
    q = mp.exp(-4 * xi0)
    m = (mp.jtheta(2, 0, q) / mp.jtheta(3, 0, q)) ** 4
    k = mp.sqrt(m)
    big_k = mp.ellipk(m)

    def f(z):
        return mp.sqrt(k) * mp.ellipfun("sn", 2 * big_k / mp.pi * mp.asin(z / c), m=m)

    return f


def write(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def main():
    terms = 48
    coeffs, scale = square_coefficients(terms)
    interior = []
    for i in range(-6, 7):
        for j in range(-6, 7):
            z = mp.mpc(i / 8, j / 8)
            w = square_forward_newton(z, scale)
            interior.append([float(z.real), float(z.imag), float(w.real), float(w.imag)])
    boundary = []
    for t in range(-7, 8):
        for z in (mp.mpc(1, t / 8), mp.mpc(-1, t / 8), mp.mpc(t / 8, 1), mp.mpc(t / 8, -1)):
            w = square_forward_newton(z, scale)
            boundary.append([float(z.real), float(z.imag), float(w.real), float(w.imag)])
    worst_b = max(abs(abs(mp.mpc(s[2], s[3])) - 1) for s in boundary)
    # check the series against the independent samples
    worst_s = 0
    for s in interior:
        z = mp.mpc(s[0], s[1])
        v = sum(cf * z ** (4 * k + 1) for k, cf in enumerate(coeffs))
        worst_s = max(worst_s, abs(v - mp.mpc(s[2], s[3])))
    print("square: boundary |w|-1 max", mp.nstr(worst_b, 3), "series vs samples", mp.nstr(worst_s, 3))
    write(
        "square_oracle.json",
        {
            "domain": "square",
            "series": {"stride": 4, "offset": 1, "coefficients": [float(x) for x in coeffs]},
            "valid_radius": 0.9 * 2**0.5,
            "interior_samples": interior,
            "boundary_samples": boundary,
        },
    )

    a, b = 1.0, 0.6
    f = ellipse_map(mp.mpf(a), mp.mpf(b))
    eterms = 40
    taylor = mp.taylor(f, 0, 2 * eterms + 1)
    ecoeffs = [taylor[2 * k + 1] for k in range(eterms + 1)]
    interior = []
    for i in range(-6, 7):
        for j in range(-6, 7):
            z = mp.mpc(a * i / 8, b * j / 8)
            if (z.real / a) ** 2 + (z.imag / b) ** 2 >= 0.8:
                continue
            w = f(z)
            interior.append([float(z.real), float(z.imag), float(w.real), float(w.imag)])
    boundary = []
    for t in range(64):
        th = 2 * mp.pi * t / 64
        z = mp.mpc(a * mp.cos(th), b * mp.sin(th))
        w = f(z)
        boundary.append([float(z.real), float(z.imag), float(w.real), float(w.imag)])
    worst_b = max(abs(abs(mp.mpc(s[2], s[3])) - 1) for s in boundary)
    worst_s = 0
    for s in interior:
        z = mp.mpc(s[0], s[1])
        v = sum(cf * z ** (2 * k + 1) for k, cf in enumerate(ecoeffs))
        worst_s = max(worst_s, abs(v - mp.mpc(s[2], s[3])))
    print("ellipse: boundary |w|-1 max", mp.nstr(worst_b, 3), "series vs samples", mp.nstr(worst_s, 3))
    write(
        "ellipse_oracle.json",
        {
            "domain": "ellipse",
            "semi_axes": [a, b],
            "series": {"stride": 2, "offset": 1, "coefficients": [float(mp.re(x)) for x in ecoeffs]},
            "valid_radius": 0.8,
            "interior_samples": interior,
            "boundary_samples": boundary,
        },
    )


if __name__ == "__main__":
    main()
