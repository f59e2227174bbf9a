"""Closed forms for averages over Haar-random states.

The squared amplitudes of a Haar-random state in dimension N are uniform on
the probability simplex. ``s`` is the weight on an n-dimensional subspace.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


def _check_nN(n: int, N: int) -> None:
    if N < 2 or not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N and N >= 2, got n={n}, N={N}")


def _check_m(m: int) -> None:
    if m < 0 or int(m) != m:
        raise ValueError("m must be a non-negative integer")


def f_aux(n: int, x: float) -> float:
    """Volume of {z >= 0, sum z <= 1 - x} in n dimensions: (1 - x)^n / n!."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if x > 1:
        return 0.0
    return (1.0 - x) ** n / math.factorial(n)


def beta(a: float, b: float) -> float:
    """Complete Beta function; exact factorial ratio for positive integers."""
    if a <= 0 or b <= 0:
        raise ValueError("Beta needs positive arguments")
    if float(a).is_integer() and float(b).is_integer():
        a, b = int(a), int(b)
        return math.factorial(a - 1) * math.factorial(b - 1) / math.factorial(a + b - 1)
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def _reg_inc_beta_int(x: float, a: int, b: int) -> float:
    # I_x(a, b) = P(Binomial(a + b - 1, x) >= a) for integer a, b
    n = a + b - 1
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lx, l1x = math.log(x), math.log1p(-x)
    total = 0.0
    for j in range(a, n + 1):
        total += math.exp(math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * lx + (n - j) * l1x)
    return min(total, 1.0)


def _reg_inc_beta_cf(x: float, a: float, b: float) -> float:
    # continued fraction (modified Lentz), valid for x < (a + 1) / (a + b + 2)
    tiny = 1e-300
    front = math.exp(math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)) / a
    f, c, d = 1.0, 1.0, 0.0
    for i in range(0, 400):
        m = i // 2
        if i == 0:
            num = 1.0
        elif i % 2 == 0:
            num = m * (b - m) * x / ((a + 2 * m - 1) * (a + 2 * m))
        else:
            num = -((a + m) * (a + b + m) * x) / ((a + 2 * m) * (a + 2 * m + 1))
        d = 1.0 + num * d
        d = tiny if abs(d) < tiny else d
        d = 1.0 / d
        c = 1.0 + num / c
        c = tiny if abs(c) < tiny else c
        cd = c * d
        f *= cd
        if abs(1.0 - cd) < 1e-15:
            break
    return front * (f - 1.0)


def reg_beta_inc(x: float, a: float, b: float) -> float:
    """Regularized incomplete Beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("Beta needs positive arguments")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if float(a).is_integer() and float(b).is_integer() and a + b < 2000:
        return _reg_inc_beta_int(x, int(a), int(b))
    if x == 0.0 or x == 1.0:
        return x
    if x < (a + 1) / (a + b + 2):
        return _reg_inc_beta_cf(x, a, b)
    return 1.0 - _reg_inc_beta_cf(1.0 - x, b, a)


def beta_inc(lam: float, a: float, b: float) -> float:
    """Lower incomplete Beta: integral_0^lam x^(a-1) (1-x)^(b-1) dx."""
    return reg_beta_inc(lam, a, b) * beta(a, b)


def moment_z(m: int, N: int) -> float:
    """<z^m> for one squared amplitude: 1 / C(N + m - 1, m)."""
    _check_m(m)
    _check_nN(1, N)
    return 1.0 / math.comb(N + m - 1, m)


def moment_s(m: int, n: int, N: int) -> float:
    """<s^m> for the weight on n amplitudes: C(n + m - 1, m) / C(N + m - 1, m)."""
    _check_m(m)
    _check_nN(n, N)
    return math.comb(n + m - 1, m) / math.comb(N + m - 1, m)


def amplitudes_pdf(z: Sequence[float], N: int) -> float:
    """Joint density of the first n squared amplitudes, n < N."""
    z = np.asarray(z, dtype=float)
    n = z.size
    _check_nN(n, N)
    if n == N:
        raise ValueError("the joint density of all N amplitudes is singular")
    if np.any(z < 0):
        return 0.0
    s = float(z.sum())
    if s > 1:
        return 0.0
    return math.factorial(n) * math.comb(N - 1, n) * (1.0 - s) ** (N - n - 1)


def overlap_pdf(s: float, n: int, N: int) -> float:
    """Density of s: n C(N-1, n) (1 - s)^(N-n-1) s^(n-1) on [0, 1], n < N."""
    _check_nN(n, N)
    if n == N:
        raise ValueError("for n = N the overlap is 1 with certainty")
    if s < 0 or s > 1:
        return 0.0
    return n * math.comb(N - 1, n) * (1.0 - s) ** (N - n - 1) * s ** (n - 1)


def j_integral(m: int, lam: float, n: int, N: int) -> float:
    """<Theta(s - lam) s^m> = <s^m> - n C(N-1, n) B(lam; n + m, N - n)."""
    _check_m(m)
    _check_nN(n, N)
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    if n == N:
        return 1.0
    return moment_s(m, n, N) - n * math.comb(N - 1, n) * beta_inc(lam, n + m, N - n)


def threshold_integral(n: int, N: int) -> float:
    """<(s - 1/2) Theta(s - 1/2)> exactly."""
    return j_integral(1, 0.5, n, N) - 0.5 * j_integral(0, 0.5, n, N)


def threshold_lower(n: int, N: int) -> float:
    """Lower bound n/N - 1/2 on <(s - 1/2) Theta(s - 1/2)>."""
    _check_nN(n, N)
    return n / N - 0.5


def simplex_samples(N: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Squared amplitudes of Haar-random states: flat Dirichlet draws."""
    e = rng.exponential(size=(count, N))
    return e / e.sum(axis=1, keepdims=True)
