from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, special

from qramkit.noiselab.haar import (
    amplitudes_pdf,
    beta,
    beta_inc,
    f_aux,
    j_integral,
    moment_s,
    moment_z,
    overlap_pdf,
    reg_beta_inc,
    simplex_samples,
    threshold_integral,
    threshold_lower,
)

PAIRS = [(1, 4), (3, 8), (8, 32), (2, 3), (5, 6)]


def test_moment_examples():
    assert moment_z(1, 4) == pytest.approx(0.25)
    assert moment_z(2, 4) == pytest.approx(0.1)
    assert moment_s(1, 3, 8) == pytest.approx(3 / 8)
    assert moment_s(2, 1, 4) == moment_z(2, 4)
    assert moment_s(5, 4, 4) == 1.0


def test_argument_checks():
    with pytest.raises(ValueError):
        moment_s(1, 0, 4)
    with pytest.raises(ValueError):
        moment_z(-1, 4)
    with pytest.raises(ValueError):
        j_integral(1, 1.5, 1, 4)
    with pytest.raises(ValueError):
        beta(0, 1)


@pytest.mark.parametrize("n,N", PAIRS)
def test_overlap_pdf_normalized_and_moments(n, N):
    total, _ = integrate.quad(lambda s: overlap_pdf(s, n, N), 0, 1)
    assert total == pytest.approx(1.0, abs=1e-10)
    for m in (1, 2, 3):
        val, _ = integrate.quad(lambda s: s**m * overlap_pdf(s, n, N), 0, 1)
        assert val == pytest.approx(moment_s(m, n, N), rel=1e-9)


@pytest.mark.parametrize("n,N", PAIRS)
@pytest.mark.parametrize("lam", [0.0, 0.2, 0.5, 0.9])
def test_j_integral_against_quadrature(n, N, lam):
    for m in (0, 1, 2):
        val, _ = integrate.quad(lambda s: s**m * overlap_pdf(s, n, N), lam, 1, epsabs=1e-13)
        assert j_integral(m, lam, n, N) == pytest.approx(val, abs=1e-10)


@pytest.mark.parametrize("a,b", [(1, 1), (2, 5), (8, 24), (3.5, 2.25), (0.7, 9.1), (300, 400)])
@pytest.mark.parametrize("x", [0.0, 0.1, 0.5, 0.77, 1.0])
def test_incomplete_beta_against_scipy(a, b, x):
    assert reg_beta_inc(x, a, b) == pytest.approx(special.betainc(a, b, x), abs=1e-12)
    assert beta(a, b) == pytest.approx(special.beta(a, b), rel=1e-12)
    assert beta_inc(x, a, b) == pytest.approx(special.betainc(a, b, x) * special.beta(a, b), rel=1e-10, abs=1e-300)


def test_f_aux():
    assert f_aux(3, 0.5) == pytest.approx(0.125 / 6)
    assert f_aux(2, 1.5) == 0.0


def test_amplitudes_pdf_marginal():
    # n = 1 reduces to the overlap density
    for s in (0.1, 0.4):
        assert amplitudes_pdf([s], 8) == pytest.approx(overlap_pdf(s, 1, 8))
    assert amplitudes_pdf([0.6, 0.6], 4) == 0.0


@pytest.mark.parametrize("n,N", PAIRS)
def test_threshold_bounds(n, N):
    t = threshold_integral(n, N)
    assert t >= threshold_lower(n, N) - 1e-15
    assert t >= 0.0
    val, _ = integrate.quad(lambda s: (s - 0.5) * overlap_pdf(s, n, N), 0.5, 1)
    assert t == pytest.approx(val, abs=1e-12)


def test_simplex_samples_match_moments():
    rng = np.random.default_rng(4)
    z = simplex_samples(8, 200_000, rng)
    assert np.allclose(z.sum(axis=1), 1.0)
    s = z[:, :3].sum(axis=1)
    for m in (1, 2):
        se = (s**m).std() / math.sqrt(len(s))
        assert abs((s**m).mean() - moment_s(m, 3, 8)) < 5 * se
