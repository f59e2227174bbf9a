from __future__ import annotations

import itertools

import pytest

from qramkit.encoding import (
    Address,
    Dataset,
    load_bits,
    log2_exact,
    mu,
    mu_inv,
    nohe,
    nohe_with_bus,
    ohe_sector,
    pointer_permutation,
)


def test_mu_examples():
    assert mu(()) == 0
    assert mu((0, 1, 0)) == 2
    assert mu((1, 1, 0, 1)) == 11


def test_mu_inverse_roundtrip_and_range():
    for length in range(6):
        for l in range(1 << length):
            assert mu(mu_inv(l, length)) == l
    with pytest.raises(ValueError):
        mu_inv(8, 3)


def test_ohe_sector_examples():
    assert ohe_sector((0, 1, 1, 1), 3) == (0, 0, 0, 0, 0, 0, 1, 0)
    assert ohe_sector((1, 0), 0) == (1,)
    assert ohe_sector((0, 1), 0) == (0,)
    assert ohe_sector((1, 1), 1) == (0, 1)
    with pytest.raises(ValueError):
        ohe_sector((1, 1), 2)


def test_nohe_examples():
    assert nohe((0,)).bits == (0,)
    assert nohe((1, 1)).bits == (1, 0, 1)
    assert nohe((1, 1, 1)).bits == (1, 0, 1, 0, 0, 0, 1)


@pytest.mark.parametrize("n", range(1, 9))
def test_nohe_weights_and_injectivity(n):
    seen = set()
    for idx in range(1 << n):
        x = mu_inv(idx, n)
        s = nohe(x)
        assert len(s) == (1 << n) - 1
        assert sum(s.bits) == sum(x)
        for K, sector in enumerate(s.sectors):
            assert sum(sector) == x[K]
        seen.add(s.bits)
    assert len(seen) == 1 << n


def test_nohe_injective_large():
    n = 12
    seen = {nohe(mu_inv(i, n)).bits for i in range(1 << n)}
    assert len(seen) == 1 << n


def test_nohe_with_bus():
    s, pos, sign = nohe_with_bus((0, 1, 0), 0)
    assert pos == 2 and sign == 1
    assert s == nohe((0, 1, 0))
    assert nohe_with_bus((0, 1, 0), 1)[1:] == (2, -1)
    assert nohe_with_bus((0, 0), 0)[1] == 0


def test_pointer_permutation_examples():
    assert pointer_permutation((0, 0, 0)) == tuple(range(8))
    assert pointer_permutation((0, 0, 1))[mu((0, 1, 1))] == 2
    assert pointer_permutation((1, 0)) == (1, 0, 3, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_pointer_permutation_group(n):
    bs = list(itertools.product((0, 1), repeat=n))
    for b in bs:
        p = pointer_permutation(b)
        assert tuple(p[p[l]] for l in range(1 << n)) == tuple(range(1 << n))
        for c in bs:
            q = pointer_permutation(c)
            bc = tuple(u ^ v for u, v in zip(b, c))
            assert tuple(p[q[l]] for l in range(1 << n)) == pointer_permutation(bc)
        for x in range(1 << n):
            xb = tuple(u ^ v for u, v in zip(mu_inv(x, n), b))
            assert p[x] == mu(xb)


def test_load_bits_examples():
    D = (1, 0, 1, 1)
    assert load_bits(D, (0, 0)) == D
    assert load_bits((5 and 1, 0, 0, 1), (1, 0)) == (0, 1, 1, 0)
    assert load_bits(load_bits(D, (1, 1)), (1, 1)) == D
    with pytest.raises(ValueError):
        load_bits(D, (1,))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_load_bits_permutation_relation(n):
    N = 1 << n
    D = tuple((7 * l + 3) % 2 for l in range(N))
    for b in itertools.product((0, 1), repeat=n):
        B = load_bits(D, b)
        p = pointer_permutation(b)
        assert all(B[p[l]] == D[l] for l in range(N))


def test_types_validate():
    assert Address((1, 0), 4).index == 1
    assert Address.from_index(3, 8).bits == (1, 1, 0)
    with pytest.raises(ValueError):
        Address((1,), 4)
    with pytest.raises(ValueError):
        Address((1, 2), 4)
    assert Dataset((0, 1, 1, 0)).N == 4
    with pytest.raises(ValueError):
        Dataset((0, 1, 1))
    with pytest.raises(ValueError):
        log2_exact(6)
