"""Classical one-hot and nested one-hot encodings of addresses.

Bit order is little-endian throughout: ``x[0]`` is the least significant bit
of ``mu(x)``. Bitstrings are tuples of 0/1 ints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

Bits = Tuple[int, ...]


def log2_exact(n: int) -> int:
    """Return log2(n), raising ValueError unless n is a power of two >= 1."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"{n} is not a power of two")
    return n.bit_length() - 1


def _as_bits(bits: Sequence[int]) -> Bits:
    out = tuple(int(b) for b in bits)
    for b in out:
        if b not in (0, 1):
            raise ValueError(f"not a bit: {b}")
    return out


def mu(bits: Sequence[int]) -> int:
    """Integer value of a little-endian bitstring."""
    value = 0
    for j, b in enumerate(bits):
        if b:
            value |= 1 << j
    return value


def mu_inv(index: int, length: int) -> Bits:
    """Inverse of :func:`mu` for strings of the given length."""
    if index < 0 or index >= (1 << length):
        raise ValueError(f"index {index} does not fit in {length} bits")
    return tuple((index >> j) & 1 for j in range(length))


@dataclass(frozen=True)
class Address:
    """A classical address ``x = (x_0, ..., x_{logN-1})`` for a memory of size N."""

    bits: Bits
    N: int

    def __post_init__(self) -> None:
        n = log2_exact(self.N)
        if self.N < 2:
            raise ValueError("N must be at least 2")
        object.__setattr__(self, "bits", _as_bits(self.bits))
        if len(self.bits) != n:
            raise ValueError(f"address needs {n} bits, got {len(self.bits)}")

    @classmethod
    def from_index(cls, index: int, N: int) -> "Address":
        return cls(mu_inv(index, log2_exact(N)), N)

    @property
    def index(self) -> int:
        return mu(self.bits)


@dataclass(frozen=True)
class Dataset:
    """Memory contents: ``bits[l]`` is the data bit stored at address ``l``."""

    bits: Bits

    def __post_init__(self) -> None:
        object.__setattr__(self, "bits", _as_bits(self.bits))
        log2_exact(len(self.bits))

    @property
    def N(self) -> int:
        return len(self.bits)

    def __getitem__(self, index: int) -> int:
        return self.bits[index]


@dataclass(frozen=True)
class NoheString:
    """Nested one-hot string; sector K has length 2**K."""

    sectors: Tuple[Bits, ...]

    @property
    def bits(self) -> Bits:
        return tuple(b for sector in self.sectors for b in sector)

    def __len__(self) -> int:
        return sum(len(s) for s in self.sectors)


def _addr_bits(x: Address | Sequence[int]) -> Bits:
    return x.bits if isinstance(x, Address) else _as_bits(x)


def ohe_sector(x: Address | Sequence[int], K: int) -> Bits:
    """Sector K of the nested encoding: a single 1 at mu(x_0..x_{K-1}) iff x_K = 1."""
    bits = _addr_bits(x)
    if not 0 <= K < len(bits):
        raise ValueError(f"sector {K} out of range for {len(bits)} address bits")
    out = [0] * (1 << K)
    if bits[K]:
        out[mu(bits[:K])] = 1
    return tuple(out)


def nohe(x: Address | Sequence[int]) -> NoheString:
    """Nested one-hot encoding: sectors 0..logN-1, N-1 bits in total."""
    bits = _addr_bits(x)
    return NoheString(tuple(ohe_sector(bits, K) for K in range(len(bits))))


def nohe_with_bus(x: Address | Sequence[int], bus: int) -> Tuple[NoheString, int, int]:
    """NOHE of x plus the pointer of the one-hot block.

    The one-hot block of N qubits sits after the N-1 nested bits and holds a
    single pointer qubit in state |+> (bus=0) or |-> (bus=1) at position mu(x).
    Returns ``(nohe(x), pointer_position, pointer_sign)``.
    """
    if bus not in (0, 1):
        raise ValueError("bus must be 0 or 1")
    bits = _addr_bits(x)
    return nohe(bits), mu(bits), -1 if bus else 1


def pointer_permutation(b: Sequence[int]) -> Tuple[int, ...]:
    """Permutation ``l -> mu(mu_inv(l) XOR b)`` as a tuple indexed by l."""
    b = _as_bits(b)
    shift = mu(b)
    return tuple(l ^ shift for l in range(1 << len(b)))


def load_bits(D: Dataset | Sequence[int], b: Sequence[int]) -> Bits:
    """Control bits of the adaptive loading: ``B_l = D[mu(mu_inv(l) XOR b)]``."""
    data = D.bits if isinstance(D, Dataset) else _as_bits(D)
    b = _as_bits(b)
    if len(data) != 1 << len(b):
        raise ValueError(f"dataset of size {len(data)} does not match {len(b)} address bits")
    shift = mu(b)
    return tuple(data[l ^ shift] for l in range(len(data)))
