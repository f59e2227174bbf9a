# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Sparse branch propagation kernel.

Each branch is a computational basis string that holds few ones, so gates
are looked up by the qubits that are set instead of scanning every gate.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int8_t, int32_t, int64_t, uint8_t, uint64_t

cnp.import_array()

cdef enum:
    KIND_SWAP = 0
    KIND_CNOT = 1
    KIND_TOFFOLI = 2


cdef inline void _toggle(uint8_t[::1] bits, int32_t[::1] ones, int32_t[::1] pos,
                         int64_t* count, uint64_t[::1] zob, uint64_t* h, int32_t q) nogil:
    cdef int32_t last
    if bits[q]:
        bits[q] = 0
        count[0] -= 1
        last = ones[count[0]]
        ones[pos[q]] = last
        pos[last] = pos[q]
    else:
        bits[q] = 1
        ones[count[0]] = q
        pos[q] = <int32_t>count[0]
        count[0] += 1
    h[0] += zob[q] if bits[q] else (<uint64_t>0 - zob[q])


def propagate(const int32_t[:, ::1] trig, const int32_t[:, ::1] gates, int64_t load_layer,
              int64_t n, int64_t N, uint64_t[::1] zob, const int64_t[::1] ev_ptr,
              const int32_t[::1] ev_q, const int8_t[::1] ev_p, int64_t capacity):
    """Propagate both bus branches of every address; see the numpy fallback for the contract."""
    cdef int64_t depth = trig.shape[0]
    cdef int64_t Q = trig.shape[1]
    cdef int64_t rows = 2 * N
    cdef int64_t off = N - 1
    addr_a = np.zeros(rows, dtype=np.int64)
    bus_a = np.zeros(rows, dtype=np.uint8)
    hash_a = np.zeros(rows, dtype=np.uint64)
    phase_a = np.zeros(rows, dtype=np.uint8)
    lr_a = np.zeros(capacity, dtype=np.int64)
    lc_a = np.zeros(capacity, dtype=np.int64)
    bits_a = np.zeros(Q, dtype=np.uint8)
    ones_a = np.zeros(Q, dtype=np.int32)
    pos_a = np.zeros(Q, dtype=np.int32)
    stamp_a = np.full(max(gates.shape[0], 1), -1, dtype=np.int64)
    fired_a = np.zeros(Q, dtype=np.int32)
    cdef int64_t[::1] addr = addr_a
    cdef uint8_t[::1] bus = bus_a
    cdef uint64_t[::1] hsh = hash_a
    cdef uint8_t[::1] phase = phase_a
    cdef int64_t[::1] lr = lr_a
    cdef int64_t[::1] lc = lc_a
    cdef uint8_t[::1] bits = bits_a
    cdef int32_t[::1] ones = ones_a
    cdef int32_t[::1] pos = pos_a
    cdef int64_t[::1] stamp = stamp_a
    cdef int32_t[::1] fired = fired_a
    cdef int64_t r, x, j, t, i, e, nf, count, nnz = 0, stamp_id = 0
    cdef int32_t q, g, a, b, c
    cdef int overflow = 0
    cdef uint64_t h
    cdef int64_t ph, value
    with nogil:
        for r in range(rows):
            x = r % N
            count = 0
            h = 0
            ph = 0
            for j in range(n):
                if (x >> j) & 1:
                    _toggle(bits, ones, pos, &count, zob, &h, <int32_t>j)
            if r >= N:
                _toggle(bits, ones, pos, &count, zob, &h, <int32_t>n)
            for t in range(depth):
                if t == load_layer:
                    for i in range(count):
                        q = ones[i]
                        if q >= off:
                            if nnz < capacity:
                                lr[nnz] = r
                                lc[nnz] = q - off
                                nnz += 1
                            else:
                                overflow = 1
                else:
                    stamp_id += 1
                    nf = 0
                    for i in range(count):
                        g = trig[t, ones[i]]
                        if g >= 0 and stamp[g] != stamp_id:
                            stamp[g] = stamp_id
                            fired[nf] = g
                            nf += 1
                    for i in range(nf):
                        g = fired[i]
                        a = gates[g, 1]
                        b = gates[g, 2]
                        c = gates[g, 3]
                        if gates[g, 0] == KIND_SWAP:
                            if bits[a] != bits[b]:
                                _toggle(bits, ones, pos, &count, zob, &h, a)
                                _toggle(bits, ones, pos, &count, zob, &h, b)
                        elif gates[g, 0] == KIND_CNOT:
                            _toggle(bits, ones, pos, &count, zob, &h, b)
                        else:
                            if bits[b]:
                                _toggle(bits, ones, pos, &count, zob, &h, c)
                for e in range(ev_ptr[t], ev_ptr[t + 1]):
                    q = ev_q[e]
                    if ev_p[e] == 1:
                        _toggle(bits, ones, pos, &count, zob, &h, q)
                    elif ev_p[e] == 2:
                        ph += 1 + 2 * bits[q]
                        _toggle(bits, ones, pos, &count, zob, &h, q)
                    else:
                        ph += 2 * bits[q]
            value = 0
            for j in range(n):
                if bits[j]:
                    value |= (<int64_t>1) << j
            addr[r] = value
            bus[r] = bits[n]
            hsh[r] = h
            phase[r] = <uint8_t>(ph % 4)
            for i in range(count):
                bits[ones[i]] = 0
    return addr_a, bus_a, hash_a, phase_a, lr_a[:nnz], lc_a[:nnz], bool(overflow)
