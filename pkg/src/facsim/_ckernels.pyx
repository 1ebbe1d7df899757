# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: packed gate evaluation and the fixed-point butterfly stage."""

from libc.stdint cimport uint64_t, int64_t, int32_t, int8_t, uint8_t

cdef uint64_t ONES = ~(<uint64_t>0)
cdef int64_t M32 = 0xFFFFFFFF
cdef int64_t TWO31 = 1 << 31
cdef int64_t TWO32 = 1 << 32

MODE_NONE, MODE_SA0, MODE_SA1, MODE_FLIP = 0, 1, 2, 3
ADD_EXACT, ADD_OR_BITS, ADD_CONSTANT_ONE = 0, 1, 2


cdef inline void _apply(uint64_t[:, ::1] vals, Py_ssize_t net, int mode) noexcept nogil:
    cdef Py_ssize_t w
    cdef Py_ssize_t W = vals.shape[1]
    if mode == 1:
        for w in range(W):
            vals[net, w] = 0
    elif mode == 2:
        for w in range(W):
            vals[net, w] = ONES
    elif mode == 3:
        for w in range(W):
            vals[net, w] = ~vals[net, w]


def apply_mode(uint64_t[:, ::1] vals, Py_ssize_t net, int mode):
    _apply(vals, net, mode)


def run_gates(const int8_t[::1] ops, const int32_t[::1] in0, const int32_t[::1] in1,
              const int32_t[::1] outs, const int32_t[::1] seq,
              uint64_t[:, ::1] vals, const uint8_t[::1] net_mode):
    cdef Py_ssize_t k, w, p, o, a, b
    cdef Py_ssize_t W = vals.shape[1]
    cdef int op
    with nogil:
        for k in range(seq.shape[0]):
            p = seq[k]
            op = ops[p]
            o = outs[p]
            a = in0[p]
            b = in1[p]
            if op == 0:
                for w in range(W):
                    vals[o, w] = vals[a, w] & vals[b, w]
            elif op == 1:
                for w in range(W):
                    vals[o, w] = vals[a, w] | vals[b, w]
            elif op == 2:
                for w in range(W):
                    vals[o, w] = vals[a, w] ^ vals[b, w]
            elif op == 3:
                for w in range(W):
                    vals[o, w] = ~vals[a, w]
            elif op == 4:
                for w in range(W):
                    vals[o, w] = ~(vals[a, w] & vals[b, w])
            elif op == 5:
                for w in range(W):
                    vals[o, w] = ~(vals[a, w] | vals[b, w])
            elif op == 6:
                for w in range(W):
                    vals[o, w] = 0
            elif op == 7:
                for w in range(W):
                    vals[o, w] = ONES
            else:
                for w in range(W):
                    vals[o, w] = vals[a, w]
            if net_mode[o]:
                _apply(vals, o, net_mode[o])


cdef inline int64_t _wrap(int64_t x, int64_t* ovf) noexcept nogil:
    cdef int64_t r = ((x + TWO31) & M32) - TWO31
    if r != x:
        ovf[0] += 1
    return r


cdef inline int64_t _add32(int64_t x, int64_t y, int mode, int L, int64_t* ovf) noexcept nogil:
    cdef uint64_t ux = <uint64_t>(x & M32)
    cdef uint64_t uy = <uint64_t>(y & M32)
    cdef uint64_t s, upper, low
    cdef int k
    if mode == 0:
        s = ux + uy
    else:
        upper = (ux >> L) + (uy >> L) + ((ux >> (L - 1)) & (uy >> (L - 1)) & 1)
        k = L - 4 if mode == 1 else L
        low = ((<uint64_t>1) << k) - 1
        if mode == 1:
            low |= ((ux | uy) >> k & 0xF) << k
        s = (upper << L) | low
    cdef int64_t r = <int64_t>(s & M32)
    if r >= TWO31:
        r -= TWO32
    if ((x < 0) == (y < 0)) and ((r < 0) != (x < 0)):
        ovf[0] += 1
    return r


cdef inline int64_t _qmul(int64_t w, int64_t x, int64_t* ovf) noexcept nogil:
    return _wrap((w * x + 16384) >> 15, ovf)


def fft_stage(int64_t[:, ::1] re, int64_t[:, ::1] im, const int64_t[::1] wr, const int64_t[::1] wi,
              int mode, int L, bint shift):
    cdef Py_ssize_t rows = re.shape[0], n = re.shape[1], h = wr.shape[0]
    cdef Py_ssize_t m = 2 * h
    cdef Py_ssize_t r, s, j, i0, i1
    cdef int64_t ovf = 0
    cdef int64_t ar, ai, br, bi, p1, p2, p3, p4, tr, ti, xr, xi, yr, yi
    with nogil:
        for r in range(rows):
            s = 0
            while s < n:
                for j in range(h):
                    i0 = s + j
                    i1 = i0 + h
                    ar = re[r, i0]
                    ai = im[r, i0]
                    br = re[r, i1]
                    bi = im[r, i1]
                    p1 = _qmul(wr[j], br, &ovf)
                    p2 = _qmul(wi[j], bi, &ovf)
                    p3 = _qmul(wr[j], bi, &ovf)
                    p4 = _qmul(wi[j], br, &ovf)
                    tr = _add32(p1, _wrap(-p2, &ovf), mode, L, &ovf)
                    ti = _add32(p3, p4, mode, L, &ovf)
                    xr = _add32(ar, tr, mode, L, &ovf)
                    xi = _add32(ai, ti, mode, L, &ovf)
                    yr = _add32(ar, _wrap(-tr, &ovf), mode, L, &ovf)
                    yi = _add32(ai, _wrap(-ti, &ovf), mode, L, &ovf)
                    if shift:
                        xr >>= 1
                        xi >>= 1
                        yr >>= 1
                        yi >>= 1
                    re[r, i0] = xr
                    im[r, i0] = xi
                    re[r, i1] = yr
                    im[r, i1] = yi
                s += m
    return 6 * rows * (n // 2), ovf
