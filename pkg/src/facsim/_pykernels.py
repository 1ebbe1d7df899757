"""Pure numpy kernels.  Bit-identical to the compiled ``_ckernels`` module."""

import numpy as np

from facsim.words import AdderSpec, Strategy, imprecise_add_array

MODE_NONE, MODE_SA0, MODE_SA1, MODE_FLIP = 0, 1, 2, 3
ADD_EXACT, ADD_OR_BITS, ADD_CONSTANT_ONE = 0, 1, 2

_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)
_M32 = np.int64(0xFFFFFFFF)


def apply_mode(vals, net, mode):
    if mode == MODE_SA0:
        vals[net] = 0
    elif mode == MODE_SA1:
        vals[net] = _ONES
    elif mode == MODE_FLIP:
        np.invert(vals[net], out=vals[net])


def run_gates(ops, in0, in1, outs, seq, vals, net_mode):
    """Evaluate gates at topological positions ``seq`` into ``vals`` in place."""
    ops_l, in0_l, in1_l, outs_l = ops.tolist(), in0.tolist(), in1.tolist(), outs.tolist()
    for p in seq.tolist():
        op, o = ops_l[p], outs_l[p]
        row = vals[o]
        if op == 0:
            np.bitwise_and(vals[in0_l[p]], vals[in1_l[p]], out=row)
        elif op == 1:
            np.bitwise_or(vals[in0_l[p]], vals[in1_l[p]], out=row)
        elif op == 2:
            np.bitwise_xor(vals[in0_l[p]], vals[in1_l[p]], out=row)
        elif op == 3:
            np.invert(vals[in0_l[p]], out=row)
        elif op == 4:
            np.bitwise_and(vals[in0_l[p]], vals[in1_l[p]], out=row)
            np.invert(row, out=row)
        elif op == 5:
            np.bitwise_or(vals[in0_l[p]], vals[in1_l[p]], out=row)
            np.invert(row, out=row)
        elif op == 6:
            row[:] = 0
        elif op == 7:
            row[:] = _ONES
        else:
            row[:] = vals[in0_l[p]]
        m = net_mode[o]
        if m:
            apply_mode(vals, o, m)


def _wrap32(x):
    """Reduce int64 values to signed 32-bit; return (wrapped, overflow_count)."""
    w = ((x + np.int64(1 << 31)) & _M32) - np.int64(1 << 31)
    return w, int(np.count_nonzero(w != x))


def add32(x, y, mode, L):
    """Signed 32-bit addition routed through the unsigned adder model."""
    ux = (x & _M32).astype(np.uint64)
    uy = (y & _M32).astype(np.uint64)
    if mode == ADD_EXACT:
        s = ux + uy
    else:
        strategy = Strategy.OR_BITS if mode == ADD_OR_BITS else Strategy.CONSTANT_ONE
        s = imprecise_add_array(ux, uy, AdderSpec(32, L, strategy))
    r = (s & np.uint64(0xFFFFFFFF)).astype(np.int64)
    r = np.where(r >= (1 << 31), r - (1 << 32), r)
    ovf = int(np.count_nonzero(((x < 0) == (y < 0)) & ((r < 0) != (x < 0))))
    return r, ovf


def _neg(x):
    return _wrap32(-x)


def _qmul(w, x):
    return _wrap32((w * x + (1 << 14)) >> 15)


def fft_stage(re, im, wr, wi, mode, L, shift):
    """One radix-2 DIT stage over the last axis of ``re``/``im`` (int64, in place).

    Butterfly: ``t = w*b`` (exact Q15 products, two additions through the adder),
    ``a + t`` and ``a - t`` (subtraction adds the two's complement).  Returns
    ``(additions, overflows)``.
    """
    rows, n = re.shape
    h = wr.shape[0]
    m = 2 * h
    R = re.reshape(rows, n // m, m)
    I = im.reshape(rows, n // m, m)
    ar, br = R[..., :h].copy(), R[..., h:].copy()
    ai, bi = I[..., :h].copy(), I[..., h:].copy()
    ovf = 0
    p1, o1 = _qmul(wr, br)
    p2, o2 = _qmul(wi, bi)
    p3, o3 = _qmul(wr, bi)
    p4, o4 = _qmul(wi, br)
    ovf += o1 + o2 + o3 + o4
    n2, o = _neg(p2)
    ovf += o
    tr, o = add32(p1, n2, mode, L)
    ovf += o
    ti, o = add32(p3, p4, mode, L)
    ovf += o
    xr, o = add32(ar, tr, mode, L)
    ovf += o
    xi, o = add32(ai, ti, mode, L)
    ovf += o
    ntr, o = _neg(tr)
    ovf += o
    nti, o = _neg(ti)
    ovf += o
    yr, o = add32(ar, ntr, mode, L)
    ovf += o
    yi, o = add32(ai, nti, mode, L)
    ovf += o
    if shift:
        xr >>= 1
        xi >>= 1
        yr >>= 1
        yi >>= 1
    R[..., :h] = xr
    R[..., h:] = yr
    I[..., :h] = xi
    I[..., h:] = yi
    return 6 * rows * (n // 2), ovf
