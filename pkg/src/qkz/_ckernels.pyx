# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled exact integer convolution.

Inputs whose product bound fits in a signed 64-bit accumulator run through a
typed C loop; everything else is sent to the big-integer Kronecker path.
"""

from libc.stdint cimport int64_t
from libc.stdlib cimport malloc, free

from qkz._kernels_py import kronecker_convolve

cdef Py_ssize_t _C_LOOP_MAX_WORK = 200000


cdef list _c_convolve(list a, list b):
    cdef Py_ssize_t la = len(a), lb = len(b), n = la + lb - 1
    cdef Py_ssize_t i, j
    cdef int64_t x
    cdef int64_t *pa = <int64_t *> malloc(la * sizeof(int64_t))
    cdef int64_t *pb = <int64_t *> malloc(lb * sizeof(int64_t))
    cdef int64_t *out = <int64_t *> malloc(n * sizeof(int64_t))
    if pa == NULL or pb == NULL or out == NULL:
        free(pa); free(pb); free(out)
        raise MemoryError()
    try:
        for i in range(la):
            pa[i] = a[i]
        for j in range(lb):
            pb[j] = b[j]
        for i in range(n):
            out[i] = 0
        for i in range(la):
            x = pa[i]
            if x != 0:
                for j in range(lb):
                    out[i + j] += x * pb[j]
        return [out[i] for i in range(n)]
    finally:
        free(pa); free(pb); free(out)


def int_convolve(list a, list b):
    """Exact convolution of two nonempty lists of Python ints."""
    cdef Py_ssize_t la = len(a), lb = len(b)
    ma = max(map(abs, a))
    mb = max(map(abs, b))
    if not ma or not mb:
        return [0] * (la + lb - 1)
    cdef Py_ssize_t short = la if la < lb else lb
    bits = ma.bit_length() + mb.bit_length() + (<object> short).bit_length()
    if bits <= 62 and la * lb <= _C_LOOP_MAX_WORK:
        return _c_convolve(a, b)
    return kronecker_convolve(a, b)
