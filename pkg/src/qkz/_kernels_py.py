"""Pure-Python exact integer convolution.

Small inputs use the schoolbook loop; larger ones use Kronecker substitution,
packing each coefficient list into one big integer so that the product is a
single CPython big-int multiplication.
"""

_SCHOOLBOOK_LIMIT = 12


def _schoolbook(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pack(vals, nbytes):
    pos = b"".join((v if v > 0 else 0).to_bytes(nbytes, "little") for v in vals)
    neg = b"".join((-v if v < 0 else 0).to_bytes(nbytes, "little") for v in vals)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def kronecker_convolve(a, b):
    """Convolve two lists of ints through one big-integer product."""
    la, lb = len(a), len(b)
    ma = max(map(abs, a))
    mb = max(map(abs, b))
    if not ma or not mb:
        return [0] * (la + lb - 1)
    bits = ma.bit_length() + mb.bit_length() + min(la, lb).bit_length() + 2
    nbytes = (bits + 7) // 8
    prod = _pack(a, nbytes) * _pack(b, nbytes)
    n = la + lb - 1
    half = 1 << (8 * nbytes - 1)
    bias = int.from_bytes((b"\x00" * (nbytes - 1) + b"\x80") * n, "little")
    raw = (prod + bias).to_bytes(nbytes * n, "little")
    fb = int.from_bytes
    return [fb(raw[i:i + nbytes], "little") - half for i in range(0, nbytes * n, nbytes)]


def int_convolve(a, b):
    """Exact convolution of two nonempty lists of Python ints."""
    if min(len(a), len(b)) <= _SCHOOLBOOK_LIMIT:
        return _schoolbook(a, b)
    return kronecker_convolve(a, b)
