"""Quasi-random sampling of chart domains.

Verification sweeps need points that fill a box evenly (so no region of the
chart goes unchecked) yet differ between seeds (so reruns with another seed
are an independent experiment). Halton sequences give the even fill; a
seeded Cranley-Patterson rotation gives the seed dependence without
disturbing the equidistribution.
"""

import numpy as np

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _halton_axis(count, base, skip=20):
    out = np.empty(count)
    for i in range(count):
        k = i + skip
        f = 1.0
        r = 0.0
        while k > 0:
            f /= base
            r += f * (k % base)
            k //= base
        out[i] = r
    return out


def unit_box(count, dim, seed=0):
    """count points in [0,1)^dim: Halton plus a seeded rotation mod 1."""
    if dim > len(_PRIMES):
        raise ValueError("dimension %d exceeds supported maximum" % dim)
    pts = np.stack([_halton_axis(count, _PRIMES[j]) for j in range(dim)], axis=1)
    shift = np.random.default_rng(seed).random(dim)
    return np.mod(pts + shift, 1.0)


def box(count, bounds, seed=0):
    """count points in a product of intervals given as (lo, hi) pairs."""
    bounds = np.asarray(bounds, dtype=float)
    lo = bounds[:, 0]
    hi = bounds[:, 1]
    u = unit_box(count, len(bounds), seed=seed)
    return lo + u * (hi - lo)
