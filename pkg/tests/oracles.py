"""Slow, loop-based reference implementations used as independent oracles.

Everything here works entry by entry in plain Python floats, deliberately
avoiding the vectorized code paths under test.
"""

import itertools
import math


def indices(shape):
    return itertools.product(*[range(d) for d in shape])


def brute_outer(vectors):
    """Entrywise outer product as a nested list-of-floats dict."""
    shape = tuple(len(v) for v in vectors)
    out = {}
    for idx in indices(shape):
        val = 1.0
        for v, j in zip(vectors, idx):
            val *= float(v[j])
        out[idx] = val
    return shape, out


def brute_norms(tensor):
    """(E, F, G) computed by explicit loops over the flat data."""
    e = 0.0
    f2 = 0.0
    g = 0.0
    for x in tensor.data.tolist():
        e += abs(x)
        f2 += x * x
        g = max(g, abs(x))
    return e, math.sqrt(f2), g


def brute_inner(a, b):
    total = 0.0
    for x, y in zip(a.data.tolist(), b.data.tolist()):
        total += x * y
    return total


def brute_reconstruct(model):
    """Dense reconstruction by direct summation of the defining formula."""
    out = {}
    for idx in indices(model.shape):
        val = 0.0
        for p in range(model.r):
            term = float(model.delta[p])
            for i, j in enumerate(idx):
                term *= float(model.factors[i][j, p])
            val += term
        out[idx] = val
    return out


def brute_kl(a, b):
    """Termwise generalized KL divergence; +inf on unmatched support."""
    total = 0.0
    for x, y in zip(a.data.tolist(), b.data.tolist()):
        if x > 0.0:
            if y == 0.0:
                return math.inf
            total += x * math.log(x / y) - x + y
        else:
            total += y
    return total


def max_abs_diff(tensor, entries):
    """Largest |tensor[idx] - entries[idx]| over a dict oracle."""
    return max(abs(tensor[idx] - val) for idx, val in entries.items())
