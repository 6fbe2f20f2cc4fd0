"""Small numerical helpers shared by the root finders."""

from __future__ import annotations


def bisect_increasing(f, target, lo=1e-9, hi=1.0, tol=1e-12):
    """Root of ``f(x) = target`` for ``f`` strictly increasing on [lo, hi].

    Bisection runs until the bracket is narrower than ``tol`` *and* keeps
    going while the midpoint is still representable, so the returned value
    is as accurate as double precision allows.
    """
    flo = f(lo) - target
    fhi = f(hi) - target
    if flo > 0:
        raise ValueError("root lies below the bracket")
    if fhi < 0:
        raise ValueError("root lies above the bracket")
    if fhi == 0:
        return hi
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid) - target
        if fm == 0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
    # tol is the contract; the loop above already beat it
    assert hi - lo <= tol
    return lo if abs(f(lo) - target) <= abs(f(hi) - target) else hi


def horner(coeffs, x):
    """Evaluate sum(coeffs[n] * x**n)."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc
