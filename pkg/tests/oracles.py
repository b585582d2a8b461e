"""Independent brute-force reference implementations used to freeze expected
values.  Deliberately written from scratch against the definitions, sharing no
code with the package: plain Fraction loops, list-of-pairs interval algebra.
"""

from fractions import Fraction
from math import lcm


def merge_pairs(pairs):
    """Canonical form of a list of (lo, hi) half-open pairs."""
    items = sorted((a, b) for a, b in pairs if a < b)
    out = []
    for a, b in items:
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def image_pairs(beta, gamma, pairs):
    """One forward image of a union of half-open intervals."""
    out = []
    for a, b in pairs:
        for s in range(len(gamma)):
            lo, hi = max(a, beta[s]), min(b, beta[s + 1])
            if lo < hi:
                out.append((lo + gamma[s], hi + gamma[s]))
    return merge_pairs(out)


def attractor_pairs(beta, gamma, cap=100000):
    """(n_stable, X) by direct set iteration from the full domain."""
    cur = [(beta[0], beta[-1])]
    for n in range(cap):
        nxt = image_pairs(beta, gamma, cur)
        if nxt == cur:
            return n, cur
        cur = nxt
    raise RuntimeError("oracle attractor did not stabilize")


def step_signed(beta, gamma, x, sign):
    """One application of the map to a one-sided point (sign = +1 or -1)."""
    r = len(gamma)
    for s in range(r):
        lo, hi = beta[s], beta[s + 1]
        if sign > 0:
            inside = lo <= x < hi
        else:
            inside = lo < x <= hi
        if inside:
            return x + gamma[s]
    raise ValueError(f"point {x} (sign {sign}) outside domain")


def orbit_signed(beta, gamma, x, sign, n):
    out = [x]
    for _ in range(n - 1):
        x = step_signed(beta, gamma, x, sign)
        out.append(x)
    return out


def itinerary_signed(beta, gamma, x, sign, n):
    out = []
    for _ in range(n):
        r = len(gamma)
        for s in range(r):
            lo, hi = beta[s], beta[s + 1]
            inside = (lo <= x < hi) if sign > 0 else (lo < x <= hi)
            if inside:
                out.append(s + 1)
                x = x + gamma[s]
                break
        else:
            raise ValueError("outside domain")
    return out


def orbit_tail_signed(beta, gamma, x, sign):
    """(preperiod, period) by brute-force value tracking."""
    seen = {}
    t = 0
    while True:
        if x in seen:
            return seen[x], t - seen[x]
        seen[x] = t
        x = step_signed(beta, gamma, x, sign)
        t += 1


def first_return(beta, gamma, J, x, sign, cap=100000):
    """(return_time, landing_value) of a one-sided point of J = (lo, hi)."""
    lo, hi = J
    y = step_signed(beta, gamma, x, sign)
    for t in range(1, cap):
        inside = (lo <= y < hi) if sign > 0 else (lo < y <= hi)
        if inside:
            return t, y
        y = step_signed(beta, gamma, y, sign)
    raise RuntimeError("oracle first return not found")


def return_breakpoints(beta, gamma, J, cap=100000):
    """Branch decomposition of the first-return map by dense sampling of
    return times: walks candidate breakpoints from the orbit grid."""
    lo, hi = J
    q = lcm(*[f.denominator for f in list(gamma) + list(beta)], 1)
    # sample every grid midpoint; group contiguous equal (time, translation)
    cells = []
    n = (hi - lo) * q
    assert n.denominator == 1
    n = n.numerator
    out = []
    prev = None
    for i in range(n):
        x = lo + Fraction(2 * i + 1, 2 * q)  # midpoint, never on the grid
        t, y = first_return(beta, gamma, J, x, +1, cap)
        key = (t, y - x)
        if key != prev:
            out.append((lo + Fraction(i, q), t, y - x))
            prev = key
    return out  # list of (branch_left, return_time, translation)
