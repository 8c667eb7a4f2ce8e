"""Compiled primitives on a piecewise-constant density.

A density is stored as sorted ``edges`` (length k+1, spanning [0, 1]) and the
probability ``mass`` of each of the k segments. Updates insert the sample
location as a new edge, so the representation is the exact posterior of a
piecewise-constant prior under the binary symmetric noise model.
"""

import math

import numpy as np
from numba import njit

PQS = 0
TPQS = 1
PROACTIVE = 2

_TIE = 1e-12


@njit(cache=True)
def snap(x, a, b):
    """Clamp ``x`` to [a, b] and move it onto an edge it misses only by
    rounding, so that quantiles of exactly split masses land on the split."""
    tol = min(1e-12, 1e-6 * (b - a))
    if x <= a + tol:
        return a
    if x >= b - tol:
        return b
    return x


@njit(cache=True)
def cumulative(mass):
    k = mass.shape[0]
    c = np.empty(k + 1)
    c[0] = 0.0
    s = 0.0
    for i in range(k):
        s += mass[i]
        c[i + 1] = s
    return c


@njit(cache=True)
def tail_cumulative(mass):
    k = mass.shape[0]
    r = np.empty(k + 1)
    r[k] = 0.0
    s = 0.0
    for i in range(k - 1, -1, -1):
        s += mass[i]
        r[i] = s
    return r


@njit(cache=True)
def locate(edges, x):
    k = edges.shape[0] - 1
    j = np.searchsorted(edges, x, side="right") - 1
    if j < 0:
        j = 0
    if j > k - 1:
        j = k - 1
    return j


@njit(cache=True)
def cdf_at(edges, mass, cum, x):
    if x <= edges[0]:
        return 0.0
    if x >= edges[-1]:
        return cum[-1]
    j = locate(edges, x)
    return cum[j] + mass[j] * (x - edges[j]) / (edges[j + 1] - edges[j])


@njit(cache=True)
def quantile_lower(edges, mass, cum, q):
    """Smallest x with cdf(x) >= q."""
    k = mass.shape[0]
    if q <= 0.0:
        return edges[0]
    # first segment whose right cumulative reaches q
    lo = 0
    hi = k
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid + 1] >= q:
            hi = mid
        else:
            lo = mid + 1
    j = lo
    if j >= k:
        j = k - 1
        while j > 0 and mass[j] <= 0.0:
            j -= 1
        return edges[j + 1]
    x = edges[j] + (q - cum[j]) / mass[j] * (edges[j + 1] - edges[j])
    return snap(x, edges[j], edges[j + 1])


@njit(cache=True)
def quantile_upper(edges, mass, rcum, q):
    """Largest x whose upper-tail mass is at least q."""
    k = mass.shape[0]
    if q <= 0.0:
        return edges[k]
    # last segment whose left tail-cumulative reaches q
    lo = -1
    hi = k - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if rcum[mid] >= q:
            lo = mid
        else:
            hi = mid - 1
    j = lo
    if j < 0:
        j = 0
        while j < k - 1 and mass[j] <= 0.0:
            j += 1
        return edges[j]
    x = edges[j + 1] - (q - rcum[j + 1]) / mass[j] * (edges[j + 1] - edges[j])
    return snap(x, edges[j], edges[j + 1])


@njit(cache=True)
def split_at(edges, mass, x):
    """Insert ``x`` as an edge, splitting its segment's mass by length.

    Returns new arrays and the index i with ``edges[i] == x``; segments with
    index < i lie left of x.
    """
    j = locate(edges, x)
    if x == edges[j]:
        return edges.copy(), mass.copy(), j
    if x == edges[j + 1]:
        return edges.copy(), mass.copy(), j + 1
    k = mass.shape[0]
    ne = np.empty(k + 2)
    nm = np.empty(k + 1)
    ne[: j + 1] = edges[: j + 1]
    ne[j + 1] = x
    ne[j + 2 :] = edges[j + 1 :]
    frac = (x - edges[j]) / (edges[j + 1] - edges[j])
    nm[:j] = mass[:j]
    nm[j] = mass[j] * frac
    nm[j + 1] = mass[j] - nm[j]
    nm[j + 2 :] = mass[j + 1 :]
    return ne, nm, j + 1


@njit(cache=True)
def bayes_update(edges, mass, x, y, p):
    """Posterior after label ``y`` at ``x`` with flip probability ``p``.

    The third return value is False when the label had zero predictive
    probability (only possible for p == 0).
    """
    ne, nm, i = split_at(edges, mass, x)
    if y == 0:
        left = 1.0 - p
        right = p
    else:
        left = p
        right = 1.0 - p
    nm[:i] *= left
    nm[i:] *= right
    tot = 0.0
    for v in nm:
        tot += v
    if not tot > 0.0:
        return ne, nm, False
    nm /= tot
    return ne, nm, True


@njit(cache=True)
def restrict(edges, mass, lo, hi):
    """Zero the density outside [lo, hi] and renormalize (if any mass is left)."""
    ne, nm, i = split_at(edges, mass, lo)
    ne, nm, j = split_at(ne, nm, hi)
    nm[:i] = 0.0
    nm[j:] = 0.0
    tot = 0.0
    for v in nm:
        tot += v
    if tot > 0.0:
        nm /= tot
    return ne, nm, tot


@njit(cache=True)
def median_bin(edges, mass, cum, nbins):
    med = quantile_lower(edges, mass, cum, 0.5)
    b = int(med * nbins)
    if b > nbins - 1:
        b = nbins - 1
    return b


@njit(cache=True)
def bin_mass(edges, mass, cum, nbins, b):
    return cdf_at(edges, mass, cum, (b + 1) / nbins) - cdf_at(edges, mass, cum, b / nbins)


@njit(cache=True)
def bin_masses(edges, mass, cum, nbins):
    out = np.empty(nbins)
    prev = 0.0
    for b in range(nbins):
        c = cdf_at(edges, mass, cum, (b + 1) / nbins)
        out[b] = c - prev
        prev = c
    return out


@njit(cache=True)
def median_bin_mass(edges, mass, cum, nbins):
    # A bin holding more than half the mass must contain the median, so for
    # thresholds above 1/2 this equals the largest bin mass.
    b = median_bin(edges, mass, cum, nbins)
    return bin_mass(edges, mass, cum, nbins, b)


@njit(cache=True)
def support(edges, mass):
    k = mass.shape[0]
    i = 0
    while i < k - 1 and mass[i] <= 0.0:
        i += 1
    j = k - 1
    while j > 0 and mass[j] <= 0.0:
        j -= 1
    return edges[i], edges[j + 1]


@njit(cache=True)
def truncate_tails(edges, mass, cum, rcum, x, nbins):
    """Remove mass chi = min(F(x), 1 - F(x)) from each tail.

    When both cuts meet (x at the median) the bin holding the median is kept.
    """
    phi = cdf_at(edges, mass, cum, x)
    chi = min(phi, cum[-1] - phi)
    if chi <= 0.0:
        return edges.copy(), mass.copy(), 0.0
    lo = quantile_lower(edges, mass, cum, chi)
    hi = quantile_upper(edges, mass, rcum, chi)
    if hi > lo:
        ne, nm, tot = restrict(edges, mass, lo, hi)
        if tot > 0.0:
            return ne, nm, chi
    b = median_bin(edges, mass, cum, nbins)
    ne, nm, tot = restrict(edges, mass, b / nbins, (b + 1) / nbins)
    return ne, nm, chi


@njit(cache=True)
def binary_entropy(s):
    if s <= 0.0 or s >= 1.0:
        return 0.0
    return -(s * math.log2(s) + (1.0 - s) * math.log2(1.0 - s))


@njit(cache=True)
def mutual_information(phi, p):
    """H_b(phi * p) - H_b(p) with phi * p = phi (1 - p) + (1 - phi) p, in bits."""
    s = phi * (1.0 - p) + (1.0 - phi) * p
    return binary_entropy(s) - binary_entropy(p)


@njit(cache=True)
def _better(u, x, best_u, best_x, pos):
    if u > best_u + _TIE:
        return True
    if u >= best_u - _TIE:
        d, bd = abs(x - pos), abs(best_x - pos)
        if d < bd:
            return True
        if d == bd and x < best_x:
            return True
    return False


@njit(cache=True)
def proactive_argmax(edges, mass, cum, pos, lam, p):
    """Exact maximizer of MI(x) - lam |pos - x| over [0, 1].

    On each segment the CDF is linear, so the utility is concave on each
    piece between edges and ``pos``; its maximum is at a piece endpoint or at
    the stationary point solving ``(1-2p) c log2((1-s)/s) = +-lam``.
    """
    k = mass.shape[0]
    hp = binary_entropy(p)
    best_x = pos
    best_u = binary_entropy(p + (1.0 - 2.0 * p) * cdf_at(edges, mass, cum, pos)) - hp
    for j in range(k + 1):
        x = edges[j]
        u = binary_entropy(p + (1.0 - 2.0 * p) * cum[j]) - hp - lam * abs(pos - x)
        if _better(u, x, best_u, best_x, pos):
            best_u = u
            best_x = x
    for j in range(k):
        if mass[j] <= 0.0:
            continue
        w = edges[j + 1] - edges[j]
        slope = (1.0 - 2.0 * p) * mass[j] / w
        for side in (-1.0, 1.0):
            kappa = side * lam / slope
            if kappa > 700.0 or kappa < -700.0:
                continue
            s = 1.0 / (1.0 + 2.0**kappa)
            phi = (s - p) / (1.0 - 2.0 * p)
            x = snap(edges[j] + (phi - cum[j]) / mass[j] * w, edges[j], edges[j + 1])
            if x <= edges[j] or x >= edges[j + 1]:
                continue
            if (x - pos) * side <= 0.0 and lam > 0.0:
                continue
            u = binary_entropy(p + (1.0 - 2.0 * p) * phi) - hp - lam * abs(pos - x)
            if _better(u, x, best_u, best_x, pos):
                best_u = u
                best_x = x
    return best_x, best_u


@njit(cache=True)
def grid_argmax(edges, mass, cum, pos, lam, p, ngrid):
    """Maximizer of the utility over the candidate grid i / ngrid."""
    hp = binary_entropy(p)
    best_x = 0.0
    best_u = -np.inf
    for i in range(ngrid + 1):
        x = i / ngrid
        u = binary_entropy(p + (1.0 - 2.0 * p) * cdf_at(edges, mass, cum, x)) - hp - lam * abs(pos - x)
        if _better(u, x, best_u, best_x, pos):
            best_u = u
            best_x = x
    return best_x, best_u


@njit(cache=True)
def next_location(edges, mass, cum, nbins, mode, m, lam, p, pos, n, first, ngrid):
    """Next sample location and its utility (NaN unless proactive)."""
    if n == 0 and not math.isnan(first):
        return first, math.nan
    if mode == PQS or (mode == TPQS and (n == 0 or m == 2.0)):
        return quantile_lower(edges, mass, cum, 1.0 / m), math.nan
    if mode == TPQS:
        rcum = tail_cumulative(mass)
        te, tm, _ = truncate_tails(edges, mass, cum, rcum, pos, nbins)
        tc = cumulative(tm)
        x0 = quantile_lower(te, tm, tc, 1.0 / m)
        x1 = quantile_upper(te, tm, tail_cumulative(tm), 1.0 / m)
        if abs(x0 - pos) <= abs(x1 - pos):
            return x0, math.nan
        return x1, math.nan
    if ngrid > 0:
        return grid_argmax(edges, mass, cum, pos, lam, p, ngrid)
    return proactive_argmax(edges, mass, cum, pos, lam, p)


@njit(cache=True)
def should_stop(edges, mass, cum, nbins, stop_mass, support_eps):
    """Stopping rule: support width (when support_eps > 0) or bin mass."""
    if support_eps > 0.0:
        a, b = support(edges, mass)
        return b - a <= 2.0 * support_eps
    if stop_mass > 0.0:
        return median_bin_mass(edges, mass, cum, nbins) >= stop_mass
    return False


@njit(cache=True)
def run_search(
    edges, mass, nbins, theta, p, p_update, m, mode, lam, start, first,
    count_approach, stop_mass, support_eps, max_steps, uniforms, ngrid,
):
    """Whole search against the step oracle ``1{x < theta}`` with flips
    ``uniforms[n] < p``.

    Returns per-step arrays (x, y, running median, stop statistic, utility,
    support a, support b), the number of samples, the distance, a status
    code (1 converged, 0 step cap, -1 contradiction) and the final arrays.
    """
    xs = np.empty(max_steps)
    ys = np.empty(max_steps, dtype=np.int64)
    est = np.empty(max_steps)
    stat = np.empty(max_steps)
    util = np.empty(max_steps)
    sa = np.empty(max_steps)
    sb = np.empty(max_steps)
    cum = cumulative(mass)
    pos = start
    dist = 0.0
    n = 0
    status = 0
    while True:
        if n >= 1 and should_stop(edges, mass, cum, nbins, stop_mass, support_eps):
            status = 1
            break
        if n >= max_steps:
            break
        x, u = next_location(edges, mass, cum, nbins, mode, m, lam, p_update, pos, n, first, ngrid)
        if n > 0 or count_approach:
            dist += abs(x - pos)
        pos = x
        f = 1 if x < theta else 0
        y = f ^ (1 if uniforms[n] < p else 0)
        edges, mass, ok = bayes_update(edges, mass, x, y, p_update)
        xs[n] = x
        ys[n] = y
        util[n] = u
        n += 1
        if not ok:
            status = -1
            break
        cum = cumulative(mass)
        est[n - 1] = quantile_lower(edges, mass, cum, 0.5)
        stat[n - 1] = median_bin_mass(edges, mass, cum, nbins)
        a, b = support(edges, mass)
        sa[n - 1] = a
        sb[n - 1] = b
    return xs[:n], ys[:n], est[:n], stat[:n], util[:n], sa[:n], sb[:n], n, dist, status, edges, mass
