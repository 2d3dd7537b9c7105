"""Independent brute-force references.

Everything here loops over explicit index assignments and never calls the
package's contraction engine, so agreement is a genuine cross-check.
"""

import itertools

import numpy as np

EPS = {(0, 1): 1, (1, 0): -1, (0, 0): 0, (1, 1): 0}


def _assignments(dims_per_label):
    return itertools.product(*[range(d) for d in dims_per_label])


def lu_pure(amps, perms):
    """sum  prod_c a[i_c]  prod_c conj(a[i_perm(c)]),  perms 0-indexed one-line."""
    dims = amps.shape
    n, r = len(perms), len(perms[0])
    total = 0j
    for flat in _assignments([dims[p] for p in range(n) for _ in range(r)]):
        idx = [flat[p * r:(p + 1) * r] for p in range(n)]
        term = 1 + 0j
        for c in range(r):
            term *= amps[tuple(idx[p][c] for p in range(n))]
            term *= np.conj(amps[tuple(idx[p][perms[p][c]] for p in range(n))])
        total += term
    return total


def lu_mixed(rho_t, perms):
    """rho_t has axes (upper parties..., lower parties...)."""
    n, r = len(perms), len(perms[0])
    dims = rho_t.shape[:n]
    total = 0j
    for flat in _assignments([dims[p] for p in range(n) for _ in range(r)]):
        idx = [flat[p * r:(p + 1) * r] for p in range(n)]
        term = 1 + 0j
        for c in range(r):
            up = tuple(idx[p][c] for p in range(n))
            lo = tuple(idx[p][perms[p][c]] for p in range(n))
            term *= rho_t[up + lo]
        total += term
    return total


def slocc_pure(amps, perms):
    """sum over slots of prod eps(slot pairs) prod_c a[slot_perm(c)]."""
    n, r = len(perms), len(perms[0])
    total = 0j
    for flat in _assignments([2] * (n * r)):
        s = [flat[p * r:(p + 1) * r] for p in range(n)]
        term = 1 + 0j
        for p in range(n):
            for k in range(0, r, 2):
                term *= EPS[(s[p][k], s[p][k + 1])]
        if term == 0:
            continue
        for c in range(r):
            term *= amps[tuple(s[p][perms[p][c]] for p in range(n))]
        total += term
    return total


def slocc_modsq_mixed(rho_t, perms):
    n, r = len(perms), len(perms[0])
    total = 0j
    for flat in _assignments([2] * (2 * n * r)):
        u = [flat[p * r:(p + 1) * r] for p in range(n)]
        w = [flat[(n + p) * r:(n + p + 1) * r] for p in range(n)]
        term = 1 + 0j
        for p in range(n):
            for k in range(0, r, 2):
                term *= EPS[(u[p][k], u[p][k + 1])] * EPS[(w[p][k], w[p][k + 1])]
        if term == 0:
            continue
        for c in range(r):
            up = tuple(u[p][perms[p][c]] for p in range(n))
            lo = tuple(w[p][perms[p][c]] for p in range(n))
            term *= rho_t[up + lo]
        total += term
    return total


def three_tangle_explicit(amps):
    """The index list written out term by term:
    a^{i1 j1 k1} a^{i2 j2 k2} e_{i1 i3} e_{j1 j3} e_{k1 k4} e_{i2 i4} e_{j2 j4} e_{k2 k3} a^{i3 j3 k3} a^{i4 j4 k4}."""
    total = 0j
    for i1, i2, i3, i4, j1, j2, j3, j4, k1, k2, k3, k4 in itertools.product(range(2), repeat=12):
        e = (EPS[(i1, i3)] * EPS[(j1, j3)] * EPS[(k1, k4)] * EPS[(i2, i4)] * EPS[(j2, j4)] * EPS[(k2, k3)])
        if e:
            total += e * amps[i1, j1, k1] * amps[i2, j2, k2] * amps[i3, j3, k3] * amps[i4, j4, k4]
    return total


def partial_trace_2x2(rho, keep):
    """Keep party 0 or 1 of a 4x4 two-qubit matrix by explicit summation."""
    out = np.zeros((2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            for t in range(2):
                if keep == 1:
                    out[a, b] += rho[2 * t + a, 2 * t + b]
                else:
                    out[a, b] += rho[2 * a + t, 2 * b + t]
    return out


def permutation_from_kets(perms, dims):
    """P = sum_x |y(x)><x| with y[c][p] = x[perms[p][c]][p], built ket by ket."""
    n, r = len(dims), len(perms[0])
    labels = [(c, p) for c in range(r) for p in range(n)]
    shape = [dims[p] for _, p in labels]
    D = int(np.prod(shape))
    P = np.zeros((D, D))
    for x in itertools.product(*[range(d) for d in shape]):
        xd = {lab: v for lab, v in zip(labels, x)}
        y = tuple(xd[(perms[p][c], p)] for c, p in labels)
        P[np.ravel_multi_index(y, shape), np.ravel_multi_index(x, shape)] = 1
    return P
