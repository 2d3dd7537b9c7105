"""Dense complex tensor primitives.

Tensors are plain ``numpy.ndarray`` objects in C (row-major) order, so the
first axis is the most significant digit of a flattened index.  Every other
module in the package states its index layouts in terms of this convention.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

__all__ = ["contract", "permute_axes", "kron", "partial_trace"]

ATOL = 1e-10


def _as_tensor(a) -> np.ndarray:
    return np.asarray(a, dtype=np.complex128)


def contract(a, b, pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum over paired axes of ``a`` and ``b``.

    The result carries the uncontracted axes of ``a`` (in order) followed by
    the uncontracted axes of ``b``.  Conjugation is the caller's business.
    """
    a = _as_tensor(a)
    b = _as_tensor(b)
    axes_a = [int(p[0]) for p in pairs]
    axes_b = [int(p[1]) for p in pairs]
    for axes, t, name in ((axes_a, a, "a"), (axes_b, b, "b")):
        if len(set(axes)) != len(axes):
            raise ValueError(f"axis repeated in contraction pairs of {name}: {axes}")
        for ax in axes:
            if not 0 <= ax < t.ndim:
                raise ValueError(f"axis {ax} out of range for {name} with ndim {t.ndim}")
    for ia, ib in zip(axes_a, axes_b):
        if a.shape[ia] != b.shape[ib]:
            raise ValueError(
                f"dimension mismatch: a axis {ia} has {a.shape[ia]}, b axis {ib} has {b.shape[ib]}"
            )
    return np.tensordot(a, b, axes=(axes_a, axes_b))


def permute_axes(a, perm: Sequence[int]) -> np.ndarray:
    """Reorder axes: output axis ``k`` is input axis ``perm[k]``."""
    a = _as_tensor(a)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(a.ndim)):
        raise ValueError(f"{perm} is not a bijection on the {a.ndim} axes")
    return np.ascontiguousarray(np.transpose(a, perm))


def kron(ops: Sequence) -> np.ndarray:
    """Kronecker product of square matrices, first operand most significant."""
    if len(ops) == 0:
        return np.ones((1, 1), dtype=np.complex128)
    out = None
    for op in ops:
        m = _as_tensor(op)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"kron operand must be square, got shape {m.shape}")
        out = m if out is None else np.kron(out, m)
    return out


def partial_trace(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced matrix on the parties listed in ``keep`` (0-indexed).

    Kept parties appear in increasing party order regardless of the order of
    ``keep``.
    """
    rho = _as_tensor(rho)
    dims = [int(d) for d in dims]
    keep = sorted({int(k) for k in keep})
    if not keep:
        raise ValueError("keep must name at least one party")
    if any(not 0 <= k < len(dims) for k in keep):
        raise ValueError(f"keep {keep} out of range for {len(dims)} parties")
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise ValueError(f"matrix shape {rho.shape} does not match dims {dims}")
    n = len(dims)
    t = rho.reshape(dims + dims)
    # einsum sublists: row axis j -> j, column axis j -> j (traced) or n + j (kept)
    rows = list(range(n))
    cols = [n + j if j in keep else j for j in range(n)]
    out = [j for j in keep] + [n + j for j in keep]
    red = np.einsum(t, rows + cols, out)
    dk = int(np.prod([dims[k] for k in keep]))
    return red.reshape(dk, dk)

