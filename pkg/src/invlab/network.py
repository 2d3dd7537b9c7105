"""Exact simulation of the invariant-measuring networks.

Joint registers of ``r`` copies are laid out copy-major, party-minor: copy 1
parties 1..n, then copy 2, and so on.  As tensors, axis ``c * n + p`` is
party ``p`` of copy ``c``.

Every expectation is first computed exactly and only then sampled, which keeps
model error and shot noise apart.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .invariants import PermutationTuple
from .states import SIGMA_Y, DensityMatrix, PureState, make_density, make_rng
from .tensor import kron, permute_axes

__all__ = [
    "DEFAULT_DIM_CAP",
    "CIRCUIT_DIM_CAP",
    "SHOT_BATCH",
    "DimensionCapError",
    "NetworkConfig",
    "SpaParameters",
    "Recovered",
    "dim_cap",
    "permutation_operator",
    "pairwise_swap",
    "spa_coefficients",
    "lambda_map",
    "spa_map",
    "apply_spa",
    "spa_choi",
    "network_expectation",
    "structured_expectation",
    "circuit_expectation",
    "sample_shots",
    "recover_modsq",
]

DEFAULT_DIM_CAP = 2**16
# the ancilla circuit holds dense (2 D) x (2 D) matrices; keep D small
CIRCUIT_DIM_CAP = 2**8
SHOT_BATCH = 2**20
AGREEMENT_TOL = 1e-10


class DimensionCapError(RuntimeError):
    """A dense object would exceed the configured size guard."""


def dim_cap() -> int:
    raw = os.environ.get("INVLAB_DIM_CAP")
    if raw is None or raw == "":
        return DEFAULT_DIM_CAP
    return int(raw)


@dataclass(frozen=True)
class NetworkConfig:
    spec: PermutationTuple
    use_spa: bool = False
    component: str = "real"
    shots: int = 0
    seed: int | None = None

    def __post_init__(self):
        if self.component not in ("real", "imaginary"):
            raise ValueError(f"component must be 'real' or 'imaginary', got {self.component!r}")
        if self.component == "imaginary" and self.mode != "lu":
            raise ValueError("the imaginary component is only defined for LU networks")
        if self.use_spa and self.mode != "slocc":
            raise ValueError("the SPA stage only exists in SLOCC networks")
        if self.shots < 0:
            raise ValueError("shots must be >= 0")

    @property
    def mode(self) -> str:
        return self.spec.mode


@dataclass(frozen=True)
class SpaParameters:
    """Mixing weights ``identity_weight * I / 2^(nr) + map_weight * Lambda``."""

    n: int
    r: int
    identity_weight: float
    map_weight: float

    @property
    def scale(self) -> int:
        """``2^(3nr/2)``, the integer behind both weights."""
        return 2 ** (3 * self.n * self.r // 2)


class Recovered(NamedTuple):
    value: float
    below_zero: bool


def _refuse_unnormalized(state):
    if isinstance(state, PureState) and state.unnormalized:
        raise ValueError("unnormalized states cannot be fed to a network")


def _axis_map(perms: Sequence[Sequence[int]], n: int) -> list[int]:
    """Axis permutation realizing ``|x> -> |y>``, ``y[c, p] = x[perms[p][c], p]``."""
    r = len(perms[0])
    return [perms[p][c] * n + p for c in range(r) for p in range(n)]


def _inverse(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, s in enumerate(perm):
        inv[s] = i
    return tuple(inv)


def permutation_operator(spec: PermutationTuple, dims: Sequence[int], r: int | None = None) -> np.ndarray:
    """Dense 0/1 matrix of ``P = (x)_p P_{perms[p]}`` on the joint register.

    ``P_sigma |i_1 ... i_r> = |i_sigma(1) ... i_sigma(r)>`` on each party's
    copy slots.
    """
    dims = tuple(int(d) for d in dims)
    r = spec.r if r is None else int(r)
    if r != spec.r:
        raise ValueError(f"spec has degree {spec.r}, asked for r={r}")
    if spec.n != len(dims):
        raise ValueError(f"spec has {spec.n} parties, dims has {len(dims)}")
    n = len(dims)
    shape = dims * r
    total = int(np.prod(shape))
    if total > dim_cap():
        raise DimensionCapError(f"permutation operator of dimension {total} exceeds the guard")
    src = np.transpose(np.arange(total).reshape(shape), _axis_map(spec.perms, n)).reshape(-1)
    out = np.zeros((total, total), dtype=np.complex128)
    out[np.arange(total), src] = 1.0
    return out


def pairwise_swap(r: int, dims: Sequence[int]) -> np.ndarray:
    """Unitary exchanging copies (1, 2), (3, 4), ... as whole blocks."""
    if r % 2:
        raise ValueError("pairwise SWAP needs an even number of copies")
    swap = tuple(c + 1 if c % 2 == 0 else c - 1 for c in range(r))
    spec = PermutationTuple(r, (swap,) * len(dims), "lu")
    return permutation_operator(spec, dims, r)


def spa_coefficients(n: int, r: int) -> SpaParameters:
    if n < 1:
        raise ValueError("n must be >= 1")
    if r < 2 or r % 2:
        raise ValueError("r must be an even number >= 2")
    big = 2 ** (3 * n * r // 2)
    return SpaParameters(n, r, big / (big + 1), 1 / (big + 1))


def _copy_tensor(matrix: np.ndarray, n: int, r: int) -> np.ndarray:
    dc = 2**n
    if matrix.shape != (dc**r, dc**r):
        raise ValueError(f"matrix shape {matrix.shape} does not fit {r} copies of {n} qubits")
    return matrix.reshape((dc,) * (2 * r))


def lambda_map(joint, n: int, r: int) -> np.ndarray:
    """Spin flip of every even-numbered copy (copies 2, 4, ...).

    Not completely positive, so only the SPA reaches it physically; the raw map
    serves as an oracle and for the ideal-Lambda diagnostic path.
    """
    m = np.asarray(joint.matrix if isinstance(joint, DensityMatrix) else joint, dtype=np.complex128)
    t = _copy_tensor(m, n, r)
    y = kron([SIGMA_Y] * n)
    for c in range(1, r, 2):
        # transpose copy c, then conjugate that copy by Y
        axes = list(range(2 * r))
        axes[c], axes[r + c] = r + c, c
        t = np.transpose(t, axes)
        t = np.moveaxis(np.tensordot(y, t, axes=([1], [c])), 0, c)
        t = np.moveaxis(np.tensordot(t, y, axes=([r + c], [0])), -1, r + c)
    return t.reshape(m.shape)


def spa_map(x, params: SpaParameters) -> np.ndarray:
    """Linear SPA channel on an arbitrary joint matrix."""
    m = np.asarray(x, dtype=np.complex128)
    d = 2 ** (params.n * params.r)
    return params.identity_weight * np.trace(m) * np.eye(d) / d + params.map_weight * lambda_map(
        m, params.n, params.r
    )


def apply_spa(joint: DensityMatrix, params: SpaParameters) -> DensityMatrix:
    """Structural physical approximation of ``lambda_map``; the output is a valid state."""
    out = spa_map(joint.matrix, params)
    return make_density(out, joint.dims)


def spa_choi(params: SpaParameters) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) SPA(|i><j|)``."""
    d = 2 ** (params.n * params.r)
    choi = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, j] = 1.0
            choi[i * d : (i + 1) * d, j * d : (j + 1) * d] = spa_map(e, params)
    return choi


def _joint_size(state, r: int) -> int:
    d = int(np.prod(state.dims))
    return d**r if isinstance(state, PureState) else d ** (2 * r)


def _check_size(state, r: int):
    size = _joint_size(state, r)
    cap = dim_cap()
    if size > cap:
        raise DimensionCapError(
            f"dense joint object has {size} entries, above the cap {cap} (set INVLAB_DIM_CAP to raise it)"
        )


def _tensor_power_pure(psi: PureState, r: int) -> np.ndarray:
    out = psi.amplitudes
    for _ in range(r - 1):
        out = np.multiply.outer(out, psi.amplitudes)
    return out


def _tensor_power_mixed(rho: DensityMatrix, r: int) -> np.ndarray:
    """``rho^{(x) r}`` with axes (row c,p ..., col c,p ...)."""
    n = rho.n
    t = rho.matrix.reshape(tuple(rho.dims) * 2)
    out = t
    for _ in range(r - 1):
        out = np.multiply.outer(out, t)
    # outer products interleave as (rows_1, cols_1, rows_2, cols_2, ...)
    rows = [c * 2 * n + p for c in range(r) for p in range(n)]
    cols = [c * 2 * n + n + p for c in range(r) for p in range(n)]
    return permute_axes(out, rows + cols)


def _trace_rows_cols(t: np.ndarray, k: int) -> complex:
    d = int(np.prod(t.shape[:k]))
    return complex(np.trace(t.reshape(d, d)))


def _omega(n: int) -> np.ndarray:
    """``(1 (x) Y^T)|Omega>`` on one copy pair, as a (2^n, 2^n) array."""
    dc = 2**n
    yt = kron([SIGMA_Y] * n).T
    return np.kron(np.eye(dc), yt) @ np.eye(dc).reshape(-1)


def structured_expectation(state, config: NetworkConfig) -> float:
    """Ancilla ``<Z>`` from operator algebra on the joint tensor.

    Permutations act as axis permutations, the tilde map as a transpose plus
    ``Y`` conjugation, and the final trace against the controlled unitary as a
    relabelled trace.  Nothing of size ``D^r x D^r`` is materialized for pure
    inputs.
    """
    spec = config.spec
    _check_size(state, spec.r)
    n, r = state.n, spec.r
    pure = isinstance(state, PureState)
    if spec.mode == "lu":
        amap = _axis_map(spec.perms, n)
        if pure:
            big = _tensor_power_pure(state, r)
            val = complex(np.vdot(big, permute_axes(big, amap)))
        else:
            t = _tensor_power_mixed(state, r)
            # (P T)[y, x] = T[P^-1 y, x]: permute the row axes only
            val = _trace_rows_cols(permute_axes(t, amap + list(range(n * r, 2 * n * r))), n * r)
        return float((1j * val).real if config.component == "imaginary" else val.real)

    # SLOCC: P^dagger rho^{(x) r} P, then Lambda (or its SPA), then pairwise SWAP
    inv = tuple(_inverse(p) for p in spec.perms)
    amap = _axis_map(inv, n)
    dc = 2**n
    if pure:
        phi = permute_axes(_tensor_power_pure(state, r), amap).reshape((dc,) * r)
        # Tr(SWAP (1 (x) Y) X^{T_2} (1 (x) Y)) = <w|X|w> with w = (1 (x) Y^T)|Omega>
        w = _omega(n).reshape(dc, dc)
        amp = phi
        for _ in range(r // 2):
            amp = np.tensordot(w.conj(), amp, axes=([0, 1], [0, 1]))
        ideal = float(abs(complex(amp)) ** 2)
    else:
        t = _tensor_power_mixed(state, r)
        t = permute_axes(t, amap + [n * r + a for a in amap])
        lam = lambda_map(t.reshape(dc**r, dc**r), n, r).reshape((dc,) * (2 * r))
        swap = [c + 1 if c % 2 == 0 else c - 1 for c in range(r)]
        ideal = _trace_rows_cols(permute_axes(lam, swap + list(range(r, 2 * r))), r).real
    if not config.use_spa:
        return float(ideal)
    params = spa_coefficients(n, r)
    trace_u = dc ** (r // 2)
    return float(params.identity_weight * trace_u / dc**r + params.map_weight * ideal)


_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
_S = np.diag([1, 1j]).astype(np.complex128)


def _joint_density(state, r: int) -> np.ndarray:
    m = state.matrix if isinstance(state, DensityMatrix) else np.outer(state.vector(), state.vector().conj())
    return kron([m] * r)


def circuit_expectation(state, config: NetworkConfig) -> float:
    """Dense ancilla circuit: |0> - H - [S] - controlled-U - H - measure Z."""
    spec = config.spec
    n, r = state.n, spec.r
    d = int(np.prod(state.dims)) ** r
    if d > CIRCUIT_DIM_CAP:
        raise DimensionCapError(f"circuit path limited to joint dimension {CIRCUIT_DIM_CAP}, got {d}")
    joint = _joint_density(state, r)
    if spec.mode == "lu":
        u = permutation_operator(spec, state.dims)
        prepared = joint
    else:
        p = permutation_operator(spec, state.dims)
        pre = p.conj().T @ joint @ p
        if config.use_spa:
            prepared = spa_map(pre, spa_coefficients(n, r))
        else:
            prepared = lambda_map(pre, n, r)
        u = pairwise_swap(r, state.dims)
    eye = np.eye(d)
    zero = np.zeros((2, 2))
    zero[0, 0] = 1
    one = np.diag([0.0, 1.0])
    cu = np.kron(zero, eye) + np.kron(one, u)
    h = np.kron(_H, eye)
    ops = [h]
    if config.component == "imaginary":
        ops.append(np.kron(_S, eye))
    ops += [cu, h]
    full = np.kron(zero, prepared)
    for op in ops:
        full = op @ full @ op.conj().T
    z = np.kron(np.diag([1.0, -1.0]), eye)
    return float(np.trace(z @ full).real)


def network_expectation(state, config: NetworkConfig, method: str = "auto") -> float:
    """Exact ancilla expectation ``<Z>`` for ``state`` fed to the network.

    ``method`` is ``"structured"``, ``"circuit"`` or ``"auto"``; ``auto`` runs
    the structured path and cross-checks it against the circuit whenever the
    circuit is small enough.
    """
    _refuse_unnormalized(state)
    spec = config.spec
    if spec.n != state.n:
        raise ValueError(f"spec has {spec.n} parties, state has {state.n}")
    if spec.mode == "slocc" and any(d != 2 for d in state.dims):
        raise ValueError("SLOCC networks need qubit parties")
    if method == "structured":
        return structured_expectation(state, config)
    if method == "circuit":
        return circuit_expectation(state, config)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    val = structured_expectation(state, config)
    if int(np.prod(state.dims)) ** spec.r <= CIRCUIT_DIM_CAP:
        other = circuit_expectation(state, config)
        if abs(other - val) > AGREEMENT_TOL:
            raise ArithmeticError(f"structured ({val!r}) and circuit ({other!r}) paths disagree")
    return val


def sample_shots(F: float, shots: int, seed: int) -> int:
    """Number of ``Z = +1`` outcomes in ``shots`` runs.

    Shots are drawn in fixed batches of ``SHOT_BATCH`` with batch ``k`` seeded
    by ``(seed, k)``, so the total does not depend on how batches are scheduled.
    """
    if abs(F) > 1 + 1e-12:
        raise ValueError(f"|F| = {abs(F)!r} exceeds 1; upstream expectation is broken")
    if shots < 0:
        raise ValueError("shots must be >= 0")
    p = (1 + min(1.0, max(-1.0, F))) / 2
    total = 0
    for k, start in enumerate(range(0, shots, SHOT_BATCH)):
        total += int(make_rng(seed, k).binomial(min(SHOT_BATCH, shots - start), p))
    return total


def recover_modsq(z_hat: float, n: int, r: int) -> Recovered:
    """Invert the SPA offset: ``(2^(3nr/2) + 1) z - 2^(nr)``; negatives are flagged, not clamped."""
    big = 2 ** (3 * n * r // 2)
    val = (big + 1) * z_hat - 2 ** (n * r)
    return Recovered(float(val), bool(val < 0))
