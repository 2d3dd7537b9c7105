"""Multi-party pure and mixed states.

Amplitudes are stored as a tensor with one axis per party, so
``psi.amplitudes[i, j, k]`` is the coefficient of ``|ijk>``.  Density
matrices are stored flat (``prod(dims)`` square) with the convention
``rho[upper, lower] = <upper|rho|lower>``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np

from .tensor import kron, partial_trace

__all__ = [
    "PAULI",
    "SIGMA_Y",
    "PureState",
    "DensityMatrix",
    "BlochDecomposition",
    "make_pure",
    "make_density",
    "density_from_pure",
    "named_state",
    "parse_named_state",
    "make_rng",
    "haar_random_pure",
    "haar_random_unitary",
    "random_sl2",
    "random_mixed",
    "bloch_decompose",
    "bloch_reconstruct",
    "tilde",
    "state_to_json",
    "state_from_json",
    "StateError",
]

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)
_I2 = np.eye(2, dtype=np.complex128)


class StateError(ValueError):
    """Raised when a state fails validation."""


@dataclass(frozen=True)
class PureState:
    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)
    unnormalized: bool = False

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))


@dataclass(frozen=True)
class BlochDecomposition:
    """Pauli coefficients of a two-qubit density matrix.

    ``a[j] = Tr(rho s_j x I)``, ``b[j] = Tr(rho I x s_j)`` and
    ``R[j, k] = Tr(rho s_j x s_k)`` with ``s = (X, Y, Z)``.
    """

    a: np.ndarray
    b: np.ndarray
    R: np.ndarray


def _check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise StateError(f"dims must be a non-empty list of positive integers, got {dims}")
    return dims


def make_pure(amplitudes, dims, unnormalized: bool = False) -> PureState:
    """Validate amplitudes into a :class:`PureState`.

    Amplitudes may be given flat (row-major, first party most significant) or
    already shaped as ``dims``.  Unless ``unnormalized`` is set the norm must
    be 1 within ``1e-10``.
    """
    dims = _check_dims(dims)
    amps = np.asarray(amplitudes, dtype=np.complex128)
    if amps.size != int(np.prod(dims)):
        raise StateError(f"{amps.size} amplitudes do not fit dims {dims}")
    amps = amps.reshape(dims).copy()
    amps.setflags(write=False)
    if not unnormalized:
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"state norm is {norm:.12g}, expected 1 (pass unnormalized=True to allow)")
    return PureState(dims, amps, unnormalized)


def make_density(matrix, dims, check: bool = True) -> DensityMatrix:
    """Validate a matrix into a :class:`DensityMatrix`.

    Checks Hermiticity and unit trace to 1e-10 and the smallest eigenvalue
    against -1e-8.
    """
    dims = _check_dims(dims)
    m = np.asarray(matrix, dtype=np.complex128)
    d = int(np.prod(dims))
    if m.size != d * d:
        raise StateError(f"matrix with {m.size} entries does not fit dims {dims}")
    m = m.reshape(d, d).copy()
    if check:
        herm = np.abs(m - m.conj().T).max()
        if herm > HERMITIAN_TOL:
            raise StateError(f"matrix is not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(m)
        if abs(tr - 1) > TRACE_TOL:
            raise StateError(f"trace is {tr.real:.12g}, expected 1")
        lmin = np.linalg.eigvalsh((m + m.conj().T) / 2).min()
        if lmin < POSITIVITY_TOL:
            raise StateError(f"matrix has negative eigenvalue {lmin:.3g}")
    m.setflags(write=False)
    return DensityMatrix(dims, m)


def density_from_pure(psi: PureState) -> DensityMatrix:
    v = psi.vector()
    return DensityMatrix(psi.dims, np.outer(v, v.conj()))


def _basis_state(dims, index) -> np.ndarray:
    amps = np.zeros(dims, dtype=np.complex128)
    amps[tuple(index)] = 1.0
    return amps


def named_state(name: str, **params) -> PureState:
    """Standard states.

    ``product`` (``|0...0>``, parameter ``n``, default 2), ``bell``
    (``(|00> + |11>)/sqrt 2``), ``schmidt`` (``sqrt(p)|00> + sqrt(1-p)|11>``
    with ``1/2 <= p <= 1``), ``ghz`` and ``w`` (parameter ``n``, default 3).
    """
    name = name.lower()
    if name == "product":
        n = int(params.get("n", 2))
        return make_pure(_basis_state((2,) * n, (0,) * n), (2,) * n)
    if name == "bell":
        return named_state("schmidt", p=0.5)
    if name == "schmidt":
        if "p" not in params:
            raise StateError("schmidt state needs parameter p")
        p = float(params["p"])
        if not 0.5 <= p <= 1.0:
            raise StateError(f"schmidt parameter p={p} outside [1/2, 1]")
        return make_pure([np.sqrt(p), 0, 0, np.sqrt(1 - p)], (2, 2))
    if name == "ghz":
        n = int(params.get("n", 3))
        if n < 2:
            raise StateError("ghz needs n >= 2")
        amps = np.zeros((2,) * n, dtype=np.complex128)
        amps[(0,) * n] = amps[(1,) * n] = 1 / np.sqrt(2)
        return make_pure(amps, (2,) * n)
    if name == "w":
        n = int(params.get("n", 3))
        if n < 2:
            raise StateError("w needs n >= 2")
        amps = np.zeros((2,) * n, dtype=np.complex128)
        for k in range(n):
            idx = [0] * n
            idx[k] = 1
            amps[tuple(idx)] = 1 / np.sqrt(n)
        return make_pure(amps, (2,) * n)
    raise StateError(f"unknown state name {name!r}")


_CALL_RE = re.compile(r"^\s*([A-Za-z_]+)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def parse_named_state(text: str) -> PureState:
    """Parse ``"ghz(4)"``, ``"schmidt(0.75)"``, ``"bell"`` and friends."""
    m = _CALL_RE.match(text)
    if not m:
        raise StateError(f"cannot parse state name {text!r}")
    name, arg = m.group(1).lower(), m.group(2)
    if not arg:
        return named_state(name)
    key = "p" if name == "schmidt" else "n"
    return named_state(name, **{key: float(arg) if key == "p" else int(arg)})


def make_rng(seed: int, *counter: int) -> np.random.Generator:
    """Generator fully determined by a master seed and an optional counter path."""
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(c) for c in counter]
    return np.random.default_rng(np.random.SeedSequence(words))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(seed)


def haar_random_pure(dims, seed) -> PureState:
    """Haar-distributed pure state: a normalized complex Gaussian vector."""
    dims = _check_dims(dims)
    rng = _rng(seed)
    d = int(np.prod(dims))
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return make_pure(z / np.linalg.norm(z), dims)


def haar_random_unitary(d: int, seed) -> np.ndarray:
    """Haar unitary from QR of a Ginibre matrix, with the R-diagonal phases divided out."""
    if int(d) < 1:
        raise ValueError("d must be >= 1")
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_sl2(seed) -> np.ndarray:
    """Random complex 2x2 matrix rescaled to unit determinant."""
    rng = _rng(seed)
    while True:
        m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        det = np.linalg.det(m)
        if abs(det) >= 1e-6:
            return m / np.sqrt(det)


def random_mixed(dims, seed, env_dims=None) -> DensityMatrix:
    """Reduced state of a Haar-random pure state on ``dims + env_dims``.

    The environment defaults to a copy of the system, which gives the
    Hilbert-Schmidt ensemble.
    """
    dims = _check_dims(dims)
    env = dims if env_dims is None else _check_dims(env_dims)
    psi = haar_random_pure(dims + env, seed)
    rho = partial_trace(np.outer(psi.vector(), psi.vector().conj()), dims + env, range(len(dims)))
    rho = (rho + rho.conj().T) / 2
    return make_density(rho, dims)


def bloch_decompose(rho: DensityMatrix) -> BlochDecomposition:
    if tuple(rho.dims) != (2, 2):
        raise StateError(f"Bloch decomposition needs dims (2, 2), got {rho.dims}")
    m = rho.matrix
    a = np.array([np.trace(m @ np.kron(s, _I2)).real for s in PAULI])
    b = np.array([np.trace(m @ np.kron(_I2, s)).real for s in PAULI])
    R = np.array([[np.trace(m @ np.kron(s, t)).real for t in PAULI] for s in PAULI])
    return BlochDecomposition(a, b, R)


def bloch_reconstruct(bd: BlochDecomposition) -> DensityMatrix:
    m = np.kron(_I2, _I2).astype(np.complex128)
    for j, s in enumerate(PAULI):
        m = m + bd.a[j] * np.kron(s, _I2) + bd.b[j] * np.kron(_I2, s)
        for k, t in enumerate(PAULI):
            m = m + bd.R[j, k] * np.kron(s, t)
    return DensityMatrix((2, 2), m / 4)


def tilde(rho: DensityMatrix) -> DensityMatrix:
    """Spin flip ``Y^{x n} rho^T Y^{x n}`` of an n-qubit state."""
    if any(d != 2 for d in rho.dims):
        raise StateError(f"tilde is defined for qubits only, got dims {rho.dims}")
    y = kron([SIGMA_Y] * rho.n)
    return DensityMatrix(rho.dims, y @ rho.matrix.T @ y)


def _pairs(arr) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(arr).reshape(-1)]


def state_to_json(state) -> dict:
    if isinstance(state, PureState):
        return {"dims": list(state.dims), "type": "pure", "amplitudes": _pairs(state.amplitudes)}
    if isinstance(state, DensityMatrix):
        return {"dims": list(state.dims), "type": "mixed", "matrix": _pairs(state.matrix)}
    raise TypeError(f"cannot serialize {type(state).__name__}")


def state_from_json(obj) -> PureState | DensityMatrix:
    """Inverse of :func:`state_to_json`; accepts a dict or a JSON string."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        dims = obj["dims"]
        kind = obj["type"]
    except (KeyError, TypeError) as exc:
        raise StateError(f"state JSON missing field: {exc}") from None
    key = {"pure": "amplitudes", "mixed": "matrix"}.get(kind)
    if key is None:
        raise StateError(f"state type must be 'pure' or 'mixed', got {kind!r}")
    if key not in obj:
        raise StateError(f"{kind} state JSON needs field {key!r}")
    try:
        flat = np.array([complex(re_, im_) for re_, im_ in obj[key]], dtype=np.complex128)
    except (TypeError, ValueError):
        raise StateError(f"field {key!r} must be a list of [re, im] pairs") from None
    if kind == "pure":
        return make_pure(flat, dims)
    return make_density(flat, dims)
