"""Permutation-indexed polynomial invariants.

A :class:`PermutationTuple` holds one permutation of the ``r`` copies per
party.  In LU mode it defines ``J``: ``r`` amplitude factors contracted
against ``r`` conjugate factors, party ``p`` of conjugate factor ``c``
carrying the index of amplitude factor ``perms[p][c]``.  In SLOCC mode it
defines ``K``: ``r`` amplitude factors where factor ``c`` places its party-p
index in slot ``perms[p][c]``, and slots ``(0, 1), (2, 3), ...`` of every
party are contracted with ``eps`` (``eps[0, 1] = 1``).

Values are the raw contractions.  Two catalog entries differ from the usual
literature normalization: ``slocc_quadratic`` evaluates to ``2 det(alpha)``
and ``three_tangle`` gives 1/2 on GHZ where the conventional 3-tangle is 1
(the conventional value is ``4 |K| / 2 = 2 |K|``).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .states import DensityMatrix, PureState

__all__ = [
    "EPS",
    "PermutationTuple",
    "InvariantValue",
    "InvariantError",
    "eval_lu_pure",
    "eval_lu_mixed",
    "eval_slocc_pure",
    "eval_slocc_modsq_mixed",
    "evaluate",
    "named_invariant",
    "catalog_names",
    "CATALOG_NOTES",
    "diagram_edges",
    "diagram",
    "spec_to_json",
    "spec_from_json",
]

EPS = np.array([[0, 1], [-1, 0]], dtype=np.complex128)

# np.einsum sublist labels must lie in [0, 52)
_MAX_LABELS = 52


class InvariantError(ValueError):
    pass


@dataclass(frozen=True)
class PermutationTuple:
    """Degree ``r`` and one 0-indexed one-line permutation per party."""

    r: int
    perms: tuple[tuple[int, ...], ...]
    mode: str = "lu"
    name: str | None = None

    def __post_init__(self):
        mode = self.mode.lower()
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "perms", tuple(tuple(int(x) for x in p) for p in self.perms))
        if mode not in ("lu", "slocc"):
            raise InvariantError(f"mode must be 'lu' or 'slocc', got {self.mode!r}")
        if self.r < 1:
            raise InvariantError("degree r must be >= 1")
        if not self.perms:
            raise InvariantError("need one permutation per party")
        for p in self.perms:
            if sorted(p) != list(range(self.r)):
                raise InvariantError(f"{[x + 1 for x in p]} is not a permutation of 1..{self.r}")
        if mode == "slocc" and self.r % 2:
            raise InvariantError("SLOCC invariants need an even degree r")

    @property
    def n(self) -> int:
        return len(self.perms)

    @classmethod
    def from_one_line(cls, perms: Sequence[Sequence[int]], mode: str = "lu", name=None):
        """Build from 1-indexed one-line notation, e.g. ``[[1, 2], [2, 1]]``."""
        perms = [tuple(int(x) - 1 for x in p) for p in perms]
        if not perms:
            raise InvariantError("need one permutation per party")
        r = len(perms[0])
        if any(len(p) != r for p in perms):
            raise InvariantError("all permutations must have the same degree")
        return cls(r, tuple(perms), mode, name)

    def one_line(self) -> list[list[int]]:
        return [[x + 1 for x in p] for p in self.perms]

    def canonical(self) -> "PermutationTuple":
        """Equivalent tuple whose first permutation is the identity.

        Reordering the product of factors by ``c -> perms[0][c]`` leaves the
        value unchanged and sends every permutation ``q`` to ``q o perms[0]^-1``.
        """
        first = self.perms[0]
        inv = [0] * self.r
        for c, s in enumerate(first):
            inv[s] = c
        perms = tuple(tuple(q[inv[c]] for c in range(self.r)) for q in self.perms)
        return PermutationTuple(self.r, perms, self.mode, self.name)


@dataclass(frozen=True)
class InvariantValue:
    value: complex | float
    r: int
    mode: str
    kind: str  # "J", "K" or "|K|^2"
    note: str | None = None

    def to_json(self) -> dict:
        v = self.value
        out = {"kind": self.kind, "mode": self.mode, "degree": self.r}
        if isinstance(v, complex) or np.iscomplexobj(v):
            out["value"] = float(np.real(v))
            out["imag"] = float(np.imag(v))
        else:
            out["value"] = float(v)
        if self.note:
            out["note"] = self.note
        return out


def _check(spec: PermutationTuple, dims, mode: str):
    if spec.mode != mode:
        raise InvariantError(f"expected a {mode.upper()} spec, got mode {spec.mode!r}")
    if spec.n != len(dims):
        raise InvariantError(f"spec has {spec.n} permutations but the state has {len(dims)} parties")
    if mode == "slocc" and any(d != 2 for d in dims):
        raise InvariantError(f"SLOCC invariants need qubit parties, got dims {tuple(dims)}")


def _contract(operands: list) -> complex:
    labels = {x for i in range(1, len(operands), 2) for x in operands[i]}
    if len(labels) > _MAX_LABELS:
        raise InvariantError(f"contraction needs {len(labels)} indices, more than {_MAX_LABELS}")
    return complex(np.einsum(*operands, [], optimize="greedy"))


def eval_lu_pure(psi: PureState, spec: PermutationTuple) -> complex:
    """``J`` on a pure state."""
    _check(spec, psi.dims, "lu")
    spec = spec.canonical()
    n, r = spec.n, spec.r
    label = [[p * r + c for c in range(r)] for p in range(n)]
    a = psi.amplitudes
    ops = []
    for c in range(r):
        ops += [a, [label[p][c] for p in range(n)]]
    ac = a.conj()
    for c in range(r):
        ops += [ac, [label[p][spec.perms[p][c]] for p in range(n)]]
    return _contract(ops)


def eval_lu_mixed(rho: DensityMatrix, spec: PermutationTuple) -> complex:
    """``J`` on a density matrix: factor ``c`` is ``rho[i_c, i_perm(c)]`` per party.

    No canonicalization here: each factor ties its upper and lower indices, so
    only simultaneous conjugation of the tuple preserves the value.
    """
    _check(spec, rho.dims, "lu")
    n, r = spec.n, spec.r
    t = rho.matrix.reshape(tuple(rho.dims) * 2)
    label = [[p * r + c for c in range(r)] for p in range(n)]
    ops = []
    for c in range(r):
        upper = [label[p][c] for p in range(n)]
        lower = [label[p][spec.perms[p][c]] for p in range(n)]
        ops += [t, upper + lower]
    return _contract(ops)


def eval_slocc_pure(psi: PureState, spec: PermutationTuple) -> complex:
    """Raw ``eps`` contraction ``K`` of the amplitudes (no conjugates)."""
    _check(spec, psi.dims, "slocc")
    spec = spec.canonical()
    n, r = spec.n, spec.r
    slot = [[p * r + s for s in range(r)] for p in range(n)]
    a = psi.amplitudes
    ops = []
    for c in range(r):
        ops += [a, [slot[p][spec.perms[p][c]] for p in range(n)]]
    for p in range(n):
        for s in range(0, r, 2):
            ops += [EPS, [slot[p][s], slot[p][s + 1]]]
    return _contract(ops)


def eval_slocc_modsq_mixed(rho: DensityMatrix, spec: PermutationTuple) -> float:
    """``|K|^2`` extended to density matrices by the double ``eps`` contraction."""
    _check(spec, rho.dims, "slocc")
    spec = spec.canonical()
    n, r = spec.n, spec.r
    t = rho.matrix.reshape(tuple(rho.dims) * 2)
    up = [[p * r + s for s in range(r)] for p in range(n)]
    lo = [[(n + p) * r + s for s in range(r)] for p in range(n)]
    ops = []
    for c in range(r):
        ops += [t, [up[p][spec.perms[p][c]] for p in range(n)] + [lo[p][spec.perms[p][c]] for p in range(n)]]
    for p in range(n):
        for s in range(0, r, 2):
            ops += [EPS, [up[p][s], up[p][s + 1]], EPS, [lo[p][s], lo[p][s + 1]]]
    val = _contract(ops)
    # Hermiticity of rho makes the contraction real; imaginary residue is round-off
    return float(val.real)


SLOCC_PURE_NOTE = "raw eps contraction; no multiplicity factor divided out"


def evaluate(state, spec: PermutationTuple) -> InvariantValue:
    """Dispatch on state type and spec mode."""
    if isinstance(state, PureState):
        if spec.mode == "lu":
            return InvariantValue(eval_lu_pure(state, spec), spec.r, "lu", "J")
        return InvariantValue(eval_slocc_pure(state, spec), spec.r, "slocc", "K", SLOCC_PURE_NOTE)
    if isinstance(state, DensityMatrix):
        if spec.mode == "lu":
            return InvariantValue(eval_lu_mixed(state, spec), spec.r, "lu", "J")
        return InvariantValue(eval_slocc_modsq_mixed(state, spec), spec.r, "slocc", "|K|^2")
    raise TypeError(f"cannot evaluate an invariant of {type(state).__name__}")


CATALOG_NOTES = {
    "norm": "J = <psi|psi>; equals Tr(rho) on mixed states.",
    "two_qubit_quartic": "J = Tr(rho_A^2) = 2(p^2 - p) + 1 on Schmidt states.",
    "slocc_quadratic": "K = 2 det(alpha); |K|^2 = Tr(rho tilde(rho)).",
    "three_tangle": "K = 1/2 on GHZ, 0 on W; conventional 3-tangle is 2|K|.",
    "moment": (
        "degree 2m, identity permutations: K = K_quadratic^m, so |K|^2 = Tr((rho tilde(rho))^m) "
        "on pure states; on mixed states the contraction gives Tr(rho tilde(rho))^m instead."
    ),
}

_IDENTITY2 = (0, 1)


def named_invariant(name: str, n: int | None = None) -> PermutationTuple:
    """Catalog lookup: ``norm``, ``two_qubit_quartic``, ``slocc_quadratic``,
    ``three_tangle`` and ``moment(m)`` for ``m = 1..4``.

    ``n`` sets the party count of ``norm``; the other entries have a fixed one.
    """
    key = name.strip().lower()
    if key == "norm":
        return PermutationTuple(1, ((0,),) * (n or 1), "lu", "norm")
    if key == "two_qubit_quartic":
        return PermutationTuple(2, (_IDENTITY2, (1, 0)), "lu", "two_qubit_quartic")
    if key == "slocc_quadratic":
        return PermutationTuple(2, (_IDENTITY2, _IDENTITY2), "slocc", "slocc_quadratic")
    if key == "three_tangle":
        # eps pairs copies {1,3},{2,4} on the first two qubits and {1,4},{2,3} on the third
        return PermutationTuple.from_one_line(
            [[1, 3, 2, 4], [1, 3, 2, 4], [1, 3, 4, 2]], "slocc", "three_tangle"
        )
    m = re.fullmatch(r"moment\s*\(\s*(\d+)\s*\)", key)
    if m:
        k = int(m.group(1))
        if not 1 <= k <= 4:
            raise InvariantError(f"moment order must be 1..4, got {k}")
        ident = tuple(range(2 * k))
        return PermutationTuple(2 * k, (ident, ident), "slocc", f"moment({k})")
    raise InvariantError(f"unknown invariant {name!r}")


def catalog_names() -> list[str]:
    return ["norm", "two_qubit_quartic", "slocc_quadratic", "three_tangle"] + [
        f"moment({m})" for m in range(1, 5)
    ]


def _party_name(p: int) -> str:
    return chr(ord("A") + p) if p < 26 else f"P{p + 1}"


def diagram_edges(spec: PermutationTuple) -> list[tuple[str, str, str, str]]:
    """Contraction edges as ``(party, node, node, kind)``.

    Nodes ``a1..ar`` are amplitude factors; ``c1..cr`` are the conjugate
    factors of an LU invariant.  For ``eps`` edges the first node carries the
    first ``eps`` index.
    """
    edges = []
    for p, perm in enumerate(spec.perms):
        party = _party_name(p)
        if spec.mode == "lu":
            for c in range(spec.r):
                edges.append((party, f"a{perm[c] + 1}", f"c{c + 1}", "delta"))
        else:
            owner = [0] * spec.r
            for c, s in enumerate(perm):
                owner[s] = c
            for s in range(0, spec.r, 2):
                edges.append((party, f"a{owner[s] + 1}", f"a{owner[s + 1] + 1}", "eps"))
    return edges


def diagram(spec: PermutationTuple) -> str:
    """DOT rendering of the contraction diagram."""
    title = spec.name or "invariant"
    lines = [f'graph "{title}" {{', f'  label="{title} ({spec.mode.upper()}, r={spec.r})";']
    for c in range(spec.r):
        lines.append(f'  a{c + 1} [label="alpha{c + 1}"];')
    if spec.mode == "lu":
        for c in range(spec.r):
            lines.append(f'  c{c + 1} [label="alpha*{c + 1}\'", style=dashed];')
    for party, u, v, kind in diagram_edges(spec):
        lines.append(f'  {u} -- {v} [label="{party}", kind="{kind}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def spec_to_json(spec: PermutationTuple) -> dict:
    return {"mode": spec.mode, "r": spec.r, "perms": spec.one_line()}


def spec_from_json(obj) -> PermutationTuple:
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        mode, r, perms = obj["mode"], int(obj["r"]), obj["perms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantError(f"invalid spec JSON: {exc}") from None
    spec = PermutationTuple.from_one_line(perms, mode)
    if spec.r != r:
        raise InvariantError(f"declared r={r} but permutations have degree {spec.r}")
    return spec
