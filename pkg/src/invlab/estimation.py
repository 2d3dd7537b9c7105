"""Estimators and copy budgets for the network and tomography protocols.

Budgets are first-order (large-sample) counts of state copies needed for the
variance of the estimate to reach ``epsilon``.  Formula functions accept
scalars or numpy arrays so Haar averages can be computed in bulk.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .invariants import PermutationTuple
from .network import NetworkConfig, network_expectation, recover_modsq, sample_shots, spa_coefficients
from .states import PAULI, DensityMatrix, PureState, bloch_decompose, density_from_pure, make_rng

__all__ = [
    "EstimationReport",
    "SampleBudget",
    "HaarComparison",
    "estimate_F",
    "copies_needed_lu",
    "copies_needed_slocc",
    "tomography_copies_lu",
    "tomography_copies_slocc",
    "simulate_tomography_lu",
    "simulate_network",
    "estimate_lu_complex",
    "haar_bloch_samples",
    "haar_average_ratio",
    "lu_budgets_on_b3",
    "lu_crossover",
    "CROSSOVER_EXACT",
]

CROSSOVER_EXACT = math.sqrt(3 / 5)


@dataclass
class EstimationReport:
    protocol: str
    estimate: float | None
    predicted_variance: float | None
    empirical_variance: float | None
    shots: int
    copies: int
    seed: int | None = None
    exact: float | None = None
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if v is not None}
        out["flags"] = list(self.flags)
        return out


@dataclass(frozen=True)
class SampleBudget:
    epsilon: float
    M_network: float
    N_tomography: float


@dataclass
class HaarComparison:
    comparison: str
    variant: str | None
    samples: int
    epsilon: float
    mean_tomography: float
    mean_network: float
    ratio: float
    stderr: float | None
    interval: tuple[float, float] | None
    best_network_ratio: float
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = asdict(self)
        out["interval"] = list(self.interval) if self.interval else None
        return out


def _positive_eps(epsilon):
    if np.any(np.asarray(epsilon) <= 0):
        raise ValueError("epsilon must be > 0")


def estimate_F(successes: int, shots: int) -> tuple[float, float]:
    """Unbiased ``F_hat = 2 N_s / N - 1`` and the plug-in variance ``(1 - F_hat^2) / N``."""
    if shots < 1:
        raise ValueError("need at least one shot")
    if not 0 <= successes <= shots:
        raise ValueError(f"successes {successes} outside [0, {shots}]")
    f = 2 * successes / shots - 1
    return f, (1 - f * f) / shots


def _scalar(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def copies_needed_lu(r, modJ_sq, epsilon, component_known: bool = True):
    """Network copies ``r/eps (1 - |J|^2)``, or ``r/eps (2 - |J|^2)`` when both parts are sampled."""
    _positive_eps(epsilon)
    j2 = np.asarray(modJ_sq, dtype=float)
    if np.any(j2 < -1e-12) or np.any(j2 > 1 + 1e-12):
        raise ValueError("|J|^2 must lie in [0, 1] for normalized states")
    base = 1.0 if component_known else 2.0
    return _scalar(r / epsilon * (base - j2))


def copies_needed_slocc(n, r, modK_sq, epsilon):
    """Network copies ``r/eps [(2^(3nr/2) + 1)^2 - (|K|^2 + 2^(nr))^2]`` including the SPA noise."""
    _positive_eps(epsilon)
    k2 = np.asarray(modK_sq, dtype=float)
    if np.any(k2 < -1e-10):
        raise ValueError("|K|^2 must be non-negative")
    big = 2.0 ** (1.5 * n * r)
    return _scalar(r / epsilon * ((big + 1) ** 2 - (k2 + 2.0 ** (n * r)) ** 2))


def tomography_copies_lu(b, epsilon):
    """Copies for ``J = (1 + |b|^2)/2`` from equal-count Pauli measurements on one half."""
    _positive_eps(epsilon)
    b = np.asarray(b, dtype=float)
    return _scalar(3 / epsilon * np.sum(b**2 * (1 - b**2), axis=-1))


def tomography_copies_slocc(a, b, R, epsilon, variant: str = "quadratic"):
    """Copies for the quadratic SLOCC invariant from all 15 Pauli coefficients.

    ``variant="literal"`` keeps the bare ``b_j`` factor in Bob's terms;
    ``"quadratic"`` uses ``b_j^2`` like every other term.
    """
    _positive_eps(epsilon)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    R = np.asarray(R, dtype=float)
    if variant == "quadratic":
        tb = b**2
    elif variant == "literal":
        tb = b
    else:
        raise ValueError(f"variant must be 'quadratic' or 'literal', got {variant!r}")
    local = np.sum(a**2 * (1 - a**2) + tb * (1 - b**2), axis=-1)
    corr = np.sum(R**2 * (1 - R**2), axis=(-2, -1))
    return _scalar(15 / (4 * epsilon) * (local + corr))


def _as_density(state) -> DensityMatrix:
    if isinstance(state, PureState):
        if state.unnormalized:
            raise ValueError("unnormalized states are refused by estimation")
        return density_from_pure(state)
    return state


def simulate_tomography_lu(rho, N: int, seed: int) -> EstimationReport:
    """Estimate ``J = Tr(rho_B^2)`` from ``N/3`` shots of each Pauli on Bob's qubit."""
    if N < 3 or N % 3:
        raise ValueError("N must be a positive multiple of 3")
    rho = _as_density(rho)
    bloch = bloch_decompose(rho)
    nj = N // 3
    b = np.clip(bloch.b, -1, 1)
    succ = np.array([make_rng(seed, j).binomial(nj, (1 + b[j]) / 2) for j in range(3)])
    b_hat = 2 * succ / nj - 1
    j_hat = 0.5 * (1 + np.sum(b_hat**2))
    predicted = float(np.sum(b**2 * (1 - b**2)) / nj)
    empirical = float(np.sum(b_hat**2 * (1 - b_hat**2)) / nj)
    flags = ["squared_estimator_bias"]
    if predicted == 0.0 or np.all(np.isclose(b**2 * (1 - b**2), 0.0, atol=1e-15)):
        flags.append("first_order_degenerate")
    return EstimationReport(
        "tomography", float(j_hat), predicted, empirical, N, N, seed,
        exact=float(0.5 * (1 + np.sum(b**2))), flags=flags,
    )


def simulate_network(state, config: NetworkConfig) -> EstimationReport:
    """Exact expectation, then ``config.shots`` Bernoulli shots, then the estimator.

    LU real runs estimate ``Re J``, LU imaginary runs ``Im J`` (the ancilla
    sees ``Re Tr(iP rho) = -Im J``).  SLOCC runs estimate ``|K|^2``, through the
    SPA inversion when ``use_spa`` is set.
    """
    spec = config.spec
    if isinstance(state, PureState) and state.unnormalized:
        raise ValueError("unnormalized states are refused by estimation")
    z = network_expectation(state, config)
    flags: list[str] = []
    sign = -1.0 if config.component == "imaginary" else 1.0
    spa = spec.mode == "slocc" and config.use_spa
    if spa:
        params = spa_coefficients(state.n, spec.r)
        scale = params.scale + 1.0
        exact = recover_modsq(z, state.n, spec.r).value
    else:
        scale = 1.0
        # + 0.0 turns a flipped zero into a plain 0.0
        exact = sign * z + 0.0
    if spec.mode == "slocc" and not config.use_spa:
        flags.append("ideal_lambda_unphysical")
    if config.shots == 0:
        return EstimationReport("network", None, None, None, 0, 0, config.seed, exact=float(exact), flags=flags)
    if config.seed is None:
        raise ValueError("sampling needs an explicit seed")
    succ = sample_shots(z, config.shots, config.seed)
    f_hat, var_hat = estimate_F(succ, config.shots)
    predicted = (1 - z * z) / config.shots
    if spa:
        rec = recover_modsq(f_hat, state.n, spec.r)
        est = rec.value
        if rec.below_zero:
            flags.append("below_zero")
    else:
        est = sign * f_hat + 0.0
    if abs(z) >= 1 - 1e-12:
        flags.append("first_order_degenerate")
    return EstimationReport(
        "network",
        float(est),
        float(scale**2 * predicted),
        float(scale**2 * var_hat),
        config.shots,
        spec.r * config.shots,
        config.seed,
        exact=float(exact),
        flags=flags,
    )


def estimate_lu_complex(state, spec: PermutationTuple, shots: int, seed: int) -> tuple[complex, EstimationReport]:
    """Estimate both parts of ``J`` with ``shots`` runs each (``2 r shots`` copies)."""
    re = simulate_network(state, NetworkConfig(spec, use_spa=False, component="real", shots=shots, seed=seed))
    im = simulate_network(
        state,
        NetworkConfig(spec, use_spa=False, component="imaginary", shots=shots, seed=int(make_rng(seed, 1).integers(2**63))),
    )
    value = complex(re.estimate, im.estimate)
    report = EstimationReport(
        "network",
        abs(value) ** 2,
        None,
        re.empirical_variance + im.empirical_variance,
        2 * shots,
        2 * spec.r * shots,
        seed,
        exact=abs(complex(re.exact, im.exact)) ** 2,
        flags=sorted(set(re.flags) | set(im.flags)),
    )
    return value, report


def haar_bloch_samples(samples: int, seed: int) -> dict[str, np.ndarray]:
    """Bloch data and invariants of Haar-random two-qubit pure states.

    Sample ``i`` is drawn from a generator seeded by ``(seed, i)`` so any
    prefix of the sequence is reproducible on its own.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    z = np.empty((samples, 4), dtype=np.complex128)
    for i in range(samples):
        g = make_rng(seed, i).standard_normal(8)
        z[i] = g[:4] + 1j * g[4:]
    z /= np.linalg.norm(z, axis=1)[:, None]
    eye = np.eye(2)
    a = np.stack([np.einsum("si,ij,sj->s", z.conj(), np.kron(s, eye), z).real for s in PAULI], 1)
    b = np.stack([np.einsum("si,ij,sj->s", z.conj(), np.kron(eye, s), z).real for s in PAULI], 1)
    R = np.stack(
        [np.stack([np.einsum("si,ij,sj->s", z.conj(), np.kron(s, t), z).real for t in PAULI], 1) for s in PAULI], 1
    )
    amp = z.reshape(samples, 2, 2)
    rho_a = amp @ amp.conj().transpose(0, 2, 1)
    J = np.einsum("sij,sji->s", rho_a, rho_a).real
    det = amp[:, 0, 0] * amp[:, 1, 1] - amp[:, 0, 1] * amp[:, 1, 0]
    # raw quadratic contraction is 2 det(alpha)
    K2 = np.abs(2 * det) ** 2
    return {"a": a, "b": b, "R": R, "J": J, "K2": K2}


def _ratio_stats(num: np.ndarray, den: np.ndarray):
    """Ratio of means with a delta-method standard error."""
    n = len(num)
    mx, my = num.mean(), den.mean()
    ratio = mx / my
    if n < 2:
        return ratio, None, None
    cov = np.cov(num, den)
    rel = cov[0, 0] / mx**2 + cov[1, 1] / my**2 - 2 * cov[0, 1] / (mx * my)
    se = abs(ratio) * math.sqrt(max(rel, 0.0) / n)
    return ratio, se, (ratio - 1.96 * se, ratio + 1.96 * se)


def haar_average_ratio(
    comparison: str, samples: int, epsilon: float = 1.0, seed: int = 0, variant: str = "quadratic"
) -> HaarComparison:
    """Haar-averaged copy budgets of the two protocols.

    ``lu``: mean tomography copies over mean network copies (quartic invariant,
    ``r = 2``, component known).  ``slocc``: mean network copies over mean
    tomography copies (quadratic invariant, ``n = r = 2``).
    """
    _positive_eps(epsilon)
    data = haar_bloch_samples(samples, seed)
    flags: list[str] = []
    if comparison == "lu":
        tomo = tomography_copies_lu(data["b"], epsilon)
        net = copies_needed_lu(2, data["J"] ** 2, epsilon, True)
        ratio, se, ci = _ratio_stats(tomo, net)
        best = float(np.max(tomo / net))
        variant = None
    elif comparison == "slocc":
        tomo = tomography_copies_slocc(data["a"], data["b"], data["R"], epsilon, variant)
        net = copies_needed_slocc(2, 2, data["K2"], epsilon)
        ratio, se, ci = _ratio_stats(net, tomo)
        pos = tomo > 0
        # states with a zero or negative tomography budget have no finite ratio
        best = float(np.min(net[pos] / tomo[pos])) if pos.any() else math.inf
        if not pos.all():
            flags.append("nonpositive_tomography_budget")
    else:
        raise ValueError(f"comparison must be 'lu' or 'slocc', got {comparison!r}")
    if ci is None:
        flags.append("interval_undefined")
    return HaarComparison(
        comparison, variant, samples, float(epsilon), float(tomo.mean()), float(net.mean()),
        float(ratio), se, ci, best, flags,
    )


def lu_budgets_on_b3(b3, epsilon: float = 1.0) -> SampleBudget:
    """Both LU budgets on the family ``b = (0, 0, b3)`` of pure states (``J = (1 + b3^2)/2``)."""
    J = 0.5 * (1 + b3**2)
    return SampleBudget(
        epsilon,
        float(copies_needed_lu(2, J**2, epsilon, True)),
        float(tomography_copies_lu([0.0, 0.0, b3], epsilon)),
    )


def lu_crossover(b3_range: tuple[float, float] = (0.5, 0.9), epsilon: float = 1.0, tol: float = 1e-13) -> float:
    """Bisect ``N_tomography(b3) - M_network(b3)`` for the boundary inside ``b3_range``."""

    def gap(x):
        bud = lu_budgets_on_b3(x, epsilon)
        return bud.N_tomography - bud.M_network

    lo, hi = map(float, b3_range)
    glo, ghi = gap(lo), gap(hi)
    if glo * ghi > 0:
        raise ValueError(f"no sign change of the budget gap on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = gap(mid)
        if gm == 0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)
