"""Divisibility criteria for Pauli dynamics and their tensor products.

All criteria reduce to sign conditions on the generator rates:

* CP-divisibility: every rate nonnegative at all times,
* P-divisibility of one map: every pairwise rate sum nonnegative,
* P-divisibility of a product map: both factors P-divisible and the nine
  cross sums g_i^(1) + g_j^(2) nonnegative,

checked on a time grid, plus the exact large-time asymptotics for
mixture models (whose rates decay like e^{-2t}, so a plain grid minimum
goes blind near the CP boundary).  A necessary algebraic condition built
from conjugated Kossakowski matrices and a seeded Monte-Carlo sampler of
the positivity functional of the sum generator complete the toolbox.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._pauli import SIGMA
from .backend import kernels
from .dynamics import RateModel, rates_at
from .mixtures import rate_decay_coefficients, rate_limits

CP_DIVISIBLE = "CP_DIVISIBLE"
P_DIVISIBLE_ONLY = "P_DIVISIBLE_ONLY"
NOT_P_DIVISIBLE = "NOT_P_DIVISIBLE"
UNDETERMINED = "UNDETERMINED"

DEFAULT_TOL = 1e-9

_RATE_NAMES = ("g1", "g2", "g3")
_PAIR_IDX = tuple(combinations(range(3), 2))


def default_grid() -> np.ndarray:
    """400 log-spaced times on [1e-3, 20]."""
    return np.geomspace(1e-3, 20.0, 400)


def effective_rates(model: RateModel, ts) -> np.ndarray:
    """Generator rates including the overall coupling prefactor."""
    return model.coupling * rates_at(model, ts)


@dataclass(frozen=True)
class DivisibilityVerdict:
    """Outcome of a divisibility test.

    ``margin`` is the most negative criterion value found (or the
    smallest, when nothing is negative); ``witness_time`` is the first
    grid time of a determinate violation, ``math.inf`` when only the
    asymptotics violate, and None when there is no violation.
    """

    label: str
    margin: float
    witness_time: float | None = None
    witness_detail: str = ""

    @property
    def is_cp_divisible(self) -> bool:
        return self.label == CP_DIVISIBLE

    @property
    def is_p_divisible(self) -> bool:
        return self.label in (CP_DIVISIBLE, P_DIVISIBLE_ONLY)


def _status(margin: float, tol: float) -> str:
    # a margin of exactly zero is a determinate pass: the criteria are
    # closed inequalities and several paper cases sit exactly on zero
    if margin >= 0.0:
        return "pass"
    if margin > -tol:
        return "band"
    return "fail"


def _grid_margin(values: np.ndarray, grid: np.ndarray, tol: float, names) -> tuple:
    """Minimum, first-violation time and description for columns of criteria."""
    vmin = float(values.min())
    it, ik = np.unravel_index(int(np.argmin(values)), values.shape)
    detail = f"min {names[ik]} = {vmin:.6g} at t = {grid[it]:.6g}"
    viol = values.min(axis=1) <= -tol
    time = float(grid[int(np.argmax(viol))]) if viol.any() else None
    return vmin, time, detail


def _decided(limits: np.ndarray, coefficients: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Two-level asymptotic margins: exact limits first, decay coefficients on ties."""
    return np.where(np.abs(limits) > eps, limits, coefficients)


def _merge_asymptotic(grid_result: tuple, asym: np.ndarray | None, tol: float, names) -> tuple:
    margin, time, detail = grid_result
    if asym is None:
        return margin, time, detail
    k = int(np.argmin(asym))
    am = float(asym[k])
    if am < margin:
        detail = f"asymptotic margin {names[k]} = {am:.6g}"
        margin = am
    if time is None and am <= -tol:
        time = math.inf
    return margin, time, detail


def _asym_rates(model: RateModel) -> tuple[np.ndarray, np.ndarray] | None:
    """(limits, e^{-2t} coefficients) of the rates; mixtures only."""
    if model.kind != "mixture":
        return None
    p = np.asarray(model.weights)
    return rate_limits(p), rate_decay_coefficients(p)


def _pair_sums(values: np.ndarray) -> np.ndarray:
    return np.stack([values[..., i] + values[..., j] for i, j in _PAIR_IDX], axis=-1)


_PAIR_NAMES = tuple(f"{_RATE_NAMES[i]}+{_RATE_NAMES[j]}" for i, j in _PAIR_IDX)


def _analyze(model: RateModel, grid: np.ndarray, tol: float) -> dict:
    rates = effective_rates(model, grid)
    asym = _asym_rates(model)
    cp = _grid_margin(rates, grid, tol, _RATE_NAMES)
    pdiv = _grid_margin(_pair_sums(rates), grid, tol, _PAIR_NAMES)
    if asym is not None:
        limits, coefs = asym
        cp = _merge_asymptotic(cp, _decided(limits, coefs), tol, _RATE_NAMES)
        pdiv = _merge_asymptotic(
            pdiv, _decided(_pair_sums(limits), _pair_sums(coefs)), tol, _PAIR_NAMES
        )
    return {"rates": rates, "asym": asym, "cp": cp, "p": pdiv}


def _label(cp_status: str, p_status: str) -> str:
    if p_status == "fail":
        return NOT_P_DIVISIBLE
    if cp_status == "pass":
        return CP_DIVISIBLE
    if cp_status == "band" or p_status == "band":
        return UNDETERMINED
    return P_DIVISIBLE_ONLY


def cp_divisible(model: RateModel, grid=None, tol: float = DEFAULT_TOL) -> DivisibilityVerdict:
    """CP-divisibility verdict: all rates nonnegative on the grid.

    The margin reported is the smallest rate value encountered (grid or,
    for mixtures, asymptotic).
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    a = _analyze(model, grid, tol)
    m, t, det = a["cp"]
    label = _label(_status(m, tol), _status(a["p"][0], tol))
    return DivisibilityVerdict(label, m, t if label != CP_DIVISIBLE else None, det)


def p_divisible(model: RateModel, grid=None, tol: float = DEFAULT_TOL) -> DivisibilityVerdict:
    """P-divisibility verdict: all pairwise rate sums nonnegative on the grid."""
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    a = _analyze(model, grid, tol)
    m, t, det = a["p"]
    label = _label(_status(a["cp"][0], tol), _status(m, tol))
    return DivisibilityVerdict(label, m, t if not _is_p_label(label) else None, det)


def _is_p_label(label: str) -> bool:
    return label in (CP_DIVISIBLE, P_DIVISIBLE_ONLY)


def tensor_p_divisible(model1: RateModel, model2: RateModel, grid=None,
                       tol: float = DEFAULT_TOL) -> DivisibilityVerdict:
    """P-divisibility of the product map.

    Requires both factors P-divisible and all nine cross sums
    g_i^(1) + g_j^(2) nonnegative on the grid (plus asymptotics when both
    factors are mixtures).
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    a1 = _analyze(model1, grid, tol)
    a2 = _analyze(model2, grid, tol)

    cross_names = tuple(f"{_RATE_NAMES[i]}^(1)+{_RATE_NAMES[j]}^(2)"
                        for i in range(3) for j in range(3))
    cross = (a1["rates"][:, :, None] + a2["rates"][:, None, :]).reshape(len(grid), 9)
    cross_res = _grid_margin(cross, grid, tol, cross_names)
    if a1["asym"] is not None and a2["asym"] is not None:
        l1, c1 = a1["asym"]
        l2, c2 = a2["asym"]
        lims = (l1[:, None] + l2[None, :]).reshape(9)
        coefs = (c1[:, None] + c2[None, :]).reshape(9)
        cross_res = _merge_asymptotic(cross_res, _decided(lims, coefs), tol, cross_names)

    parts = [
        (a1["p"], "factor 1: "),
        (a2["p"], "factor 2: "),
        (cross_res, ""),
    ]
    margin = min(p[0][0] for p in parts)
    detail = min(parts, key=lambda p: p[0][0])
    detail = detail[1] + detail[0][2]
    times = [p[0][1] for p in parts if p[0][1] is not None]
    time = min(times) if times else None

    status = _status(margin, tol)
    if status == "fail":
        return DivisibilityVerdict(NOT_P_DIVISIBLE, margin, time, detail)
    if status == "band":
        return DivisibilityVerdict(UNDETERMINED, margin, time, detail)
    both_cp = _status(a1["cp"][0], tol) == "pass" and _status(a2["cp"][0], tol) == "pass"
    return DivisibilityVerdict(CP_DIVISIBLE if both_cp else P_DIVISIBLE_ONLY,
                               margin, None, detail)


# ---------------------------------------------------------------------------
# Conjugated Kossakowski matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConjugationSpec:
    """An invertible 2x2 matrix V and its action on the Pauli coefficient space.

    vcal satisfies V F_i V^{-1} = sum_j vcal[i, j] F_j for the normalized
    Pauli basis F_i = sigma_i / sqrt(2).
    """

    v: np.ndarray
    vcal: np.ndarray


def conjugation_matrix(v) -> ConjugationSpec:
    """Coefficient-space matrix of conjugation by an invertible V."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (2, 2):
        raise ValueError(f"V must be 2x2, got {v.shape}")
    det = v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]
    if abs(det) <= 1e-12:
        raise ValueError("V must be invertible (|det| > 1e-12)")
    vinv = np.array([[v[1, 1], -v[0, 1]], [-v[1, 0], v[0, 0]]], dtype=complex) / det
    conj = np.stack([v @ SIGMA[i] @ vinv for i in range(1, 4)])
    vcal = np.einsum("jba,iab->ij", SIGMA[1:], conj) / 2.0
    recon = np.einsum("ij,jab->iab", vcal, SIGMA[1:])
    if np.abs(recon - conj).max() > 1e-10:
        raise ValueError("conjugation matrix reconstruction failed beyond 1e-10")
    return ConjugationSpec(v=v, vcal=vcal)


def standard_conjugations() -> dict[str, ConjugationSpec]:
    """Identity plus the three unitaries (sigma_k + sigma_l) / sqrt(2)."""
    specs = {"identity": conjugation_matrix(np.eye(2))}
    for k, l in ((1, 2), (1, 3), (2, 3)):
        v = (SIGMA[k] + SIGMA[l]) / math.sqrt(2.0)
        specs[f"V{k}{l}"] = conjugation_matrix(v)
    return specs


def kossakowski_from_rates(rates) -> np.ndarray:
    """Diagonal Kossakowski matrix diag(g1, g2, g3) / 2 of a Pauli generator."""
    g = np.asarray(rates, dtype=float)
    if g.shape != (3,):
        raise ValueError(f"expected a rate triple, got shape {g.shape}")
    return np.diag(g / 2.0).astype(complex)


def necessary_tensor_condition(k1: np.ndarray, k2: np.ndarray,
                               spec: ConjugationSpec) -> float:
    """Smallest eigenvalue of K1 + Vcal^dag K2 Vcal.

    A value below -tol at some time certifies that the product map is
    not P-divisible there; nonnegativity for every invertible V is
    necessary for P-divisibility.
    """
    k1 = np.asarray(k1, dtype=complex)
    k2 = np.asarray(k2, dtype=complex)
    if k1.shape != k2.shape or k1.shape != spec.vcal.shape:
        raise ValueError("Kossakowski matrices and conjugation must share dimensions")
    m = k1 + spec.vcal.conj().T @ k2 @ spec.vcal
    return float(kernels.eigvalsh(m)[0])


def sufficient_condition_check(model1: RateModel, model2: RateModel,
                               i: int, j: int, grid=None,
                               tol: float = DEFAULT_TOL) -> bool:
    """Sufficient condition for product P-divisibility with one negative
    rate allowed per factor (rate i of the first, rate j of the second).

    Checks, over the grid: all other rates nonnegative, the sums of the
    candidate rate with the other rates of its own factor nonnegative,
    and the cross sums g_k^(1) + g_j^(2) and g_i^(1) + g_k^(2)
    nonnegative for every k.
    """
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError("rate indices must be in {1, 2, 3}")
    grid = default_grid() if grid is None else np.asarray(grid, dtype=float)
    a, b = i - 1, j - 1
    g1 = effective_rates(model1, grid)
    g2 = effective_rates(model2, grid)
    others1 = [k for k in range(3) if k != a]
    others2 = [k for k in range(3) if k != b]
    checks = [
        g1[:, others1],
        g2[:, others2],
        g1[:, others1] + g1[:, a:a + 1],
        g2[:, others2] + g2[:, b:b + 1],
        g1 + g2[:, b:b + 1],
        g1[:, a:a + 1] + g2,
    ]
    return bool(min(c.min() for c in checks) >= -tol)


def positivity_functional_sample(model1: RateModel, model2: RateModel, t: float,
                                 n_samples: int, seed: int) -> float:
    """Minimum of the sum-generator positivity functional over random pairs.

    Samples Haar-random orthonormal pairs (phi, psi) in C^4 and evaluates

        G_t = sum_k g_k^(1) |Tr(sigma_k Phi Psi^dag)|^2 / 2
            + sum_k g_k^(2) |Tr(sigma_k (Psi^dag Phi)^T)|^2 / 2,

    where Phi, Psi are the 2x2 matrices of vector components.  A negative
    minimum witnesses that the product intertwiners are not positive at
    time t.  Deterministic for a given seed.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal((n_samples, 4)) + 1j * rng.standard_normal((n_samples, 4))
    z2 = rng.standard_normal((n_samples, 4)) + 1j * rng.standard_normal((n_samples, 4))
    z1 /= np.linalg.norm(z1, axis=1, keepdims=True)
    z2 -= z1 * np.sum(z1.conj() * z2, axis=1, keepdims=True)
    z2 /= np.linalg.norm(z2, axis=1, keepdims=True)
    phi = z1.reshape(n_samples, 2, 2)
    psi = z2.reshape(n_samples, 2, 2)

    psi_dag = np.conj(np.transpose(psi, (0, 2, 1)))
    a = np.einsum("kab,nba->nk", SIGMA[1:], phi @ psi_dag)
    b = np.einsum("kab,nab->nk", SIGMA[1:], psi_dag @ phi)  # trace of sigma_k X^T
    g1 = effective_rates(model1, float(t))
    g2 = effective_rates(model2, float(t))
    g = 0.5 * (np.abs(a) ** 2 @ g1 + np.abs(b) ** 2 @ g2)
    return float(g.min())
