"""Convex mixtures of the three pure dephasing semigroups.

Closed-form channel eigenvalues and generator rates for weights
p = (p1, p2, p3), their large-time asymptotics, the inequalities cutting
out the CP-divisible region of the weight simplex, the bisector and
general tensor-product conditions, divisibility-diagram grids, and the
numerator polynomials (in e^{2t}) used for Descartes sign counting.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

WEIGHT_TOL = 1e-12

# boundary of the CP region along the bisector p1 = p2
P_STAR = 0.5 * (3.0 - math.sqrt(5.0))

LABEL_CP = "CP"
LABEL_P_ONLY = "P_ONLY"
LABEL_N2 = "N2"
LABEL_P2_TENSOR = "P2_TENSOR"
LABEL_BOUNDARY = "BOUNDARY"

# sign pattern mapping the auxiliary functions mu_k onto the rates
_RATE_SIGNS = np.array([[1.0, -1.0, -1.0],
                        [-1.0, 1.0, -1.0],
                        [-1.0, -1.0, 1.0]])


class BoundaryWeightsError(ValueError):
    """Raised when an interior-only formula is queried on boundary weights.

    Weights with some p_k = 0 have a rate that stays negative for all
    t > 0 (the eternally non-Markovian family); classify those directly
    instead of through the asymptotic coefficients.
    """


def validate_weights(p, tol: float = WEIGHT_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError(f"weights must be a triple, got shape {p.shape}")
    if p.min() < -tol:
        raise ValueError(f"weights must be nonnegative, got {p}")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"weights must sum to 1, got sum {p.sum()!r}")
    return np.clip(p, 0.0, None)


def mixture_eigenvalues(p, t) -> np.ndarray:
    """Channel eigenvalues (1, l1, l2, l3) with l_k = p_k + e^{-2t}(1 - p_k)."""
    p = validate_weights(p)
    ts = np.asarray(t, dtype=float)
    scalar = ts.ndim == 0
    ts = np.atleast_1d(ts)
    if np.any(ts < 0):
        raise ValueError("times must be nonnegative")
    lam = np.empty(ts.shape + (4,))
    lam[..., 0] = 1.0
    lam[..., 1:] = p + np.exp(-2.0 * ts)[..., None] * (1.0 - p)
    return lam[0] if scalar else lam


def mixture_rates(p, t) -> np.ndarray:
    """Generator rates (g1, g2, g3) of the mixed dephasing dynamics."""
    p = validate_weights(p)
    ts = np.asarray(t, dtype=float)
    scalar = ts.ndim == 0
    flat = np.atleast_1d(ts).reshape(-1)
    if np.any(flat < 0):
        raise ValueError("times must be nonnegative")
    out = _rates_for_weight_batch(p[None, :], flat)[:, 0, :]
    return out[0] if scalar else out.reshape(ts.shape + (3,))


def _rates_for_weight_batch(P: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Rates for a batch of weight triples P (N, 3) at times ts (T,) -> (T, N, 3)."""
    em = np.expm1(2.0 * ts)[:, None, None]
    mu = -(1.0 - P[None, :, :]) / (1.0 + P[None, :, :] * em)
    return mu @ _RATE_SIGNS.T


def rate_limits(p) -> np.ndarray:
    """Exact t -> infinity limits of the three rates.

    Zero for interior weights; boundary weights give the pattern built
    from mu_k(inf) = -1 where p_k = 0 and 0 otherwise.
    """
    p = validate_weights(p)
    mu_inf = np.where(p == 0.0, -1.0, 0.0)
    return _RATE_SIGNS @ mu_inf


def rate_decay_coefficients(p) -> np.ndarray:
    """Coefficients A_k of the e^{-2t} term of g_k(t) - g_k(inf).

    For interior weights g_k(t) ~ e^{-2t} A_k, so the signs of A decide
    which rates eventually turn negative.
    """
    p = validate_weights(p)
    m = np.where(p == 0.0, 0.0, -np.divide(1.0 - p, p, where=p > 0.0, out=np.zeros(3)))
    return _RATE_SIGNS @ m


def asymptotic_rate_coefficients(p) -> np.ndarray:
    """Coefficients (a1, a2, a3) with g_k(t) ~ e^{-2t} a_k / (p1 p2 p3).

    Only defined for interior weights (p1 p2 p3 > 0); boundary weights
    raise :class:`BoundaryWeightsError`.
    """
    p = validate_weights(p)
    prod = float(p.prod())
    if prod <= 0.0:
        raise BoundaryWeightsError(
            "asymptotic coefficients need interior weights; a vanishing p_k "
            "means g_k(t) < 0 for all t > 0 (eternally non-Markovian case)"
        )
    return rate_decay_coefficients(p) * prod


def _cp_margins(p1, p2):
    """The three CP-region inequality margins as functions of (p1, p2)."""
    m1 = p1 * p2 * (p1 + p2) + p2 ** 2 - p1 ** 2 + p1 - p2
    m2 = p2 * p1 * (p1 + p2) + p1 ** 2 - p2 ** 2 + p2 - p1
    m3 = (1.0 + p1 * p2) * (p1 + p2) - p1 ** 2 - p2 ** 2 - 4.0 * p1 * p2
    return np.stack(np.broadcast_arrays(m1, m2, m3), axis=-1)


def cp_region_test(p, tol: float = 0.0) -> tuple[bool, np.ndarray]:
    """Whether the weights give a CP-divisible mixture, with the three margins.

    The margins are polynomial in (p1, p2) (with p3 eliminated); they have
    the same signs as the asymptotic rate coefficients.
    """
    p = validate_weights(p)
    margins = _cp_margins(p[0], p[1])
    return bool(margins.min() >= -tol), margins


def _bisector_margins(p, q):
    """Margins of the two bisector tensor-product inequalities at (p, q)."""
    m_a = q * (1.0 - 2.0 * q) + p * (1.0 - 6.0 * q + 7.0 * q ** 2) \
        - p ** 2 * (2.0 - 7.0 * q + 4.0 * q ** 2)
    m_b = 1.0 - 2.0 * q - p * (3.0 - 7.0 * q) + p ** 2 * (1.0 - 4.0 * q)
    return np.stack(np.broadcast_arrays(m_a, m_b), axis=-1)


def _check_bisector_domain(p: float, q: float, tol: float = 1e-12) -> None:
    if not (P_STAR - tol < p <= 0.5 + tol):
        raise ValueError(f"p must lie in (p*, 1/2], got {p}")
    if not (-tol <= q <= P_STAR + tol):
        raise ValueError(f"q must lie in [0, p*], got {q}")


def bisector_tensor_test(p: float, q: float, tol: float = 0.0) -> tuple[bool, np.ndarray]:
    """Tensor P-divisibility test along the bisector.

    The first map has weights (p, p, 1-2p) outside the CP region, the
    second (q, q, 1-2q) inside; returns whether both inequality margins
    are >= -tol, plus the margins.
    """
    _check_bisector_domain(p, q)
    margins = _bisector_margins(float(p), float(q))
    return bool(margins.min() >= -tol), margins


def _asymptotic_sum_margins(P: np.ndarray, Q: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Deciding margins of g3^p(inf) + g_k^q(inf) for weight batches (N, 3).

    Compares exact limits first; when those cancel, the e^{-2t}
    coefficients decide.
    """
    CP_ = np.stack([rate_limits(pi) for pi in P])
    AP_ = np.stack([rate_decay_coefficients(pi) for pi in P])
    CQ_ = np.stack([rate_limits(qi) for qi in Q])
    AQ_ = np.stack([rate_decay_coefficients(qi) for qi in Q])
    lim = CP_[:, 2:3] + CQ_
    coef = AP_[:, 2:3] + AQ_
    return np.where(np.abs(lim) > eps, lim, coef)


def tensor_region_test(p, q, t, tol: float = 0.0) -> tuple[bool, np.ndarray]:
    """Membership test for the only-P-divisible tensor region at fixed p.

    Checks g3^p(t) + g_k^q(t) >= -tol for k = 1, 2, 3 at the given time;
    pass t = inf for the asymptotic version.  The first weights must lie
    outside the CP region (that is where the region is defined).
    """
    p = validate_weights(p)
    q = validate_weights(q)
    cp_ok, _ = cp_region_test(p)
    if cp_ok:
        raise ValueError("first weights lie in the CP region; "
                         "the tensor region is defined for p outside it")
    if np.isinf(t):
        margins = _asymptotic_sum_margins(p[None, :], q[None, :])[0]
    else:
        gp = mixture_rates(p, float(t))
        gq = mixture_rates(q, float(t))
        margins = gp[2] + gq
    return bool(margins.min() >= -tol), margins


@dataclass(frozen=True, eq=False)
class DiagramGrid:
    """Labeled cells of a divisibility diagram."""

    mode: str
    resolution: int
    coords: np.ndarray   # (N, 2) cell centers
    labels: np.ndarray   # (N,) strings
    margins: np.ndarray  # (N,) deciding margin per cell
    params: dict


def _label_from_margin(margins, pass_label, fail_label, boundary_tol):
    m = np.min(margins, axis=-1)
    labels = np.where(m >= 0.0, pass_label, fail_label)
    labels = np.where(np.abs(m) < boundary_tol, LABEL_BOUNDARY, labels)
    return labels, m


def _centers(resolution: int) -> np.ndarray:
    return (np.arange(resolution) + 0.5) / resolution


def diagram(mode: str, resolution: int, p=None, t=None,
            boundary_tol: float = 1e-9, workers: int | None = None) -> DiagramGrid:
    """Divisibility-diagram grid in one of three modes.

    fig1: (p1, p2) simplex cells labeled CP / P_ONLY.
    fig2: bisector (p, q) cells labeled P2_TENSOR / N2.
    fig3: q-simplex cells at fixed weights ``p`` and time ``t`` (finite or
          inf) labeled P2_TENSOR / N2 inside the CP region, P_ONLY outside.

    Cells are evaluated at their centers; cells whose deciding margin is
    within ``boundary_tol`` of zero are labeled BOUNDARY.  Identical
    inputs produce identical grids regardless of ``workers``.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")

    if mode == "fig1":
        u = _centers(resolution)
        p1, p2 = np.meshgrid(u, u, indexing="ij")
        p1, p2 = p1.ravel(), p2.ravel()
        keep = p1 + p2 <= 1.0
        p1, p2 = p1[keep], p2[keep]
        labels, m = _label_from_margin(_cp_margins(p1, p2),
                                       LABEL_CP, LABEL_P_ONLY, boundary_tol)
        coords = np.column_stack([p1, p2])
        return DiagramGrid("fig1", resolution, coords, labels, m, {})

    if mode == "fig2":
        pv = P_STAR + _centers(resolution) * (0.5 - P_STAR)
        qv = _centers(resolution) * P_STAR
        P, Q = np.meshgrid(pv, qv, indexing="ij")
        P, Q = P.ravel(), Q.ravel()
        labels, m = _label_from_margin(_bisector_margins(P, Q),
                                       LABEL_P2_TENSOR, LABEL_N2, boundary_tol)
        coords = np.column_stack([P, Q])
        return DiagramGrid("fig2", resolution, coords, labels, m, {})

    if mode == "fig3":
        if p is None or t is None:
            raise ValueError("fig3 needs fixed weights p and a time t (or inf)")
        p = validate_weights(p)
        cp_ok, _ = cp_region_test(p)
        if cp_ok:
            raise ValueError("fig3 weights must lie outside the CP region")
        u = _centers(resolution)
        q1, q2 = np.meshgrid(u, u, indexing="ij")
        q1, q2 = q1.ravel(), q2.ravel()
        keep = q1 + q2 <= 1.0
        q1, q2 = q1[keep], q2[keep]
        coords = np.column_stack([q1, q2])
        labels, margins = _fig3_cells(p, float(t) if not isinstance(t, str) else t,
                                      coords, boundary_tol, workers)
        return DiagramGrid("fig3", resolution, coords, labels, margins,
                           {"p": tuple(p), "t": float(t)})

    raise ValueError(f"unknown diagram mode {mode!r}")


def _fig3_block(p, t, Q3, cp_m):
    """Labels and margins for one block of fig3 cells (Q3: (N, 3) weights)."""
    n = Q3.shape[0]
    labels = np.empty(n, dtype="U9")
    cp_min = cp_m.min(axis=-1)
    in_cp = cp_min >= 0.0
    if np.isinf(t):
        sums = _asymptotic_sum_margins(np.repeat(p[None, :], n, axis=0), Q3)
    else:
        gp = mixture_rates(p, t)
        gq = _rates_for_weight_batch(Q3, np.atleast_1d(t))[0]
        sums = gp[2] + gq
    tens, m = _label_from_margin(sums, LABEL_P2_TENSOR, LABEL_N2, 1e-9)
    labels[:] = tens
    margins = m.copy()
    labels[~in_cp] = LABEL_P_ONLY
    margins[~in_cp] = cp_min[~in_cp]
    near = np.abs(cp_min) < 1e-9
    labels[near] = LABEL_BOUNDARY
    margins[near] = cp_min[near]
    return labels, margins


def _fig3_cells(p, t, coords, boundary_tol, workers):
    Q3 = np.column_stack([coords, 1.0 - coords.sum(axis=1)])
    Q3[:, 2] = np.clip(Q3[:, 2], 0.0, None)
    cp_m = _cp_margins(Q3[:, 0], Q3[:, 1])
    if workers is None or workers <= 1:
        return _fig3_block(p, t, Q3, cp_m)
    blocks = np.array_split(np.arange(Q3.shape[0]), workers * 4)
    labels = np.empty(Q3.shape[0], dtype="U9")
    margins = np.empty(Q3.shape[0])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = [(idx, pool.submit(_fig3_block, p, t, Q3[idx], cp_m[idx]))
                for idx in blocks if idx.size]
        for idx, fut in futs:
            lab, mar = fut.result()
            labels[idx] = lab
            margins[idx] = mar
    return labels, margins


def numerator_alpha(p) -> np.ndarray:
    """Coefficients (a30, a31, a32) of the rate-g3 numerator in powers of e^{2t}.

    g3(t) equals (a30 + a31 e^{2t} + a32 e^{4t}) divided by
    prod_k (1 + p_k (e^{2t} - 1)); the first two coefficients are
    nonnegative on the whole simplex, so the sign of a32 is what decides
    whether g3 turns negative.
    """
    p = validate_weights(p)
    p1, p2, p3 = p
    a2 = (-p1 ** 2 * p2 - p1 * p2 ** 2 + p1 ** 2 * p3 + p2 ** 2 * p3
          + p1 * p3 ** 2 + p2 * p3 ** 2)
    a1 = 2.0 * p3 * (1.0 - p2) * (1.0 - p1)
    a0 = (1.0 - p1) * (1.0 - p2) * (1.0 - p3)
    return np.array([a0, a1, a2])


def numerator_beta(p: float, q: float, k: int) -> np.ndarray:
    """Numerator coefficients of g3^p + g_k^q on the bisector, ascending powers.

    Weights are (p, p, 1-2p) and (q, q, 1-2q).  k = 3 gives the four
    coefficients of a cubic in e^{2t}; k = 1 or 2 give the three
    coefficients of a quadratic.
    """
    _check_bisector_domain(p, q)
    p = float(p)
    q = float(q)
    if k == 3:
        b3 = 2.0 * (q * (1.0 - 2.0 * q) + p * (1.0 - 6.0 * q + 7.0 * q ** 2)
                    - p ** 2 * (2.0 - 7.0 * q + 4.0 * q ** 2))
        b2 = 2.0 * (2.0 - 6.0 * q + 5.0 * q ** 2
                    - 2.0 * p * (3.0 - 10.0 * q + 9.0 * q ** 2)
                    + p ** 2 * (5.0 - 18.0 * q + 12.0 * q ** 2))
        b1 = 6.0 * (1.0 - q) * (1.0 - p) * (q + p * (1.0 - 4.0 * q))
        b0 = 8.0 * q * (1.0 - q) * p * (1.0 - p)
        return np.array([b0, b1, b2, b3])
    if k in (1, 2):
        b2 = 2.0 * (1.0 - 2.0 * q - p * (3.0 - 7.0 * q) + p ** 2 * (1.0 - 4.0 * q))
        b1 = 2.0 * (1.0 - p) * (3.0 * q + p * (1.0 - 8.0 * q))
        b0 = 8.0 * q * p * (1.0 - p)
        return np.array([b0, b1, b2])
    raise ValueError(f"k must be 1, 2 or 3, got {k}")


def bisector_numerator_denominator(p: float, q: float, k: int, t) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate the rate-sum numerator polynomial and its denominator at times t.

    The ratio reconstructs g3^p(t) + g_k^q(t) exactly; used to
    cross-check the coefficient formulas against the closed-form rates.
    """
    beta = numerator_beta(p, q, k)
    x = np.exp(2.0 * np.asarray(t, dtype=float))
    num = sum(b * x ** n for n, b in enumerate(beta))
    den = (1.0 + p * (x - 1.0)) * (1.0 + (1.0 - 2.0 * p) * (x - 1.0)) \
        * (1.0 + (1.0 - 2.0 * q) * (x - 1.0))
    if k == 3:
        den = den * (1.0 + q * (x - 1.0))
    return num, den


def descartes_sign_changes(coeffs, tol: float = 1e-12) -> int:
    """Number of sign changes among coefficients with |c| > tol.

    Coefficients are taken in ascending power order; by the Descartes
    rule the count bounds the number of positive roots.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        raise ValueError("coefficient list must be nonempty")
    signs = np.sign(c[np.abs(c) > tol])
    return int(np.sum(signs[:-1] * signs[1:] < 0))
