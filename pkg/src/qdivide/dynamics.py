"""Qubit Pauli channels driven by time-dependent rate triples.

A rate model describes rates (g1(t), g2(t), g3(t)) and an overall
coupling; the generated channel acts diagonally on the Pauli basis with
decay factors

    l_a(t) = exp(-coupling * int_0^t (g_b + g_d)),   {a, b, d} = {1, 2, 3}.

Supported kinds:

* ``constants``: time-independent rates (a semigroup),
* ``sinusoid3``: g1 = g2 = 1, g3 = sin(omega t),
* ``mixture``: convex mixture of the three pure dephasing semigroups
  with weights (p1, p2, p3); decay factors p_k + exp(-2t)(1 - p_k),
* ``tabulated``: sampled rates, integrated by composite Simpson with
  linear interpolation between nodes.
"""

from dataclasses import dataclass, field

import numpy as np

from . import core

# rate indices {b, d} complementary to each Pauli axis a (zero-based)
_PAIRS = ((1, 2), (0, 2), (0, 1))


class NonInvertibleDynamicsError(ValueError):
    """A decay factor vanished where the inverse map was required."""


@dataclass(frozen=True, eq=False)
class RateModel:
    """Parametric description of the rate triple; build via the classmethods."""

    kind: str
    coupling: float = 1.0
    constant_rates: tuple | None = None
    omega: float | None = None
    weights: tuple | None = None
    time_grid: np.ndarray | None = field(default=None, repr=False)
    rate_table: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def constants(cls, g1: float, g2: float, g3: float, coupling: float = 1.0):
        _check_coupling(coupling)
        return cls(kind="constants", coupling=coupling,
                   constant_rates=(float(g1), float(g2), float(g3)))

    @classmethod
    def sinusoid3(cls, omega: float, coupling: float = 1.0):
        _check_coupling(coupling)
        return cls(kind="sinusoid3", coupling=coupling, omega=float(omega))

    @classmethod
    def mixture(cls, p1: float, p2: float, p3: float, tol: float = 1e-12):
        # coupling is fixed to 1 for mixtures; the rates below are already
        # normalized to the generator with the 1/2 prefactor absorbed
        p = (float(p1), float(p2), float(p3))
        if min(p) < -tol:
            raise ValueError(f"mixture weights must be nonnegative, got {p}")
        if abs(sum(p) - 1.0) > tol:
            raise ValueError(f"mixture weights must sum to 1, got sum {sum(p)!r}")
        return cls(kind="mixture", coupling=1.0, weights=p)

    @classmethod
    def tabulated(cls, times, rates, coupling: float = 1.0):
        _check_coupling(coupling)
        t = np.asarray(times, dtype=float)
        r = np.asarray(rates, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise ValueError("tabulated time grid must be strictly increasing")
        if t[0] != 0.0:
            raise ValueError("tabulated time grid must start at t = 0")
        if r.shape != (t.size, 3):
            raise ValueError(f"rate table must have shape ({t.size}, 3), got {r.shape}")
        t.setflags(write=False)
        r.setflags(write=False)
        return cls(kind="tabulated", coupling=coupling, time_grid=t, rate_table=r)


def _check_coupling(coupling: float) -> None:
    if not coupling > 0:
        raise ValueError(f"coupling must be positive, got {coupling}")


def _one_minus_cos_over(omega: float, t: np.ndarray) -> np.ndarray:
    """(1 - cos(omega t)) / omega, continuous through omega = 0."""
    if abs(omega) < 1e-6:
        x = omega * t
        return 0.5 * omega * t * t * (1.0 - x * x / 12.0)
    return (1.0 - np.cos(omega * t)) / omega


def rates_at(model: RateModel, t) -> np.ndarray:
    """Rate triple at time(s) t; shape (3,) for scalar t, else t.shape + (3,)."""
    ts = np.asarray(t, dtype=float)
    scalar = ts.ndim == 0
    ts = np.atleast_1d(ts)
    if np.any(ts < 0):
        raise ValueError("times must be nonnegative")

    if model.kind == "constants":
        out = np.broadcast_to(np.asarray(model.constant_rates), ts.shape + (3,)).copy()
    elif model.kind == "sinusoid3":
        out = np.empty(ts.shape + (3,))
        out[..., 0] = 1.0
        out[..., 1] = 1.0
        out[..., 2] = np.sin(model.omega * ts)
    elif model.kind == "mixture":
        mu = _mixture_mu(np.asarray(model.weights), ts)
        out = np.empty(ts.shape + (3,))
        out[..., 0] = mu[..., 0] - mu[..., 1] - mu[..., 2]
        out[..., 1] = -mu[..., 0] + mu[..., 1] - mu[..., 2]
        out[..., 2] = -mu[..., 0] - mu[..., 1] + mu[..., 2]
    elif model.kind == "tabulated":
        grid = model.time_grid
        if np.any(ts > grid[-1]):
            raise ValueError(f"time outside the tabulated grid [0, {grid[-1]}]")
        out = np.stack(
            [np.interp(ts, grid, model.rate_table[:, k]) for k in range(3)], axis=-1
        )
    else:  # pragma: no cover
        raise ValueError(f"unknown rate model kind {model.kind!r}")
    return out[0] if scalar else out


def _mixture_mu(p: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """Auxiliary functions -(1 - p_k) / (1 + p_k (e^{2t} - 1)), shape (..., 3)."""
    em = np.expm1(2.0 * ts)[..., None]
    return -(1.0 - p) / (1.0 + p * em)


def decay_factors(model: RateModel, t) -> np.ndarray:
    """Channel eigenvalues (l1, l2, l3) at time(s) t (l0 = 1 is implicit)."""
    ts = np.asarray(t, dtype=float)
    scalar = ts.ndim == 0
    ts = np.atleast_1d(ts)
    if np.any(ts < 0):
        raise ValueError("times must be nonnegative")

    lam = model.coupling
    if model.kind == "constants":
        g = np.asarray(model.constant_rates)
        sums = np.array([g[b] + g[d] for b, d in _PAIRS])
        out = np.exp(-lam * ts[..., None] * sums)
    elif model.kind == "sinusoid3":
        # int (g2 + g3) = int (g1 + g3) = t + (1 - cos(omega t)) / omega
        mu = np.exp(-lam * (ts + _one_minus_cos_over(model.omega, ts)))
        out = np.empty(ts.shape + (3,))
        out[..., 0] = mu
        out[..., 1] = mu
        out[..., 2] = np.exp(-2.0 * lam * ts)
    elif model.kind == "mixture":
        p = np.asarray(model.weights)
        out = p + np.exp(-2.0 * ts)[..., None] * (1.0 - p)
    elif model.kind == "tabulated":
        integ = _integrate_rates(model, ts)  # (..., 3) of int_0^t g_k
        out = np.empty(ts.shape + (3,))
        for a, (b, d) in enumerate(_PAIRS):
            out[..., a] = np.exp(-lam * (integ[..., b] + integ[..., d]))
    else:  # pragma: no cover
        raise ValueError(f"unknown rate model kind {model.kind!r}")
    return out[0] if scalar else out


def _cumulative_simpson(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cumulative integral of y over x at the nodes.

    Composite Simpson over pairs of intervals (nonuniform three-point
    rule); a trailing odd interval is closed with the trapezoid rule.
    """
    n = x.size
    seg = np.zeros(n)
    i = 0
    while i + 2 <= n - 1:
        h0 = x[i + 1] - x[i]
        h1 = x[i + 2] - x[i + 1]
        whole = (h0 + h1) / 6.0 * (
            (2.0 - h1 / h0) * y[i]
            + (h0 + h1) ** 2 / (h0 * h1) * y[i + 1]
            + (2.0 - h0 / h1) * y[i + 2]
        )
        # split the pair so the cumulative value at the middle node is exact
        # to trapezoid order while the pair total keeps Simpson accuracy
        first = 0.5 * h0 * (y[i] + y[i + 1])
        seg[i + 1] = first
        seg[i + 2] = whole - first
        i += 2
    if i == n - 2:
        seg[n - 1] = 0.5 * (x[n - 1] - x[n - 2]) * (y[n - 2] + y[n - 1])
    return np.cumsum(seg)


def _integrate_rates(model: RateModel, ts: np.ndarray) -> np.ndarray:
    grid = model.time_grid
    if np.any(ts > grid[-1]):
        raise ValueError(f"time outside the tabulated grid [0, {grid[-1]}]")
    out = np.empty(ts.shape + (3,))
    idx = np.clip(np.searchsorted(grid, ts, side="right") - 1, 0, grid.size - 2)
    for k in range(3):
        col = model.rate_table[:, k]
        cum = _cumulative_simpson(grid, col)
        t0 = grid[idx]
        y0 = col[idx]
        yt = np.interp(ts, grid, col)
        out[..., k] = cum[idx] + 0.5 * (ts - t0) * (y0 + yt)
    return out


def apply_channel(f: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Apply a one-qubit Pauli channel with decay factors f to Hermitian h."""
    h = np.asarray(h)
    if h.shape != (2, 2):
        raise ValueError(f"apply_channel expects a 2x2 matrix, got {h.shape}")
    c = core.pauli_decompose(h)
    c[1:] *= np.asarray(f, dtype=float)
    return core.pauli_compose(c)


def apply_tensor_channel(f1: np.ndarray, f2: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Apply a product channel with per-factor decay factors f1, f2 to 4x4 h."""
    h = np.asarray(h)
    if h.shape != (4, 4):
        raise ValueError(f"apply_tensor_channel expects a 4x4 matrix, got {h.shape}")
    c = core.pauli_decompose(h)
    left = np.concatenate([[1.0], np.asarray(f1, dtype=float)])
    right = np.concatenate([[1.0], np.asarray(f2, dtype=float)])
    return core.pauli_compose(c * np.outer(left, right))


def choi_matrix(f: np.ndarray) -> np.ndarray:
    """Choi matrix of the Pauli channel with decay factors f = (l1, l2, l3).

    Equals (1 + l1 s1xs1 - l2 s2xs2 + l3 s3xs3) / 4, i.e. the channel
    applied to the first factor of the maximally entangled projector.
    """
    f = np.asarray(f, dtype=float)
    c = np.zeros((4, 4))
    c[0, 0] = 0.25
    c[1, 1] = 0.25 * f[0]
    c[2, 2] = -0.25 * f[1]
    c[3, 3] = 0.25 * f[2]
    return core.pauli_compose(c)


def is_cptp(f: np.ndarray, tol: float = 1e-10) -> tuple[bool, float]:
    """Whether the channel with decay factors f is completely positive.

    Returns (flag, smallest Choi eigenvalue); the flag is true when the
    smallest eigenvalue is >= -tol.
    """
    w = core.eigenvalues(choi_matrix(f))
    return bool(w[0] >= -tol), float(w[0])


def choi_min_eigenvalues(factors: np.ndarray) -> np.ndarray:
    """Smallest Choi eigenvalue for a batch of decay-factor triples (T, 3)."""
    from ._pauli import BASIS4
    from .backend import kernels

    f = np.atleast_2d(np.asarray(factors, dtype=float))
    w = np.empty((f.shape[0], 4))
    w[:, 0] = 0.25
    w[:, 1] = 0.25 * f[:, 0]
    w[:, 2] = -0.25 * f[:, 1]
    w[:, 3] = 0.25 * f[:, 2]
    diag_basis = np.ascontiguousarray(BASIS4[np.arange(4), np.arange(4)])
    choi = np.einsum("tk,kab->tab", w, diag_basis)
    return kernels.eigvalsh_batch(choi)[:, 0]


def minimal_cp_coupling(omega: float, t_max: float = 50.0, points: int = 4000,
                        tol: float = 1e-6, eig_tol: float = 1e-10) -> float:
    """Smallest coupling for which the sinusoidal-rate channel stays CP.

    Scans the Choi spectrum on a log grid over [0, t_max] and bisects in
    the coupling.  For nonnegative omega the channel is CP at any
    coupling and the lower bracket is returned.
    """
    ts = np.geomspace(1e-4, t_max, points)

    def is_cp(lam: float) -> bool:
        f = decay_factors(RateModel.sinusoid3(omega, coupling=lam), ts)
        return bool(choi_min_eigenvalues(f).min() >= -eig_tol)

    lo, hi = 1e-3, 1.0
    if is_cp(lo):
        return lo
    while not is_cp(hi):
        hi *= 2.0
        if hi > 1e6:
            raise ValueError(f"no CP-restoring coupling found below 1e6 for omega={omega}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_cp(mid):
            hi = mid
        else:
            lo = mid
    return hi


def intertwiner_factors(model: RateModel, s: float, t: float) -> np.ndarray:
    """Decay factors of the intertwining map between times s and t (0 <= s <= t)."""
    if not 0 <= s <= t:
        raise ValueError(f"need 0 <= s <= t, got s={s}, t={t}")
    fs = decay_factors(model, s)
    ft = decay_factors(model, t)
    if np.any(fs == 0.0):
        raise NonInvertibleDynamicsError(f"decay factor vanished at s={s}")
    return ft / fs


def numeric_generator_rates(model: RateModel, t: float, h: float = 1e-5) -> np.ndarray:
    """Rates reconstructed from central finite differences of the decay factors.

    Computes -(d/dt) ln l_a / coupling = g_b + g_d at time t and solves the
    three pair sums for (g1, g2, g3); accuracy is O(h^2) on smooth models.
    """
    if not 0 < h <= t:
        raise ValueError(f"need t >= h > 0, got t={t}, h={h}")
    fm = decay_factors(model, t - h)
    fp = decay_factors(model, t + h)
    if np.any(fm <= 0.0) or np.any(fp <= 0.0):
        raise NonInvertibleDynamicsError(f"decay factor vanished near t={t}")
    pair_sums = -(np.log(fp) - np.log(fm)) / (2.0 * h * model.coupling)
    return 0.5 * pair_sums.sum() - pair_sums
