"""Covariant phase-space observables on a 1D grid and on Z_d x Z_d.

The continuous system uses the projective representation
(W(q, p) psi)(x) = exp(i p (x - q/2)) psi(x - q) on a periodic grid.  The
user-facing ``weyl_apply`` snaps (q, p) to the grid lattices, which keeps the
operator exactly unitary and the composition law exact up to a global phase.
Operator-valued integrals (cell effects, identity-resolution checks) instead
translate by Fourier phases: that variant is equally unitary but analytic in
q, which Gauss-Legendre quadrature needs; snapped translates would present a
staircase integrand and stall convergence at O(dx).

Densities h(q, p) = tr[S W(q,p) T W(q,p)*] / 2pi, cell effects
G_T(Z) = (1/2pi) integral over Z of W T W*, their position/momentum margins,
and the exact finite Weyl-Heisenberg system on Z_d are provided, with
resolution-of-identity and covariance checks reporting explicit defects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.signal import fftconvolve

from .grids import Grid1D, WaveFunction, symmetric_grid
from .hilbert import Effect, Operator, Outcome, PointCell, Pom, RectCell, State, make_state
from .posmom import ProbMeasure1D, WindowLeakageError

__all__ = [
    "PhaseSpaceCell",
    "WeylApplied",
    "weyl_apply",
    "gaussian_wavefunction",
    "hermite_wavefunction",
    "state_from_wavefunctions",
    "spectral_wavefunctions",
    "DensityResult",
    "phase_space_density",
    "phase_space_effect",
    "phase_space_pom",
    "phase_space_cell_norm",
    "RoiReport",
    "resolution_of_identity_defect",
    "margins_of_GT",
    "finite_weyl_pom",
    "finite_weyl_unitaries",
    "finite_weyl_action",
    "default_grid",
]

PhaseSpaceCell = RectCell

DEFAULT_N = 4096
DEFAULT_HALF_WIDTH = 20.0


def default_grid(n: int = DEFAULT_N, half_width: float = DEFAULT_HALF_WIDTH) -> Grid1D:
    """The standard working grid: n points covering [-half_width, half_width)."""
    return symmetric_grid(n, half_width)


# --- states on the grid -----------------------------------------------------


def gaussian_wavefunction(
    grid: Grid1D, a: float = 0.5, b: float = 0.0, center: float = 0.0, momentum: float = 0.0
) -> WaveFunction:
    """Normalised Gaussian packet (2a/pi)^(1/4) exp(-(a+ib)(x-c)^2 + i p0 x)."""
    if a <= 0:
        raise ValueError("width parameter a must be positive")
    x = grid.positions()
    vals = (2 * a / np.pi) ** 0.25 * np.exp(
        -(a + 1j * b) * (x - center) ** 2 + 1j * momentum * x
    )
    return WaveFunction(grid, vals).normalised()


def hermite_wavefunction(grid: Grid1D, k: int) -> WaveFunction:
    """k-th Hermite function (harmonic-oscillator number state) on the grid."""
    if k < 0:
        raise ValueError("index must be nonnegative")
    x = grid.positions()
    h_prev = np.pi**-0.25 * np.exp(-(x**2) / 2)
    if k == 0:
        return WaveFunction(grid, h_prev).normalised()
    h_cur = np.sqrt(2.0) * x * h_prev
    for m in range(2, k + 1):
        h_cur, h_prev = (
            np.sqrt(2.0 / m) * x * h_cur - np.sqrt((m - 1) / m) * h_prev,
            h_cur,
        )
    return WaveFunction(grid, h_cur).normalised()


def state_from_wavefunctions(
    pairs: Sequence[Tuple[float, WaveFunction]]
) -> State:
    """Mixed state from (weight, wave function) pairs, grid-embedded."""
    grids = {psi.grid for _, psi in pairs}
    if len(grids) != 1:
        raise ValueError("wave functions must share one grid")
    grid = grids.pop()
    return make_state(
        [(w, psi.values * np.sqrt(grid.dx)) for w, psi in pairs]
    )


def spectral_wavefunctions(state: State, grid: Grid1D) -> list[Tuple[float, np.ndarray]]:
    """Spectral decomposition as wave-function samples (inverse embedding)."""
    if state.spectral is None:
        raise ValueError("state carries no spectral data")
    if state.dim != grid.n:
        raise ValueError("state dimension does not match the grid")
    return [
        (w, np.asarray(v, dtype=complex) / np.sqrt(grid.dx))
        for w, v in state.spectral
        if w > 0
    ]


# --- the Weyl system ---------------------------------------------------------


@dataclass(frozen=True)
class WeylApplied:
    psi: WaveFunction
    q: float
    p: float
    snap_distance: float


def weyl_apply(q: float, p: float, psi: WaveFunction) -> WeylApplied:
    """Phase-space translation with (q, p) snapped to the grid lattices.

    q snaps to multiples of dx and p to multiples of 2 pi/(n dx); the snap
    distance is reported.  The snapped operator is exactly unitary on the
    periodic grid and satisfies the composition law up to a global phase.
    """
    grid = psi.grid
    a = int(round(q / grid.dx))
    b = int(round(p / grid.dp))
    q_s = a * grid.dx
    p_s = b * grid.dp
    snap = math.hypot(q - q_s, p - p_s)
    x = grid.positions()
    vals = np.exp(1j * p_s * (x - q_s / 2)) * np.roll(psi.values, a)
    return WeylApplied(WaveFunction(grid, vals), q_s, p_s, snap)


def _smooth_translate(values: np.ndarray, grid: Grid1D, q: float) -> np.ndarray:
    """Unitary band-limited translation: Fourier phases, analytic in q."""
    k = 2 * np.pi * np.fft.fftfreq(grid.n, d=grid.dx)
    return np.fft.ifft(np.fft.fft(values) * np.exp(-1j * k * q))


def _weyl_smooth(values: np.ndarray, grid: Grid1D, q: float, p: float) -> np.ndarray:
    x = grid.positions()
    return np.exp(1j * p * (x - q / 2)) * _smooth_translate(values, grid, q)


# --- phase-space density -----------------------------------------------------


@dataclass(frozen=True)
class DensityResult:
    qs: np.ndarray
    ps: np.ndarray
    values: np.ndarray
    leakage_bound: float


def _spectral_pairs(state: State, grid: Grid1D):
    pairs = spectral_wavefunctions(state, grid)
    weights = np.array([w for w, _ in pairs])
    vecs = np.stack([v for _, v in pairs])
    return weights, vecs


def _marginal_leakage(
    t_state: State, s_state: State, grid: Grid1D,
    q_window: Tuple[float, float], p_window: Tuple[float, float],
) -> float:
    """Union bound on the probability mass outside the requested window."""
    tw, tv = _spectral_pairs(t_state, grid)
    sw, sv = _spectral_pairs(s_state, grid)
    x = grid.positions()
    p = grid.momenta()

    def outside(density, axis, window, step):
        total = density.sum() * step
        inside = density[(axis >= window[0]) & (axis <= window[1])].sum() * step
        return max(total - inside, 0.0)

    e_t = (tw[:, None] * np.abs(np.roll(tv[:, ::-1], 1, axis=1)) ** 2).sum(axis=0)
    mu_s = (sw[:, None] * np.abs(sv) ** 2).sum(axis=0)
    conv_q = fftconvolve(mu_s, e_t) * grid.dx
    axis_q = np.linspace(2 * x[0], 2 * x[-1], conv_q.size)
    leak_q = outside(conv_q, axis_q, q_window, grid.dx)

    tv_hat = np.stack([grid.to_momentum(v) for v in tv])
    sv_hat = np.stack([grid.to_momentum(v) for v in sv])
    f_t = (tw[:, None] * np.abs(np.roll(tv_hat[:, ::-1], 1, axis=1)) ** 2).sum(axis=0)
    mu_s_hat = (sw[:, None] * np.abs(sv_hat) ** 2).sum(axis=0)
    conv_p = fftconvolve(mu_s_hat, f_t) * grid.dp
    axis_p = np.linspace(2 * p[0], 2 * p[-1], conv_p.size)
    leak_p = outside(conv_p, axis_p, p_window, grid.dp)
    return float(leak_q + leak_p)


def phase_space_density(
    t_state: State,
    s_state: State,
    qs: np.ndarray,
    ps: np.ndarray,
    grid: Grid1D,
    max_leakage: float | None = 0.01,
) -> DensityResult:
    """Sample h(q, p) = tr[S W(q,p) T W(q,p)*] / 2pi on a rectangular lattice.

    For a Gaussian T this is a Husimi-type density of S.  A union bound on
    the probability mass of the joint observable outside the sampled window
    is reported; exceeding ``max_leakage`` raises WindowLeakageError.  Pass
    ``max_leakage=None`` for point probes that do not claim window coverage.
    """
    qs = np.asarray(qs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    tw, tv = _spectral_pairs(t_state, grid)
    sw, sv = _spectral_pairs(s_state, grid)
    x = grid.positions()
    out = np.zeros((qs.size, ps.size))
    for iq, q in enumerate(qs):
        phase = np.exp(1j * np.outer(x - q / 2, ps))
        for wn, phi in zip(tw, tv):
            shifted = _smooth_translate(phi, grid, q)
            overlaps = (sv.conj() * shifted[None, :]) @ phase * grid.dx
            out[iq] += wn * (sw @ (np.abs(overlaps) ** 2))
    out /= 2 * np.pi
    leak = _marginal_leakage(
        t_state, s_state, grid,
        (qs.min(), qs.max()), (ps.min(), ps.max()),
    )
    if max_leakage is not None and leak > max_leakage:
        raise WindowLeakageError(
            f"phase-space window leaks {leak:.3e} > {max_leakage}"
        )
    return DensityResult(qs, ps, out, leak)


# --- cell effects via Gauss-Legendre quadrature ------------------------------


def _gl_panels(lo: float, hi: float, order: int, max_panel: float):
    """Composite Gauss-Legendre nodes/weights with panels of bounded width."""
    if order < 2:
        raise ValueError("quadrature order must be at least 2")
    xs, ws = leggauss(order)
    n_panels = max(1, int(np.ceil((hi - lo) / max_panel)))
    edges = np.linspace(lo, hi, n_panels + 1)
    nodes = []
    weights = []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * xs)
        weights.append(half * ws)
    return np.concatenate(nodes), np.concatenate(weights)


def _check_cell_in_window(cell: RectCell, grid: Grid1D) -> None:
    x = grid.positions()
    p_half = np.pi / grid.dx
    if cell.q_lo < x[0] - grid.dx or cell.q_hi > x[-1] + grid.dx:
        raise ValueError("cell q-range outside the representable window")
    if cell.p_lo < -p_half or cell.p_hi > p_half:
        raise ValueError("cell p-range outside the representable momentum window")


def phase_space_effect(
    t_state: State,
    cell: RectCell,
    grid: Grid1D,
    order: int = 16,
    max_panel: float = 2.0,
) -> Effect:
    """G_T(Z) = (1/2pi) integral over the cell of W(q,p) T W(q,p)*.

    Tensor Gauss-Legendre quadrature with panels of bounded width; the
    translates use Fourier phases so the integrand is analytic and the
    quadrature converges spectrally.
    """
    _check_cell_in_window(cell, grid)
    q_nodes, q_w = _gl_panels(cell.q_lo, cell.q_hi, order, max_panel)
    p_nodes, p_w = _gl_panels(cell.p_lo, cell.p_hi, order, max_panel)
    tw, tv = _spectral_pairs(t_state, grid)
    x = grid.positions()
    n = grid.n
    acc = np.zeros((n, n), dtype=complex)
    for q, wq in zip(q_nodes, q_w):
        phase = np.exp(1j * np.outer(x - q / 2, p_nodes))
        for wn, phi in zip(tw, tv):
            shifted = _smooth_translate(phi, grid, q)
            cols = shifted[:, None] * phase  # n x K_p translate bank
            acc += (cols * (wq * wn * p_w)) @ cols.conj().T
    acc *= grid.dx / (2 * np.pi)
    return Effect(Operator(acc))


def phase_space_cell_norm(
    t_state: State, cell: RectCell, grid: Grid1D, order: int = 16, max_panel: float = 2.0
) -> float:
    """Spectral norm of the cell effect (strictly below one on bounded cells)."""
    eff = phase_space_effect(t_state, cell, grid, order, max_panel)
    return float(np.linalg.eigvalsh(eff.op.mat).max())


def phase_space_pom(
    t_state: State,
    cells: Sequence[RectCell],
    grid: Grid1D,
    order: int = 16,
    max_panel: float = 2.0,
    remainder_label: str = "outside-window",
) -> Pom:
    """POM from disjoint cells plus the complement effect I - sum G(Z_i)."""
    effects = [phase_space_effect(t_state, c, grid, order, max_panel) for c in cells]
    outcomes = [
        Outcome(f"q[{c.q_lo:.3g},{c.q_hi:.3g}) p[{c.p_lo:.3g},{c.p_hi:.3g})", c)
        for c in cells
    ]
    total = sum(e.op.mat for e in effects)
    rest = np.eye(grid.n) - total
    effects.append(Effect(Operator(rest)))
    lim = np.pi / grid.dx
    outcomes.append(
        Outcome(remainder_label, RectCell(grid.x0, grid.x0 + grid.length, -lim, lim))
    )
    return Pom("phase-space cells", tuple(outcomes), tuple(effects))


# --- resolution of identity --------------------------------------------------


@dataclass(frozen=True)
class RoiReport:
    defect: float
    n_test: int
    subspace: str
    gram: np.ndarray


def resolution_of_identity_defect(
    t_state: State,
    grid: Grid1D,
    half_width: float = DEFAULT_HALF_WIDTH,
    n_test: int = 13,
    order: int = 16,
    max_panel: float = 2.0,
) -> RoiReport:
    """Defect of (1/2pi) integral over the window of W T W* against identity.

    The operator identity holds over the whole plane; on a finite window it
    is measured against the span of the first ``n_test`` Hermite functions
    (states whose position and momentum content fits the window), as the
    matrix M_ij = <h_i, G h_j>.  The defect is ||M - I||.
    """
    herm = np.stack(
        [hermite_wavefunction(grid, k).values for k in range(n_test)]
    )
    q_nodes, q_w = _gl_panels(-half_width, half_width, order, max_panel)
    p_nodes, p_w = _gl_panels(-half_width, half_width, order, max_panel)
    tw, tv = _spectral_pairs(t_state, grid)
    x = grid.positions()
    m = np.zeros((n_test, n_test), dtype=complex)
    for q, wq in zip(q_nodes, q_w):
        phase = np.exp(1j * np.outer(x - q / 2, p_nodes))
        for wn, phi in zip(tw, tv):
            shifted = _smooth_translate(phi, grid, q)
            a = (herm.conj() * shifted[None, :]) @ phase * grid.dx
            m += (a * (wq * wn * p_w)) @ a.conj().T
    m /= 2 * np.pi
    defect = float(np.linalg.norm(m - np.eye(n_test), 2))
    return RoiReport(defect, n_test, "hermite", m)


# --- margins -----------------------------------------------------------------


def _reflect_samples(values: np.ndarray) -> np.ndarray:
    """Samples of x -> f(-x) on a symmetric periodic grid (index 0 fixed)."""
    return np.roll(values[::-1], 1)


def margins_of_GT(t_state: State, grid: Grid1D) -> Tuple[ProbMeasure1D, ProbMeasure1D]:
    """Position and momentum margins of the covariant observable built on T.

    The position margin has density e(q) = sum_n w_n |phi_n(-q)|^2 and the
    momentum margin f(p) = sum_n w_n |phi_n_hat(-p)|^2, both on the grid's
    lattices.  Requires a symmetric grid so the reflection lands on nodes.
    """
    if abs(grid.x0 + grid.length / 2) > 1e-12 * grid.length:
        raise ValueError("margins need a symmetric grid (x0 = -n dx / 2)")
    pairs = spectral_wavefunctions(t_state, grid)
    e = np.zeros(grid.n)
    f = np.zeros(grid.n)
    for w, phi in pairs:
        e += w * _reflect_samples(np.abs(phi) ** 2)
        phi_hat = grid.to_momentum(phi)
        f += w * _reflect_samples(np.abs(phi_hat) ** 2)
    rho = ProbMeasure1D.from_density(grid, e, normalize=True)
    nu = ProbMeasure1D.from_density(grid.momentum_grid(), f, normalize=True)
    mass_e = float(np.sum(e) * grid.dx)
    mass_f = float(np.sum(f) * grid.dp)
    if abs(mass_e - 1.0) > 1e-8 or abs(mass_f - 1.0) > 1e-8:
        raise WindowLeakageError(
            f"margin masses {mass_e}, {mass_f} deviate from 1 beyond 1e-8"
        )
    return rho, nu


# --- the finite Weyl-Heisenberg system ---------------------------------------


def _finite_weyl_matrix(d: int, a: int, b: int) -> np.ndarray:
    """W_(a,b) = Z^b X^a with X the cyclic shift and Z the clock phase."""
    shift = np.roll(np.eye(d), a, axis=0)
    clock = np.diag(np.exp(2j * np.pi * b * np.arange(d) / d))
    return clock @ shift


def finite_weyl_unitaries(d: int) -> Dict[Tuple[int, int], np.ndarray]:
    return {(a, b): _finite_weyl_matrix(d, a, b) for a in range(d) for b in range(d)}


def finite_weyl_action(d: int):
    """Translation action of Z_d x Z_d on its own points as POM cells."""

    def act(g: Tuple[int, int], cell: PointCell) -> PointCell:
        return PointCell(((g[0] + cell.value[0]) % d, (g[1] + cell.value[1]) % d))

    return act


def finite_weyl_pom(d: int, t_state: State) -> Pom:
    """Covariant POM over Z_d x Z_d: effects (1/d) W_(a,b) T W_(a,b)*.

    Normalisation is exact by the orthogonality of the discrete Weyl
    operators, and covariance under the projective Weyl action is exact
    because the composition phases cancel in conjugation.
    """
    if d < 2:
        raise ValueError("need dimension at least 2")
    if t_state.dim != d:
        raise ValueError("state dimension does not match d")
    t_state.validate(1e-10)
    tmat = t_state.op.mat
    outcomes = []
    effects = []
    for a in range(d):
        for b in range(d):
            w = _finite_weyl_matrix(d, a, b)
            effects.append(Effect(Operator(w @ tmat @ w.conj().T / d)))
            outcomes.append(Outcome(f"({a},{b})", PointCell((a, b))))
    return Pom(f"Z_{d} x Z_{d} phase space", tuple(outcomes), tuple(effects))
