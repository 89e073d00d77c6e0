"""Energy bookkeeping, local energy audits, the scale-invariant monitor Phi,
energy-concentration scans and harmonic-map bubbles."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from . import kernels as K
from .fields import TorusGrid
from .params import LeslieCoefficients
from .solver import FlowState, recover_pressure

EIGHT_PI = 8 * np.pi

LEDGER_COLUMNS = ("t", "E", "D_visc", "D_dir", "D_align1", "D_align2",
                  "residual", "max_div_u", "max_unit_violation")


class LedgerRow(NamedTuple):
    t: float
    E: float
    D_visc: float
    D_dir: float
    D_align1: float
    D_align2: float
    residual: float
    max_div_u: float
    max_unit_violation: float

    @property
    def dissipation(self) -> float:
        return self.D_visc + self.D_dir + self.D_align1 + self.D_align2


@dataclass(frozen=True)
class ConcentrationEvent:
    t: float
    center: tuple[float, float]
    radius: float
    local_energy: float
    threshold: float = EIGHT_PI


@dataclass
class EnergyLedger:
    rows: list[LedgerRow] = field(default_factory=list)
    flags: list[ConcentrationEvent] = field(default_factory=list)

    def append(self, row: LedgerRow):
        """Add a row, filling its ``residual`` from the previous row."""
        if self.rows:
            prev = self.rows[-1]
            if not row.t > prev.t:
                raise ValueError(f"ledger times must increase: {row.t} after {prev.t}")
            row = row._replace(residual=energy_law_audit(prev, row))
        else:
            row = row._replace(residual=0.0)
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float).reshape(-1, len(LEDGER_COLUMNS))


def total_energy(grid: TorusGrid, state: FlowState) -> float:
    """``int |u|^2 + |grad d|^2`` over the torus."""
    Gd = grid.gradient(state.d)
    return float(grid.integrate(np.sum(state.u**2, axis=0) + np.sum(Gd**2, axis=(0, 1))))


def gl_energy(grid: TorusGrid, state: FlowState, epsilon: float) -> float:
    """Penalized energy ``int |u|^2 + |grad d|^2 + (1 - |d|^2)^2 / (2 eps^2)``."""
    pen = (1.0 - np.sum(state.d**2, axis=0)) ** 2 / (2 * epsilon**2)
    return total_energy(grid, state) + float(grid.integrate(pen))


def ledger_row(grid: TorusGrid, state: FlowState, coeffs: LeslieCoefficients,
               mode: str = K.PROJECTION, epsilon: float | None = None) -> LedgerRow:
    if mode == K.PROJECTION:
        E = total_energy(grid, state)
    else:
        E = gl_energy(grid, state, epsilon)
    D = K.dissipation_functionals(grid, state.u, state.d, coeffs, mode, epsilon)
    div = float(np.max(np.abs(grid.divergence(state.u))))
    unit = float(np.max(np.abs(np.sqrt(np.sum(state.d**2, axis=0)) - 1.0)))
    return LedgerRow(state.t, E, *D, 0.0, div, unit)


def energy_law_audit(row1: LedgerRow, row2: LedgerRow) -> float:
    """``E(t2) - E(t1) + int_{t1}^{t2} D dt`` with trapezoidal time quadrature."""
    dt = row2.t - row1.t
    return (row2.E - row1.E) + 0.5 * dt * (row1.dissipation + row2.dissipation)


# -- local energy inequality --------------------------------------------------

@dataclass(frozen=True)
class Cutoff:
    """Radial cutoff: 1 on ``B(center, inner_r)``, 0 outside ``B(center, outer_r)``,
    smoothstep ``3s^2 - 2s^3`` in between."""

    center: tuple[float, float]
    inner_r: float
    outer_r: float

    def _check(self, grid):
        if not (0 <= self.inner_r < self.outer_r):
            raise ValueError(f"need 0 <= inner_r < outer_r, got {self.inner_r}, {self.outer_r}")
        if not self.covers(grid) and self.outer_r > grid.length / 2:
            raise ValueError(f"outer_r = {self.outer_r} must not exceed half the period "
                             f"{grid.length / 2} unless the window covers the torus")

    def covers(self, grid) -> bool:
        # farthest point of the torus from any center is L / sqrt(2)
        return self.inner_r >= grid.length / np.sqrt(2)

    def eta(self, grid: TorusGrid):
        """Return ``(eta, |grad(eta^2)|)`` on the grid."""
        self._check(grid)
        if self.covers(grid):
            one = np.ones((grid.n, grid.n))
            return one, np.zeros_like(one)
        dx, dy = grid.min_image(self.center)
        rho = np.hypot(dx, dy)
        width = self.outer_r - self.inner_r
        s = np.clip((self.outer_r - rho) / width, 0.0, 1.0)
        eta = s * s * (3 - 2 * s)
        deta = 6 * s * (1 - s) / width   # |d eta / d rho|
        return eta, 2 * eta * deta


@dataclass(frozen=True)
class LocalEnergyAudit:
    lhs: float
    flux_bound: float
    alignment: float   # int int eta^2 (D_align1 + D_align2 densities)

    def passes(self, c_audit: float = 10.0) -> bool:
        return self.lhs <= c_audit * self.flux_bound


def _time_integral(ts, gs, a=None, b=None):
    """Trapezoidal integral of samples ``gs(ts)`` over ``[a, b]``, linearly
    interpolating at window ends that fall between samples."""
    ts = np.asarray(ts, dtype=float)
    gs = np.asarray(gs, dtype=float)
    a = ts[0] if a is None else a
    b = ts[-1] if b is None else b
    inner = (ts > a) & (ts < b)
    nodes = np.concatenate([[a], ts[inner], [b]])
    vals = np.concatenate([[np.interp(a, ts, gs)], gs[inner], [np.interp(b, ts, gs)]])
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(nodes)))


def local_energy_audit(grid: TorusGrid, trajectory: Sequence[FlowState],
                       coeffs: LeslieCoefficients, cutoff: Cutoff | None) -> LocalEnergyAudit:
    """Both sides of the localized energy inequality between the first and
    last states of ``trajectory``.

    ``lhs = int eta^2 e(t2) - int eta^2 e(t1) + int int eta^2 [mu4 |grad u|^2
    + (2/|l1|) |tau|^2]`` with ``e = |u|^2 + |grad d|^2``, and
    ``flux_bound`` integrates the flux terms against ``|grad(eta^2)|``:
    ``(|u|^2 + |grad u| + |u||grad d| + |grad d|^2 + |grad^2 d| + |P|)|u|
    + (|grad u| + |u||grad d| + |grad d|^2 + |grad^2 d|)|grad d|``.
    ``cutoff=None`` means ``eta = 1``.
    """
    if len(trajectory) < 2:
        raise ValueError("trajectory needs at least two states")
    c = coeffs
    if cutoff is None:
        w = np.ones((grid.n, grid.n))
        g_eta2 = np.zeros_like(w)
    else:
        eta, g_eta2 = cutoff.eta(grid)
        w = eta**2
    has_flux = bool(np.any(g_eta2 > 0))

    ts, energy, dissip, align, flux = [], [], [], [], []
    for st in trajectory:
        u, d = st.u, st.d
        Gu = grid.gradient(u)
        dh = grid.fft(d)
        Gd = grid.gradient(d, dh)
        lap_d = grid.laplacian(d, dh)
        gd2 = np.sum(Gd**2, axis=(0, 1))
        tau = lap_d + gd2 * d
        A, _ = K.strain_vorticity(grid, u, grad_u=Gu)
        Ad = K.matvec(A, d)
        dAd = np.sum(Ad * d[:2], axis=0)
        u2 = np.sum(u**2, axis=0)
        gu2 = np.sum(Gu**2, axis=(0, 1))

        ts.append(st.t)
        energy.append(grid.integrate(w * (u2 + gd2)))
        dissip.append(grid.integrate(w * (c.mu4 * gu2 + 2 * c.gamma * np.sum(tau**2, axis=0))))
        align.append(grid.integrate(w * 2 * (c.alignment_weight_1 * dAd**2
                                             + c.alignment_weight_2 * np.sum(Ad**2, axis=0))))
        if has_flux:
            P = recover_pressure(grid, u, d, c)
            H = grid.second_derivatives(d, dh)
            au, agu, agd = np.sqrt(u2), np.sqrt(gu2), np.sqrt(gd2)
            ah = np.sqrt(np.sum(H**2, axis=(0, 1, 2)))
            dens = ((u2 + agu + au * agd + gd2 + ah + np.abs(P)) * au
                    + (agu + au * agd + gd2 + ah) * agd)
            flux.append(grid.integrate(dens * g_eta2))
        else:
            flux.append(0.0)

    lhs = energy[-1] - energy[0] + _time_integral(ts, dissip)
    return LocalEnergyAudit(float(lhs), _time_integral(ts, flux), _time_integral(ts, align))


# -- scale-invariant monitor ----------------------------------------------------

def disc_integral(grid: TorusGrid, f: np.ndarray, center, r: float) -> float:
    """``int_{B_r(center)} f`` for the trigonometric interpolant of ``f``.

    Exact for band-limited ``f``: each Fourier mode is weighted by the disc
    transform ``2 pi r J1(|k| r) / |k|``.
    """
    if not 0 < r < grid.length / 2:
        raise ValueError(f"radius must lie in (0, L/2), got {r}")
    fh = grid.fft(f) / grid.n**2
    k = np.sqrt(grid.kx**2 + grid.ky**2)
    kr = k * r
    weight = np.where(k > 0, 2 * np.pi * r * special.j1(kr) / np.where(k > 0, k, 1.0), np.pi * r * r)
    phase = np.exp(1j * (grid.kx * center[0] + grid.ky * center[1]))
    terms = fh * weight * phase
    # rfft stores half the spectrum: double every column except 0 and Nyquist
    col = np.full(grid.ky.shape, 2.0)
    col[..., 0] = 1.0
    col[..., -1] = 1.0
    return float(np.sum((terms * col).real))


def _phi_integrands(grid, st, coeffs, mode, epsilon):
    u, d = st.u, st.d
    Gu = grid.gradient(u)
    dh = grid.fft(d)
    Gd = grid.gradient(d, dh)
    lap_d = grid.laplacian(d, dh)
    P = recover_pressure(grid, u, d, coeffs, mode, epsilon)
    return (np.sum(u**2, axis=0) ** 2,
            np.sum(Gu**2, axis=(0, 1)),
            np.sum(Gd**2, axis=(0, 1)) ** 2,
            np.sum(lap_d**2, axis=0),
            P**2)


def phi(grid: TorusGrid, trajectory: Sequence[FlowState], coeffs: LeslieCoefficients,
        center, t0: float, r: float, mode: str = K.PROJECTION,
        epsilon: float | None = None) -> float:
    """Scale-invariant monitor on the parabolic cylinder
    ``B_r(center) x [t0 - r^2, t0]``:

    ``(int|u|^4)^1/4 + (int|grad u|^2)^1/2 + (int|grad d|^4)^1/4
    + (int|Lap d|^2)^1/2 + (int|P|^2)^1/2``.

    Snapshots covering the window must be spaced by at most ``r^2 / 8``.
    """
    ts = np.array([st.t for st in trajectory])
    a, b = t0 - r * r, t0
    slack = 1e-9 * max(1.0, abs(t0))
    if len(ts) < 2 or ts[0] > a + slack or ts[-1] < b - slack:
        raise ValueError(f"trajectory [{ts[0] if len(ts) else None}, "
                         f"{ts[-1] if len(ts) else None}] does not cover [{a}, {b}]")
    i0 = int(np.searchsorted(ts, a + slack, side="right")) - 1
    i1 = int(np.searchsorted(ts, b - slack, side="left"))
    use = np.arange(max(i0, 0), min(i1, len(ts) - 1) + 1)
    gaps = np.diff(ts[use])
    if np.any(gaps > r * r / 8 * (1 + 1e-9)):
        raise ValueError(f"snapshot spacing {gaps.max():g} exceeds r^2/8 = {r * r / 8:g}")

    samples = np.array([[disc_integral(grid, f, center, r)
                         for f in _phi_integrands(grid, trajectory[i], coeffs, mode, epsilon)]
                        for i in use])
    I = [max(_time_integral(ts[use], samples[:, j], a, b), 0.0) for j in range(5)]
    return float(I[0] ** 0.25 + I[1] ** 0.5 + I[2] ** 0.25 + I[3] ** 0.5 + I[4] ** 0.5)


def rescale_trajectory(grid: TorusGrid, trajectory: Sequence[FlowState], center,
                       t0: float, r: float):
    """Parabolic rescaling about ``(center, t0)`` by ``r``.

    Returns ``(grid_r, traj_r)`` with ``u_r(x, s) = r u(center + r x, t0 + r^2 s)``
    and ``d_r(x, s) = d(center + r x, t0 + r^2 s)`` on a torus of period
    ``L / r`` centred at the origin.  The pressure, recovered from
    ``(u_r, d_r)``, scales as ``r^2 P``.
    """
    grid_r = TorusGrid(grid.n, grid.length / r)
    out = []
    for st in trajectory:
        u = grid.shift(st.u, center)
        d = grid.shift(st.d, center)
        out.append(FlowState(r * u, d, (st.t - t0) / (r * r)))
    return grid_r, out


# -- energy concentration -------------------------------------------------------

@lru_cache(maxsize=32)
def _disc_weights(n: int, length: float, r: float, sub: int = 48) -> np.ndarray:
    """Area fraction of each cell covered by the disc of radius ``r`` about
    the origin, laid out with the origin at index (0, 0)."""
    h = length / n
    off = (np.arange(n) + n // 2) % n - n // 2
    X, Y = np.meshgrid(off * h, off * h, indexing="ij")
    # nearest / farthest corner distances of each cell
    ax, ay = np.abs(X), np.abs(Y)
    near = np.hypot(np.maximum(ax - h / 2, 0), np.maximum(ay - h / 2, 0))
    far = np.hypot(ax + h / 2, ay + h / 2)
    w = (far <= r).astype(float)
    edge = np.nonzero((near < r) & (far > r))
    s = (np.arange(sub) + 0.5) / sub - 0.5
    SX, SY = np.meshgrid(s * h, s * h, indexing="ij")
    for i, j in zip(*edge):
        inside = np.hypot(X[i, j] + SX, Y[i, j] + SY) <= r
        w[i, j] = inside.mean()
    return w


def local_energy_map(grid: TorusGrid, state: FlowState, r: float) -> np.ndarray:
    """``int_{B_r(x)} |u|^2 + |grad d|^2`` for every grid center ``x``."""
    if r < 2 * grid.spacing:
        raise ValueError(f"radius {r} is below two grid spacings ({2 * grid.spacing})")
    if r >= grid.length / 2:
        raise ValueError(f"radius {r} must be below half the period")
    Gd = grid.gradient(state.d)
    e = np.sum(state.u**2, axis=0) + np.sum(Gd**2, axis=(0, 1))
    w = _disc_weights(grid.n, grid.length, float(r))
    # w is even, so correlation and convolution coincide
    return grid.ifft(grid.fft(e) * grid.fft(w)) * grid.cell_area


def concentration_scan(grid: TorusGrid, state: FlowState, r: float,
                       threshold: float = EIGHT_PI, flag_tol: float = 0.01):
    """Grid centers whose disc energy reaches ``threshold * (1 - flag_tol)``."""
    local = local_energy_map(grid, state, r)
    x, y = grid.coords
    hits = np.nonzero(local >= threshold * (1 - flag_tol))
    return [ConcentrationEvent(state.t, (float(x[i, j]), float(y[i, j])), float(r),
                               float(local[i, j]), float(threshold))
            for i, j in zip(*hits)]


def cluster_events(events: Sequence[ConcentrationEvent], grid: TorusGrid,
                   separation: float | None = None) -> list[list[ConcentrationEvent]]:
    """Group events whose centers lie within ``separation`` (periodic
    distance, default: the scan radius) of some other member."""
    events = list(events)
    clusters: list[list[ConcentrationEvent]] = []
    L = grid.length
    for ev in events:
        sep = ev.radius if separation is None else separation
        joined = []
        for ci, cl in enumerate(clusters):
            for other in cl:
                dx = (ev.center[0] - other.center[0] + L / 2) % L - L / 2
                dy = (ev.center[1] - other.center[1] + L / 2) % L - L / 2
                if np.hypot(dx, dy) <= sep:
                    joined.append(ci)
                    break
        merged = [ev]
        for ci in reversed(joined):
            merged.extend(clusters.pop(ci))
        clusters.append(merged)
    return clusters


def tension_residual(grid: TorusGrid, d: np.ndarray) -> float:
    """L^2 norm of the tension field ``Lap d + |grad d|^2 d``."""
    tau = K.tension_field(grid, d)
    return float(np.sqrt(grid.integrate(np.sum(tau**2, axis=0))))


# -- harmonic-map bubbles --------------------------------------------------------

def make_bubble(grid: TorusGrid, center, scale: float, degree: int = 1,
                cutoff_radius: float | None = None) -> np.ndarray:
    """Degree-``m`` harmonic sphere, inverse stereographic image of
    ``w = ((z - center) / scale)^m``:
    ``d = (2 Re w, 2 Im w, 1 - |w|^2) / (1 + |w|^2)``.

    The map tends to the south pole far from the center but never reaches
    it on a finite torus.  To keep ``d`` periodic, ``w`` is divided by a
    smoothstep factor ``chi`` that equals 1 inside ``cutoff_radius / 2``
    and vanishes beyond ``cutoff_radius`` (default ``0.45 L``), where
    ``d`` is exactly the south pole.  ``|d| = 1`` holds pointwise.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if int(degree) != degree or degree < 1:
        raise ValueError(f"degree must be a positive integer, got {degree}")
    R = 0.45 * grid.length if cutoff_radius is None else float(cutoff_radius)
    if not 0 < R <= grid.length / 2:
        raise ValueError(f"cutoff_radius must lie in (0, L/2], got {R}")
    dx, dy = grid.min_image(center)
    zeta = ((dx + 1j * dy) / scale) ** int(degree)
    s = np.clip((R - np.hypot(dx, dy)) / (R / 2), 0.0, 1.0)
    chi = s * s * (3 - 2 * s)
    a2 = np.abs(zeta) ** 2
    den = chi**2 + a2
    d = np.stack([2 * chi * zeta.real, 2 * chi * zeta.imag, chi**2 - a2]) / den
    # renormalize away the last-bit rounding of the rational formula
    return d / np.sqrt(np.sum(d**2, axis=0))


def make_bubbles(grid: TorusGrid, bubbles, cutoff_radius: float) -> np.ndarray:
    """Several bubbles with disjoint supports of radius ``cutoff_radius``.

    ``bubbles`` is an iterable of ``(center, scale, degree)``.
    """
    bubbles = list(bubbles)
    L = grid.length
    for i, (ci, _, _) in enumerate(bubbles):
        for cj, _, _ in bubbles[i + 1:]:
            dx = (ci[0] - cj[0] + L / 2) % L - L / 2
            dy = (ci[1] - cj[1] + L / 2) % L - L / 2
            if np.hypot(dx, dy) < 2 * cutoff_radius:
                raise ValueError("bubble supports overlap; reduce cutoff_radius")
    d = np.zeros((3, grid.n, grid.n))
    d[2] = -1.0
    for center, scale, degree in bubbles:
        dx, dy = grid.min_image(center)
        inside = np.hypot(dx, dy) < cutoff_radius
        d = np.where(inside, make_bubble(grid, center, scale, degree, cutoff_radius), d)
    return d
