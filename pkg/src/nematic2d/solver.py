"""First-order IMEX time stepping of the coupled flow/director system.

Stiff linear parts are implicit and diagonal in Fourier space: the
Newtonian viscous term ``div(mu4 A) = (mu4/2) Lap u`` and the director
relaxation ``(1/|l1|) Lap d``.  Advection, the Ericksen stress, the
non-Newtonian Leslie stress and every director coupling term are explicit.
Pressure never appears during stepping; the velocity update is Leray
projected instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import kernels as K
from .fields import TorusGrid
from .params import LeslieCoefficients

# GL penalty is explicit; warn past dt = GL_STIFFNESS * epsilon^2
GL_STIFFNESS = 0.1


class CFLError(RuntimeError):
    """Advective CFL guard exceeded; the step was not taken."""

    def __init__(self, courant: float, advisory_dt: float):
        super().__init__(f"Courant number {courant:.3g} exceeds the guard; "
                         f"retry with dt <= {advisory_dt:.3g}")
        self.courant = courant
        self.advisory_dt = advisory_dt
        self.state = None
        self.ledger = None
        self.step = None


class NumericalAbort(RuntimeError):
    """Non-finite values appeared; ``state`` is the last finite state."""

    def __init__(self, message, state, ledger=None, step=None):
        super().__init__(message)
        self.state = state
        self.ledger = ledger
        self.step = step


@dataclass
class FlowState:
    u: np.ndarray   # (2, n, n)
    d: np.ndarray   # (3, n, n)
    t: float = 0.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.d = np.asarray(self.d, dtype=float)
        if self.u.ndim != 3 or self.u.shape[0] != 2:
            raise ValueError(f"u must have shape (2, n, n), got {self.u.shape}")
        if self.d.shape != (3,) + self.u.shape[1:]:
            raise ValueError(f"d must have shape (3, n, n) matching u, got {self.d.shape}")
        self.t = float(self.t)

    def copy(self) -> "FlowState":
        return FlowState(self.u.copy(), self.d.copy(), self.t)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.u).all() and np.isfinite(self.d).all()
                    and np.isfinite(self.t))


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-3
    steps: int = 1000
    mode: str = K.PROJECTION
    epsilon: float = 0.1
    dealias: bool = True
    cfl_guard: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if int(self.steps) != self.steps or self.steps < 0:
            raise ValueError(f"steps must be a non-negative integer, got {self.steps}")
        if self.mode not in K.MODES:
            raise ValueError(f"mode must be one of {K.MODES}, got {self.mode!r}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.cfl_guard > 0:
            raise ValueError(f"cfl_guard must be positive, got {self.cfl_guard}")


def _div_hat(grid, S, mask):
    """Spectral divergence of a 2-tensor (first index contracted) or 2-vector."""
    Sh = grid.fft(S)
    if mask is not None:
        Sh = Sh * mask
    return grid.divergence_hat(Sh)


@dataclass
class _Explicit:
    momentum_hat: np.ndarray   # (2, n, n//2+1), before projection
    director_hat: np.ndarray   # (3, n, n//2+1)


def _explicit_terms(grid: TorusGrid, u, d, coeffs: LeslieCoefficients, mode, epsilon,
                    dealias=True) -> _Explicit:
    c = coeffs
    mask = grid.dealias_mask if dealias else None

    Gu = grid.gradient(u)
    A, Omega = K.strain_vorticity(grid, u, grad_u=Gu)
    dh = grid.fft(d)
    Gd = grid.gradient(d, dh)
    lap_d = grid.laplacian(d, dh)
    gd2 = np.sum(Gd**2, axis=(0, 1))
    h = K.molecular_field(d, lap_d, gd2, mode, epsilon)
    Ad = K.matvec(A, d)
    dAd = np.sum(Ad * d[:2], axis=0)
    N = K._corotational(Ad, dAd, h, d, c, mode)
    t = K.KinematicTensors(A, Omega, N, Ad, dAd)

    # momentum: -div(u u) - div(grad d . grad d) + div(sigma^L - mu4 A)
    S = (u[:, None] * u[None, :] + K.ericksen_stress(grid, d, grad_d=Gd)
         - K.leslie_stress(t, d, c, include_newtonian=False))
    mom = -_div_hat(grid, S, mask)

    # director: everything except the implicit (1/|l1|) Lap d
    advect = np.einsum("i...,ik...->k...", u, Gd)
    rhs = -advect + K.lift(K.matvec(Omega, d)) + N - c.gamma * lap_d
    rh = grid.fft(rhs)
    if mask is not None:
        rh = rh * mask
    return _Explicit(mom, rh)


def _check_cfl(grid, u, dt, guard):
    umax = float(np.max(np.sqrt(np.sum(u**2, axis=0))))
    courant = umax * dt / grid.spacing
    if courant > guard:
        raise CFLError(courant, 0.9 * guard * grid.spacing / umax)


def _momentum_update(grid, u, expl, coeffs, dt):
    k2 = -grid.laplacian_symbol
    uh = grid.fft(u) + dt * expl.momentum_hat
    uh = grid.leray_project_hat(uh) / (1.0 + dt * 0.5 * coeffs.mu4 * k2)
    return grid.ifft(uh)


def _director_update(grid, d, expl, coeffs, dt, mode):
    k2 = -grid.laplacian_symbol
    dh = (grid.fft(d) + dt * expl.director_hat) / (1.0 + dt * coeffs.gamma * k2)
    d_new = grid.ifft(dh)
    if mode == K.PROJECTION:
        d_new = d_new / np.sqrt(np.sum(d_new**2, axis=0))
    return d_new


def _gl_advisory(config):
    if config.mode == K.GINZBURG_LANDAU and config.dt > GL_STIFFNESS * config.epsilon**2:
        warnings.warn(f"dt = {config.dt:g} exceeds {GL_STIFFNESS:g} * epsilon^2 = "
                      f"{GL_STIFFNESS * config.epsilon**2:g}; the explicit penalty may be stiff",
                      RuntimeWarning, stacklevel=3)


def momentum_step(grid: TorusGrid, state: FlowState, coeffs: LeslieCoefficients,
                  dt: float, config: SolverConfig | None = None) -> np.ndarray:
    """Velocity after one IMEX step (director held at ``state.d``)."""
    config = config or SolverConfig(dt=dt)
    _check_cfl(grid, state.u, dt, config.cfl_guard)
    expl = _explicit_terms(grid, state.u, state.d, coeffs, config.mode, config.epsilon,
                           config.dealias)
    return _momentum_update(grid, state.u, expl, coeffs, dt)


def director_step(grid: TorusGrid, state: FlowState, coeffs: LeslieCoefficients,
                  dt: float, mode: str = K.PROJECTION, epsilon: float = 0.1,
                  dealias: bool = True) -> np.ndarray:
    """Director after one IMEX step (velocity held at ``state.u``).

    Projection mode renormalizes pointwise; Ginzburg-Landau mode never does.
    """
    cfg = SolverConfig(dt=dt, mode=mode, epsilon=epsilon, dealias=dealias)
    _gl_advisory(cfg)
    expl = _explicit_terms(grid, state.u, state.d, coeffs, mode, epsilon, dealias)
    return _director_update(grid, state.d, expl, coeffs, dt, mode)


def advance(grid: TorusGrid, state: FlowState, coeffs: LeslieCoefficients,
            config: SolverConfig) -> FlowState:
    """One full step; both sub-steps use the explicit terms of ``state``."""
    dt = config.dt
    _check_cfl(grid, state.u, dt, config.cfl_guard)
    expl = _explicit_terms(grid, state.u, state.d, coeffs, config.mode, config.epsilon,
                           config.dealias)
    new = FlowState(_momentum_update(grid, state.u, expl, coeffs, dt),
                    _director_update(grid, state.d, expl, coeffs, dt, config.mode),
                    state.t + dt)
    if not new.is_finite():
        raise NumericalAbort(f"non-finite values at t = {new.t:g}", state)
    return new


def recover_pressure(grid: TorusGrid, u: np.ndarray, d: np.ndarray,
                     coeffs: LeslieCoefficients, mode: str = K.PROJECTION,
                     epsilon: float | None = None, dealias: bool = False) -> np.ndarray:
    """Zero-mean pressure from ``Lap P = div[-div(u u + grad d . grad d - sigma^L)]``."""
    mask = grid.dealias_mask if dealias else None
    t = K.kinematic_tensors(grid, u, d, coeffs, mode, epsilon)
    S = u[:, None] * u[None, :] + K.ericksen_stress(grid, d) - K.leslie_stress(t, d, coeffs)
    force_hat = -_div_hat(grid, S, mask)
    return grid.ifft(grid.solve_poisson_hat(grid.divergence_hat(force_hat)))


Hook = Callable[[FlowState, int], None]


def run(grid: TorusGrid, initial: FlowState, coeffs: LeslieCoefficients,
        config: SolverConfig, hooks: Iterable[tuple[int, Hook]] = (),
        ledger_every: int = 1, scan_radii: Iterable[float] = (),
        threshold: float = 8 * np.pi, flag_tol: float = 0.01):
    """Advance ``config.steps`` times, recording an energy ledger.

    ``hooks`` are ``(every, callback)`` pairs; ``callback(state, step)``
    runs at step 0 and every ``every`` steps after.  The ledger gets a row
    at step 0, every ``ledger_every`` steps and at the final step.  On a
    non-finite state :class:`NumericalAbort` is raised carrying the last
    good state and the ledger so far.
    """
    from .diagnostics import EnergyLedger, concentration_scan, ledger_row

    if ledger_every < 1:
        raise ValueError("ledger_every must be >= 1")
    hooks = [(int(every), fn) for every, fn in hooks]
    scan_radii = list(scan_radii)
    _gl_advisory(config)

    ledger = EnergyLedger()
    state = initial.copy()

    def record(st, step):
        ledger.append(ledger_row(grid, st, coeffs, config.mode, config.epsilon))
        for r in scan_radii:
            ledger.flags.extend(concentration_scan(grid, st, r, threshold, flag_tol))

    record(state, 0)
    for every, fn in hooks:
        fn(state, 0)
    for step in range(1, config.steps + 1):
        try:
            state = advance(grid, state, coeffs, config)
        except (NumericalAbort, CFLError) as exc:
            exc.ledger = ledger
            exc.step = step
            exc.state = state
            raise
        if step % ledger_every == 0 or step == config.steps:
            record(state, step)
        for every, fn in hooks:
            if every > 0 and step % every == 0:
                fn(state, step)
    return state, ledger
