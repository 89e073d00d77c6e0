"""Pointwise tensor algebra of the planar Ericksen-Leslie system.

Conventions (index 0 is x, 1 is y):

* ``(grad u)[i, j] = d_i u_j``, split as ``A + Omega`` with
  ``A_ij = (d_i u_j + d_j u_i)/2`` and ``Omega_ij = (d_i u_j - d_j u_i)/2``.
* ``(Omega d)_i = sum_j Omega_ij d_j`` acts on the planar part ``d_hat``
  and is lifted to 3-vectors with a zero third component; likewise ``A d``.
* Divergence of a 2-tensor contracts the first index,
  ``(div S)_j = sum_i d_i S_ij``, so that ``int u . div S = -int S : grad u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import TorusGrid
from .params import CoefficientError, LeslieCoefficients

PROJECTION = "projection"
GINZBURG_LANDAU = "ginzburg_landau"
MODES = (PROJECTION, GINZBURG_LANDAU)


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _require_valid_lambda1(coeffs: LeslieCoefficients):
    if not coeffs.lambda1 < 0:
        raise CoefficientError(f"lambda1 = {coeffs.lambda1:g} must be negative")


@dataclass(frozen=True)
class KinematicTensors:
    A: np.ndarray          # (2, 2, n, n) symmetric
    Omega: np.ndarray      # (2, 2, n, n) skew
    N: np.ndarray          # (3, n, n)
    Ad_hat: np.ndarray     # (2, n, n)
    dAd: np.ndarray        # (n, n)


def strain_vorticity(grid: TorusGrid, u: np.ndarray, grad_u: np.ndarray | None = None):
    """Rate of strain ``A`` and skew part ``Omega`` of ``grad u``."""
    if u.shape[0] != 2:
        raise ValueError(f"velocity must have 2 components, got shape {u.shape}")
    G = grid.gradient(u) if grad_u is None else grad_u
    Gt = G.swapaxes(0, 1)
    return 0.5 * (G + Gt), 0.5 * (G - Gt)


def matvec(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``(M v)_i = sum_j M_ij v_j`` for a 2x2 field and the planar part of ``v``."""
    return np.einsum("ij...,j...->i...", M, v[:2])


def lift(v2: np.ndarray) -> np.ndarray:
    """Embed a planar field as a 3-vector with zero third component."""
    return np.concatenate([v2, np.zeros_like(v2[:1])])


def director_gradient_terms(grid: TorusGrid, d: np.ndarray):
    """Return ``(grad d, Lap d, |grad d|^2)`` from a single forward transform."""
    dh = grid.fft(d)
    grad_d = grid.gradient(d, dh)
    lap_d = grid.laplacian(d, dh)
    return grad_d, lap_d, np.sum(grad_d**2, axis=(0, 1))


def tension_field(grid: TorusGrid, d: np.ndarray) -> np.ndarray:
    """``Lap d + |grad d|^2 d``; vanishes exactly on harmonic maps into S^2."""
    _, lap_d, gd2 = director_gradient_terms(grid, d)
    return lap_d + gd2 * d


def molecular_field(d, lap_d, grad_d_sq, mode=PROJECTION, epsilon=None):
    """Elastic driving field of the director equation.

    Projection mode: the tension field ``Lap d + |grad d|^2 d``.
    Ginzburg-Landau mode: ``Lap d + eps^-2 (1 - |d|^2) d``.
    """
    _check_mode(mode)
    if mode == PROJECTION:
        return lap_d + grad_d_sq * d
    if epsilon is None or not epsilon > 0:
        raise ValueError("Ginzburg-Landau mode needs epsilon > 0")
    return lap_d + (1.0 - np.sum(d**2, axis=0)) * d / epsilon**2


def _corotational(A_dhat, dAd, h, d, coeffs, mode):
    # N = -(l2/l1)(A d_hat, 0) + (1/|l1|) h [+ (l2/l1)(d^T A d) d  in projection mode]
    r = coeffs.ratio
    N = coeffs.gamma * h - r * lift(A_dhat)
    if mode == PROJECTION:
        N = N + r * dAd * d
    return N


def corotational_N(grid: TorusGrid, u: np.ndarray, d: np.ndarray,
                   coeffs: LeslieCoefficients, mode: str = PROJECTION,
                   epsilon: float | None = None) -> np.ndarray:
    """Co-rotational director rate ``N = d_t d + u.grad d - Omega d``.

    Evaluated without a time derivative by substituting the director
    equation, so ``N`` is a local function of ``(u, d)``.
    """
    return kinematic_tensors(grid, u, d, coeffs, mode, epsilon).N


def kinematic_tensors(grid: TorusGrid, u: np.ndarray, d: np.ndarray,
                      coeffs: LeslieCoefficients, mode: str = PROJECTION,
                      epsilon: float | None = None) -> KinematicTensors:
    _require_valid_lambda1(coeffs)
    A, Omega = strain_vorticity(grid, u)
    _, lap_d, gd2 = director_gradient_terms(grid, d)
    h = molecular_field(d, lap_d, gd2, mode, epsilon)
    Ad = matvec(A, d)
    dAd = np.sum(Ad * d[:2], axis=0)
    N = _corotational(Ad, dAd, h, d, coeffs, mode)
    return KinematicTensors(A, Omega, N, Ad, dAd)


def leslie_stress(t: KinematicTensors, d: np.ndarray, coeffs: LeslieCoefficients,
                  include_newtonian: bool = True) -> np.ndarray:
    """Planar Leslie stress ``sigma^L_ij``, ``1 <= i, j <= 2``.

    With ``include_newtonian=False`` the ``mu4 A`` part is left out (the
    solver integrates it implicitly).
    """
    c = coeffs
    dh = d[:2]
    Nh = t.N[:2]
    outer = lambda a, b: a[:, None] * b[None, :]  # noqa: E731
    s = c.mu1 * t.dAd * outer(dh, dh)
    s = s + c.mu2 * outer(Nh, dh) + c.mu3 * outer(dh, Nh)
    s = s + c.mu5 * outer(t.Ad_hat, dh) + c.mu6 * outer(dh, t.Ad_hat)
    if include_newtonian:
        s = s + c.mu4 * t.A
    return s


def ericksen_stress(grid: TorusGrid, d: np.ndarray, grad_d: np.ndarray | None = None) -> np.ndarray:
    """``(grad d . grad d)_ij = <d_i d, d_j d>`` summed over director components."""
    G = grid.gradient(d) if grad_d is None else grad_d
    return np.einsum("ik...,jk...->ij...", G, G)


def director_rhs(grid: TorusGrid, u: np.ndarray, d: np.ndarray,
                 coeffs: LeslieCoefficients, mode: str = PROJECTION,
                 epsilon: float | None = None) -> np.ndarray:
    """Full right-hand side of the director equation, ``d_t d = ...``.

    Projection: ``-u.grad d + Omega d - (l2/l1) A d + (1/|l1|)(Lap d + |grad d|^2 d)
    + (l2/l1)(d^T A d) d``.  Ginzburg-Landau replaces the elastic part by
    ``(1/|l1|)(Lap d + eps^-2 (1 - |d|^2) d)`` and drops the last term.
    """
    _check_mode(mode)
    _require_valid_lambda1(coeffs)
    grad_d, lap_d, gd2 = director_gradient_terms(grid, d)
    A, Omega = strain_vorticity(grid, u)
    h = molecular_field(d, lap_d, gd2, mode, epsilon)
    Ad = matvec(A, d)
    dAd = np.sum(Ad * d[:2], axis=0)
    N = _corotational(Ad, dAd, h, d, coeffs, mode)
    advect = np.einsum("i...,ik...->k...", u, grad_d)
    return -advect + lift(matvec(Omega, d)) + N


def stress_power_identity(grid: TorusGrid, u: np.ndarray, d: np.ndarray,
                          coeffs: LeslieCoefficients, eta: np.ndarray | float = 1.0):
    """Both sides of the stress-power identity.

    ``lhs = int eta^2 sigma^L : grad u`` straight from the stress, and
    ``rhs = int eta^2 [mu1 (A:dd)^2 + mu4 |A|^2 + (mu5+mu6)|A d|^2
    + l1 N.(Omega d) - l2 N.(A d) + l2 (A d).(Omega d)]``.
    They agree whenever Parodi's relation holds.
    """
    c = coeffs
    G = grid.gradient(u)
    A, Omega = strain_vorticity(grid, u, grad_u=G)
    Ad = matvec(A, d)
    dAd = np.sum(Ad * d[:2], axis=0)
    if c.mu2 == 0 and c.mu3 == 0:
        # no director coupling (Parodi then forces lambda2 = 0): N carries zero weight
        N = np.zeros_like(d)
    else:
        _require_valid_lambda1(c)
        _, lap_d, gd2 = director_gradient_terms(grid, d)
        h = molecular_field(d, lap_d, gd2)
        N = _corotational(Ad, dAd, h, d, c, PROJECTION)
    t = KinematicTensors(A, Omega, N, Ad, dAd)
    w = np.asarray(eta) ** 2

    sigma = leslie_stress(t, d, c)
    lhs = grid.integrate(w * np.sum(sigma * G, axis=(0, 1)))

    Od = matvec(Omega, d)
    Nh = N[:2]
    dens = (c.mu1 * dAd**2 + c.mu4 * np.sum(A**2, axis=(0, 1))
            + (c.mu5 + c.mu6) * np.sum(Ad**2, axis=0)
            + c.lambda1 * np.sum(Nh * Od, axis=0)
            - c.lambda2 * np.sum(Nh * Ad, axis=0)
            + c.lambda2 * np.sum(Ad * Od, axis=0))
    rhs = grid.integrate(w * dens)
    return float(lhs), float(rhs)


def dissipation_functionals(grid: TorusGrid, u: np.ndarray, d: np.ndarray,
                            coeffs: LeslieCoefficients, mode: str = PROJECTION,
                            epsilon: float | None = None):
    """``(D_visc, D_dir, D_align1, D_align2)`` of the global energy balance.

    ``dE/dt = -(D_visc + D_dir + D_align1 + D_align2)`` for smooth
    solutions with ``|d| = 1``, where ``E = int |u|^2 + |grad d|^2``.

    In Ginzburg-Landau mode the same split holds for the penalized energy
    ``int |u|^2 + |grad d|^2 + (1 - |d|^2)^2 / (2 eps^2)``, with the
    tension field replaced by ``Lap d + eps^-2 (1 - |d|^2) d`` and the
    first alignment weight reduced to ``mu1``.
    """
    c = coeffs
    G = grid.gradient(u)
    A, _ = strain_vorticity(grid, u, grad_u=G)
    _, lap_d, gd2 = director_gradient_terms(grid, d)
    h = molecular_field(d, lap_d, gd2, mode, epsilon)
    Ad = matvec(A, d)
    dAd = np.sum(Ad * d[:2], axis=0)
    w1 = c.alignment_weight_1 if mode == PROJECTION else c.mu1
    D_visc = c.mu4 * grid.integrate(np.sum(G**2, axis=(0, 1)))
    D_dir = 2 * c.gamma * grid.integrate(np.sum(h**2, axis=0))
    D_align1 = 2 * w1 * grid.integrate(dAd**2)
    D_align2 = 2 * c.alignment_weight_2 * grid.integrate(np.sum(Ad**2, axis=0))
    return float(D_visc), float(D_dir), float(D_align1), float(D_align2)
