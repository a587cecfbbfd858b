"""Spectral-bound estimation with the sign-flip Lanczos recurrence.

H is self-adjoint in the inner product <x, y> = x* (S H) y, which is
positive definite for the problems we solve.  Every inner product in the
recurrence is therefore an ordinary dot product against a sign-flipped
matrix-vector product, e.g. <q, H q> = (S H q)* (H q); one multiplication
by H per step suffices.  The resulting tridiagonal is real symmetric and
its Ritz values approximate the (real) spectrum of H from a random start.

The spectrum is symmetric about zero, so the step count is kept even, the
upper bound is the reflection mu_n = -mu_1, and the density cutoff
mu_nevex integrates the Ritz-weight distribution over the negative axis
only.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg as sla

from . import rng
from .errors import IndefiniteError, LanczosBreakdownError, ValidationError
from .hamiltonian import BseHamiltonian, apply_h, apply_s
from .metrics import PhaseLedger

#: Extreme bound inflation: widens the filter interval by 1% of |mu_1| so
#: the damped region safely covers the unwanted spectrum.
SAFETY_INFLATION = 0.01

#: Breakdown restarts; attempt r draws its start from substream(seed, r).
MAX_RESTARTS = 3


@dataclass(frozen=True)
class SpectralBounds:
    """Filter interval data: mu_1 <= mu_nevex <= mu_n with mu_n = -mu_1."""

    mu_1: float
    mu_nevex: float
    mu_n: float
    steps: int
    ritz_values: np.ndarray
    ritz_weights: np.ndarray

    @property
    def nodes(self) -> list[tuple[float, float]]:
        """(theta_i, tau_i^2) pairs of the density surrogate."""
        return list(zip(self.ritz_values.tolist(), self.ritz_weights.tolist()))


def _tridiagonal_pass(
    ham: BseHamiltonian, start: np.ndarray, steps: int, ledger: PhaseLedger | None
) -> tuple[np.ndarray, np.ndarray, bool]:
    """One Lanczos sweep; returns (alphas, betas, broke_down_early)."""
    n = ham.n
    hr = apply_h(ham, start, ledger, "lanczos")
    norm2 = np.real(np.vdot(apply_s(hr), start))
    if norm2 <= 0:
        raise IndefiniteError(
            "start vector has non-positive S*H norm; matrix is not definite"
        )
    scale = np.sqrt(norm2)
    q = start / scale
    z = hr / scale
    q_prev = np.zeros(n, dtype=np.complex128)
    beta_prev = 0.0
    alphas: list[float] = []
    betas: list[float] = []
    for j in range(steps):
        alphas.append(float(np.real(np.vdot(apply_s(z), z))))
        if j == steps - 1:
            break
        w = z - alphas[-1] * q - beta_prev * q_prev
        g = apply_h(ham, w, ledger, "lanczos")
        beta2 = float(np.real(np.vdot(apply_s(g), w)))
        running = max(1.0, max(abs(a) for a in alphas), beta_prev)
        if beta2 <= (1e-14 * running) ** 2:
            # invariant subspace found (or numerical loss); stop this sweep
            break
        beta = np.sqrt(beta2)
        betas.append(beta)
        q_prev, q = q, w / beta
        z = g / beta
        beta_prev = beta
    broke_early = len(alphas) < steps
    return np.array(alphas), np.array(betas), broke_early


def estimate_bounds(
    ham: BseHamiltonian,
    nevex: int,
    steps: int = 24,
    seed: int = 0,
    ledger: PhaseLedger | None = None,
) -> SpectralBounds:
    """Estimate mu_1, mu_nevex and mu_n from a few Lanczos steps.

    mu_1 is the smallest Ritz value inflated by SAFETY_INFLATION, mu_n its
    reflection, and mu_nevex the density cutoff where the cumulative Ritz
    weight over the negative nodes reaches nevex/n.  Breakdown before 4
    completed steps restarts from a fresh seeded vector, at most
    MAX_RESTARTS times.
    """
    if steps < 2 or steps % 2:
        raise ValidationError(f"steps must be even and >= 2, got {steps}")
    if nevex < 0 or nevex > ham.n // 2:
        raise ValidationError(f"nevex must lie in [0, n/2], got {nevex}")

    alphas = np.empty(0)
    betas = np.empty(0)
    for attempt in range(MAX_RESTARTS + 1):
        start = rng.complex_normals(rng.substream(seed, attempt), ham.n)
        alphas, betas, broke_early = _tridiagonal_pass(ham, start, steps, ledger)
        if not broke_early or len(alphas) >= min(4, steps):
            break
    if len(alphas) < min(4, steps):
        raise LanczosBreakdownError(
            f"Lanczos broke down before {min(4, steps)} steps on "
            f"{MAX_RESTARTS + 1} start vectors"
        )
    if len(alphas) % 2:  # keep the even-step convention after truncation
        alphas = alphas[:-1]
        betas = betas[: len(alphas) - 1]

    theta, y = sla.eigh_tridiagonal(alphas, betas)
    weights = y[0, :] ** 2

    theta_min = float(theta[0])
    mu_1 = theta_min - SAFETY_INFLATION * abs(theta_min)
    mu_n = -mu_1
    mu_nevex = _density_cutoff(theta, weights, nevex, ham.n)
    mu_nevex = float(min(max(mu_nevex, mu_1), mu_n))
    return SpectralBounds(
        mu_1=mu_1,
        mu_nevex=mu_nevex,
        mu_n=mu_n,
        steps=len(alphas),
        ritz_values=theta,
        ritz_weights=weights,
    )


def _density_cutoff(theta: np.ndarray, weights: np.ndarray, nevex: int, n: int) -> float:
    """Cutoff where the cumulative Ritz weight reaches nevex/n.

    The crossing is located on the negative nodes; the cutoff is then the
    midpoint between the crossing node and its upper neighbor, so that the
    boundary falls between Ritz clusters rather than on top of one (a node
    sits at the deep end of the cluster it represents, and a cutoff on the
    node itself would leave the boundary eigenvectors with no filter
    contrast).
    """
    negative = theta < 0
    if not negative.any():
        return 0.0
    target = nevex / n
    cumulative = np.cumsum(weights[negative])
    crossed = np.nonzero(cumulative >= target)[0]
    j = int(crossed[0]) if crossed.size else int(negative.sum()) - 1
    if j + 1 < theta.shape[0]:
        return float((theta[j] + theta[j + 1]) / 2.0)
    return float(theta[j])


def update_cutoff(bounds: SpectralBounds, nonconverged_ritz) -> SpectralBounds:
    """Replace mu_nevex by the largest non-converged Ritz value.

    mu_1 and mu_n stay fixed for the whole solve; the new cutoff may move
    in either direction.  A candidate at or above mu_n would make the
    damped interval empty and is ignored in favor of the current cutoff.
    """
    values = np.asarray(nonconverged_ritz, dtype=np.float64)
    if values.size == 0:
        raise ValidationError("update_cutoff needs at least one Ritz value")
    candidate = float(values.max())
    if not candidate < bounds.mu_n:
        return bounds
    candidate = max(candidate, bounds.mu_1)
    return replace(bounds, mu_nevex=candidate)
