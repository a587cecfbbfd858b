"""Outer subspace iteration: filter, orthonormalize, project, lock.

One solve owns all of its mutable state and is deterministic per seed.
Each iteration filters only the non-locked columns, orthonormalizes them
against the sign-flipped locked vectors, extracts Ritz pairs with the
hermitian-equivalent projection (falling back to the non-hermitian one on
its rare failures), locks the converged smallest pairs and tightens the
filter cutoff from the largest non-converged Ritz value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .chebyshev import FilterConfig, chebyshev_filter
from .errors import IndefiniteError, NumericalError, ValidationError
from .hamiltonian import (
    BseHamiltonian,
    Definiteness,
    apply_k,
    apply_s,
    is_definite,
)
from .lanczos import SpectralBounds, estimate_bounds, update_cutoff
from .metrics import PhaseLedger
from .ortho import s_orthonormalize
from .rayleigh_ritz import (
    HermitianRqError,
    build_backup_rq,
    build_hermitian_rq,
    lock_converged,
    residuals,
)

logger = logging.getLogger(__name__)

#: rng substream tags of one solve (the generator owns tags 0 and 1).
TAG_LANCZOS = 2
TAG_SUBSPACE = 3


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters; nex defaults to nev and deg must be even."""

    nev: int
    nex: int | None = None
    deg: int = 20
    tol: float = 1e-8
    maxiter: int = 25
    rr_variant: str = "auto"
    seed: int = 0
    lanczos_steps: int = 24
    rel_res: bool = False
    reproducible: bool = True
    plain_kernel_only: bool = False

    @property
    def nevex(self) -> int:
        return self.nev + (self.nev if self.nex is None else self.nex)

    def validate(self, n: int) -> None:
        if self.nev < 1:
            raise ValidationError(f"nev must be >= 1, got {self.nev}")
        if self.nex is not None and self.nex < 0:
            raise ValidationError(f"nex must be >= 0, got {self.nex}")
        if self.nevex > n // 2:
            raise ValidationError(
                f"nev + nex = {self.nevex} exceeds n/2 = {n // 2}"
            )
        if self.deg < 2 or self.deg % 2:
            raise ValidationError(f"deg must be even and >= 2, got {self.deg}")
        if not self.tol > 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.maxiter < 1:
            raise ValidationError(f"maxiter must be >= 1, got {self.maxiter}")
        if self.rr_variant not in ("auto", "hermitian", "backup"):
            raise ValidationError(
                f"rr_variant must be auto, hermitian or backup, got {self.rr_variant!r}"
            )
        if self.lanczos_steps < 2 or self.lanczos_steps % 2:
            raise ValidationError(
                f"lanczos_steps must be even and >= 2, got {self.lanczos_steps}"
            )


@dataclass
class TraceRecord:
    """One row of the per-iteration trace (CSV columns in this order)."""

    it: int
    locked: int
    k: int
    max_res: float
    min_res_unlocked: float
    mu_nevex: float
    variant: str
    lambda_min_m: float
    flops: float


@dataclass
class SolveResult:
    """The nev smallest eigenpairs plus full run provenance."""

    lambdas: np.ndarray
    v: np.ndarray
    residual_norms: np.ndarray
    iterations_used: int
    converged: bool
    trace: list[TraceRecord]
    bounds: SpectralBounds
    ledger: PhaseLedger = field(default_factory=PhaseLedger)
    backup_events: int = 0

    @property
    def nev(self) -> int:
        return self.lambdas.shape[0]


def solve(ham: BseHamiltonian, cfg: SolverConfig) -> SolveResult:
    """Compute the cfg.nev smallest eigenpairs of a definite Hamiltonian."""
    cfg.validate(ham.n)
    if is_definite(ham) is not Definiteness.DEFINITE:
        raise IndefiniteError("solver requires S*H positive definite")

    n, nevex, tol = ham.n, cfg.nevex, cfg.tol
    ledger = PhaseLedger()
    with ledger.timing("lanczos"):
        bounds = estimate_bounds(
            ham, nevex, cfg.lanczos_steps, rng.substream(cfg.seed, TAG_LANCZOS), ledger
        )
    normalizer = abs(bounds.mu_1) if cfg.rel_res else 1.0

    vhat = rng.complex_normal_matrix(
        rng.substream(cfg.seed, TAG_SUBSPACE), n, nevex
    )
    locked_vals: list[float] = []
    locked_res: list[float] = []
    locked_y = np.zeros((n, 0), dtype=np.complex128)
    trace: list[TraceRecord] = []
    backup_events = 0
    converged = False
    iterations = 0
    current = bounds

    for it in range(1, cfg.maxiter + 1):
        iterations = it
        flops_before = ledger.total_flops()
        k = nevex - len(locked_vals)

        fcfg = FilterConfig.from_bounds(current, cfg.deg, cfg.plain_kernel_only)
        with ledger.timing("filter"):
            vhat = chebyshev_filter(ham, vhat, fcfg, ledger)
        with ledger.timing("ortho"):
            space, _ = s_orthonormalize(vhat, locked_y, ledger)

        variant = "hermitian"
        with ledger.timing("rr"):
            if cfg.rr_variant == "backup":
                variant = "backup"
                ritz, reduced = build_backup_rq(ham, space.active, ledger)
            else:
                try:
                    ritz, reduced = build_hermitian_rq(ham, space.active, ledger)
                except HermitianRqError as exc:
                    if cfg.rr_variant == "hermitian":
                        raise NumericalError(
                            f"hermitian projection failed at iteration {it} "
                            f"with fallback disabled: {exc}"
                        ) from exc
                    logger.warning(
                        "iteration %d: switching to backup projection (%s)", it, exc
                    )
                    variant = "backup"
                    backup_events += 1
                    ritz, reduced = build_backup_rq(ham, space.active, ledger)

        with ledger.timing("residuals"):
            res = residuals(ham, ritz, ledger)
        new_locked, active_idx = lock_converged(
            ritz, tol, cfg.nev - len(locked_vals), normalizer
        )
        if new_locked.size:
            locked_y = np.concatenate(
                [locked_y, ritz.vectors[:, new_locked]], axis=1
            )
            locked_vals.extend(ritz.values[new_locked])
            locked_res.extend(res[new_locked])

        unlocked_res = res[active_idx]
        trace.append(
            TraceRecord(
                it=it,
                locked=len(locked_vals),
                k=k,
                max_res=float(res.max()),
                min_res_unlocked=float(unlocked_res.min()) if unlocked_res.size else 0.0,
                mu_nevex=current.mu_nevex,
                variant=variant,
                lambda_min_m=reduced.lambda_min_m,
                flops=ledger.total_flops() - flops_before,
            )
        )

        if len(locked_vals) >= cfg.nev:
            converged = True
            break

        vhat = ritz.vectors[:, active_idx]
        still_out = ritz.values[active_idx][~ritz.converged[active_idx]]
        candidates = still_out if still_out.size else ritz.values[active_idx]
        # Ritz values below mu_1 are spurious (near-singular Q*SQ) and are
        # dropped; the targets all lie on the negative axis (nev + nex <=
        # n/2 with a symmetric spectrum), so values above zero clamp the
        # cutoff to 0, which widens the passband to the whole target half
        # axis until the subspace has purged its positive-side components
        candidates = np.minimum(candidates[candidates >= current.mu_1], 0.0)
        if candidates.size:
            current = update_cutoff(current, candidates)

    if converged:
        vals = np.array(locked_vals)
        vecs = locked_y
        resid = np.array(locked_res)
    else:
        # best effort: top up the locked pairs with the best active ones
        missing = cfg.nev - len(locked_vals)
        vals = np.concatenate([locked_vals, ritz.values[active_idx][:missing]])
        vecs = np.concatenate(
            [locked_y, ritz.vectors[:, active_idx[:missing]]], axis=1
        )
        resid = np.concatenate([locked_res, res[active_idx][:missing]])

    order = np.argsort(vals, kind="stable")[: cfg.nev]
    return SolveResult(
        lambdas=vals[order],
        v=vecs[:, order],
        residual_norms=resid[order],
        iterations_used=iterations,
        converged=converged,
        trace=trace,
        bounds=bounds,
        ledger=ledger,
        backup_events=backup_events,
    )


@dataclass
class CompletedSpectrum:
    """Symmetric eigenpair set with left eigenvectors, values ascending."""

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray


def _left_of(v: np.ndarray) -> np.ndarray:
    """Left eigenvectors S v, sign-fixed so that u* v > 0 columnwise."""
    sv = apply_s(v)
    overlap = np.real(np.einsum("ij,ij->j", sv.conj(), v))
    return sv * np.sign(overlap)


def complete_spectrum(result: SolveResult) -> CompletedSpectrum:
    """Mirror the computed pairs across zero via the quadruplet map.

    Each (lam, v) contributes its left partner u = S v (sign-normalized so
    u* v > 0) and the reflected right pair (-lam, K conj(v)) with its own
    left vector; partner residuals equal the original ones.
    """
    v = result.v
    mirrored = apply_k(np.conj(v))
    values = np.concatenate([result.lambdas, -result.lambdas])
    right = np.concatenate([v, mirrored], axis=1)
    left = np.concatenate([_left_of(v), _left_of(mirrored)], axis=1)
    order = np.argsort(values, kind="stable")
    return CompletedSpectrum(
        values=values[order], right=right[:, order], left=left[:, order]
    )


def mirror_largest(result: SolveResult) -> SolveResult:
    """The nev largest eigenpairs, derived from the smallest via (-lam, K conj(v)).

    Residual norms carry over exactly; trace, bounds and ledger still
    describe the underlying smallest-eigenpair run.
    """
    order = np.argsort(-result.lambdas, kind="stable")
    return replace(
        result,
        lambdas=-result.lambdas[order],
        v=apply_k(np.conj(result.v[:, order])),
        residual_norms=result.residual_norms[order],
    )
