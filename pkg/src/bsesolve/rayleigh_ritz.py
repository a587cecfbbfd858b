"""Oblique Rayleigh-Ritz extraction, residuals, locking and diagnostics.

Both variants project with a dual basis of the form
Q_L = [S Q - Q (Q*SQ - M)] M^{-1}, which satisfies Q_L* Q = I for any
nonsingular M:

* hermitian-equivalent variant: M = Q*SQ, so Q_L = SQ (Q*SQ)^{-1} and the
  reduced operator (Q*SQ)^{-1} Q*SHQ is diagonalized through the Cholesky
  factor of Q*SHQ as a hermitian problem.  Neither Q_L nor the inverse is
  ever formed.
* backup variant: M = diag(Q*SQ) (zero entries replaced by 1), giving a
  genuinely non-hermitian reduced operator handled by a general dense
  eigensolver; only the real parts of its eigenvalues are kept.  Used when
  the hermitian-equivalent route fails.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .direct import cond_of_h, dense_general_eig, dense_hermitian_eig, rho_sh
from .errors import HermitianRqError, ValidationError
from .hamiltonian import BseHamiltonian, apply_h, apply_s, materialize
from .metrics import PhaseLedger

#: |lambda_min(Q*SQ)| below this (its spectrum lives in [-1, 1]) is treated
#: as singular and routes to the backup variant.
M_SINGULARITY_TOL = 1e-8

#: Entries of diag(Q*SQ) at or below this magnitude are replaced by 1 in the
#: backup variant, which keeps the projection property intact.
DIAG_ZERO_TOL = 1e-12

#: Matrices this size or smaller get exact ||H - lam I||_2 in diagnostics.
_EXACT_NORM_LIMIT = 1024


@dataclass
class ReducedProblem:
    """Reduced k x k data of one projection; l and d depend on the variant."""

    variant: str
    w: np.ndarray
    l: np.ndarray | None
    m: np.ndarray
    g: np.ndarray
    d: np.ndarray | None
    lambda_min_m: float


@dataclass
class RitzSet:
    """Ritz values (ascending, real), unit Ritz vectors and their residuals."""

    values: np.ndarray
    vectors: np.ndarray
    residual_norms: np.ndarray | None = None
    converged: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.values.shape[0]


@dataclass
class ConvergenceDiagnostics:
    """Bounds from the projection analysis; all finite iff Q*SQ is nonsingular."""

    lambda_min_m: float
    delta_tilde_bound: float
    kappa: np.ndarray
    ritz_interval: float
    spurious: np.ndarray
    singular: bool


def _ritz_sorted(values: np.ndarray, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(values, kind="stable")
    return values[order], vectors[:, order]


def _lambda_min_m(mqsq: np.ndarray) -> tuple[float, np.ndarray]:
    eigs = np.linalg.eigvalsh(mqsq)
    return float(np.abs(eigs).min()), eigs


def _form_m(q: np.ndarray) -> np.ndarray:
    """Q*SQ computed as I - 2 Q2*Q2 (hermitian by construction)."""
    k = q.shape[1]
    q2 = q[q.shape[0] // 2:]
    m = np.eye(k) - 2.0 * (q2.conj().T @ q2)
    return (m + m.conj().T) / 2.0


def build_hermitian_rq(
    ham: BseHamiltonian,
    q_active: np.ndarray,
    ledger: PhaseLedger | None = None,
) -> tuple[RitzSet, ReducedProblem]:
    """Hermitian-equivalent projection onto the active columns.

    Solves L^{-1} (Q*SQ) L^{-*} y = theta y with L the Cholesky factor of
    W = Q*SHQ, then back-transforms: Ritz values 1/theta and Ritz vectors
    Q L^{-*} y, normalized.  Raises HermitianRqError when W is not positive
    definite on the subspace or |lambda_min(Q*SQ)| < M_SINGULARITY_TOL.
    """
    q = np.asarray(q_active, dtype=np.complex128)
    n, k = q.shape
    t = apply_s(apply_h(ham, q, ledger, "rr"))
    w = q.conj().T @ t
    w = (w + w.conj().T) / 2.0
    mqsq = _form_m(q)
    lam_min_m, _ = _lambda_min_m(mqsq)
    if lam_min_m < M_SINGULARITY_TOL:
        raise HermitianRqError(
            f"|lambda_min(Q*SQ)| = {lam_min_m:.3e} below {M_SINGULARITY_TOL:.0e}"
        )
    try:
        ell = sla.cholesky(w, lower=True)
    except sla.LinAlgError as exc:
        raise HermitianRqError(
            "Cholesky of Q*SHQ failed; S*H is not definite on the subspace"
        ) from exc
    g = sla.solve_triangular(ell, mqsq, lower=True)
    g = sla.solve_triangular(ell, g.conj().T, lower=True).conj().T
    g = (g + g.conj().T) / 2.0
    theta, y = dense_hermitian_eig(g)
    if np.abs(theta).min() < np.finfo(float).eps:
        raise HermitianRqError("reduced spectrum touches zero; cannot invert")
    lam = 1.0 / theta
    wvec = sla.solve_triangular(ell.conj().T, y, lower=False)
    vectors = q @ wvec
    vectors /= np.linalg.norm(vectors, axis=0)
    lam, vectors = _ritz_sorted(lam, vectors)
    if ledger is not None:
        ledger.add_flops("rr", 8.0 * n * n * k + 12.0 * n * k * k + 16.0 * k**3)
    reduced = ReducedProblem(
        variant="hermitian", w=w, l=ell, m=mqsq, g=g, d=None, lambda_min_m=lam_min_m
    )
    return RitzSet(values=lam, vectors=vectors), reduced


def build_backup_rq(
    ham: BseHamiltonian,
    q_active: np.ndarray,
    ledger: PhaseLedger | None = None,
) -> tuple[RitzSet, ReducedProblem]:
    """Non-hermitian backup projection with M = diag(Q*SQ).

    G = Diag(d) [Q*SHQ - (Q*SQ - diag(Q*SQ)) Q*HQ] with d the entrywise
    inverse of diag(Q*SQ) after zero entries are replaced by 1.  The
    general eigensolver may return complex values; only their real parts
    are kept.  Exact on invariant subspaces of H.
    """
    q = np.asarray(q_active, dtype=np.complex128)
    n, k = q.shape
    t = apply_h(ham, q, ledger, "rr")
    w = q.conj().T @ t
    mqsq = _form_m(q)
    lam_min_m, _ = _lambda_min_m(mqsq)
    dvec = np.real(np.diag(mqsq)).copy()
    dvec[np.abs(dvec) <= DIAG_ZERO_TOL] = 1.0
    off = mqsq - np.diag(np.diag(mqsq))
    g0 = q.conj().T @ apply_s(t)
    g = (g0 - off @ w) / dvec[:, None]
    values, y = dense_general_eig(g)
    lam = values.real.copy()
    vectors = q @ y
    vectors /= np.linalg.norm(vectors, axis=0)
    lam, vectors = _ritz_sorted(lam, vectors)
    if ledger is not None:
        ledger.add_flops("rr", 8.0 * n * n * k + 20.0 * n * k * k + 30.0 * k**3)
    reduced = ReducedProblem(
        variant="backup", w=w, l=None, m=mqsq, g=g, d=dvec, lambda_min_m=lam_min_m
    )
    return RitzSet(values=lam, vectors=vectors), reduced


def residuals(
    ham: BseHamiltonian,
    ritz: RitzSet,
    ledger: PhaseLedger | None = None,
) -> np.ndarray:
    """Absolute residual 2-norms ||H v - lam v||_2, stored on the RitzSet."""
    r = apply_h(ham, ritz.vectors, ledger, "residuals") - ritz.vectors * ritz.values
    ritz.residual_norms = np.linalg.norm(r, axis=0)
    return ritz.residual_norms


def lock_converged(
    ritz: RitzSet,
    tol: float,
    nev: int,
    normalizer: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Split the (ascending) Ritz set into newly locked and active indices.

    A pair locks only when every smaller Ritz value converges with it: the
    locked set is the longest converged prefix, capped at nev entries (the
    window of candidates for the requested smallest eigenvalues).  Interior
    converged pairs above a non-converged one stay active.
    """
    if ritz.residual_norms is None:
        raise ValidationError("residuals must be computed before locking")
    threshold = tol * normalizer
    converged = ritz.residual_norms <= threshold
    ritz.converged = converged
    count = 0
    while count < ritz.k and count < nev and converged[count]:
        count += 1
    return np.arange(count), np.arange(count, ritz.k)


def diagnostics(
    ham: BseHamiltonian,
    q_active: np.ndarray,
    ritz: RitzSet,
    cond_h: float | None = None,
) -> ConvergenceDiagnostics:
    """Projection-quality bounds for one iterate.

    kappa_i = sqrt(cond(H)) ||H - lam_i I||_2 / |lambda_min(Q*SQ)| governs
    the quadratic Ritz-value error, and every non-spurious Ritz value lies
    in +- rho(SH)/|lambda_min(Q*SQ)|.  Singular Q*SQ yields infinite bounds
    and the singular flag.
    """
    q = np.asarray(q_active, dtype=np.complex128)
    mqsq = _form_m(q)
    lam_min_m, _ = _lambda_min_m(mqsq)
    radius = rho_sh(ham)
    singular = lam_min_m < M_SINGULARITY_TOL
    if cond_h is None:
        cond_h = cond_of_h(ham)
    if ham.n <= _EXACT_NORM_LIMIT:
        dense = materialize(ham)
        shift_norms = np.array(
            [sla.svdvals(dense - lam * np.eye(ham.n))[0] for lam in ritz.values]
        )
    else:
        shift_norms = radius + np.abs(ritz.values)
    if singular:
        interval = np.inf
        kappa = np.full(ritz.k, np.inf)
        delta_bound = np.inf
    else:
        interval = radius / lam_min_m
        kappa = np.sqrt(cond_h) * shift_norms / lam_min_m
        delta_bound = np.sqrt(cond_h) / lam_min_m
    spurious = np.abs(ritz.values) > interval * (1.0 + 1e-12)
    return ConvergenceDiagnostics(
        lambda_min_m=lam_min_m,
        delta_tilde_bound=delta_bound,
        kappa=kappa,
        ritz_interval=interval,
        spurious=spurious,
        singular=singular,
    )


def dual_basis_explicit(q_active: np.ndarray, m_choice: str = "full") -> np.ndarray:
    """Explicit dual basis [SQ - Q (Q*SQ - M)] M^{-1} (test/verification only).

    m_choice "full" uses M = Q*SQ (must be nonsingular); "diagonal" uses
    M = diag(Q*SQ) with zero entries replaced by 1.  In both cases
    Q_L* Q = I; for the full choice ||Q_L||_2 = 1/|lambda_min(Q*SQ)|.
    """
    q = np.asarray(q_active, dtype=np.complex128)
    sq = apply_s(q)
    mqsq = _form_m(q)
    if m_choice == "full":
        lam_min_m, _ = _lambda_min_m(mqsq)
        if lam_min_m <= DIAG_ZERO_TOL:
            raise ValidationError(f"Q*SQ is singular (|lambda|_min = {lam_min_m:.3e})")
        return np.linalg.solve(mqsq.T, sq.T).T
    if m_choice == "diagonal":
        dvec = np.real(np.diag(mqsq)).copy()
        dvec[np.abs(dvec) <= DIAG_ZERO_TOL] = 1.0
        m_used = np.diag(dvec.astype(np.complex128))
        return (sq - q @ (mqsq - m_used)) / dvec[None, :]
    raise ValidationError(f"m_choice must be 'full' or 'diagonal', got {m_choice!r}")
