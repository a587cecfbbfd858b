"""File formats: Matrix Market blocks, PCHB/PCHV binaries, CSV reports.

All text formats round-trip bit-exactly: floats are written with 17
significant digits, which reparse to the identical double, so
write -> read -> write is byte identical.  Binary layouts are little
endian and column major.  docs/FORMATS.md holds the byte-level contract.
"""

from __future__ import annotations

import hashlib
import json
import struct
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ValidationError
from .hamiltonian import BseHamiltonian, as_complex_matrix
from .solver import SolveResult

_MM_HEADER = "%%MatrixMarket matrix array complex general"
_PCHB_MAGIC = b"PCHB"
_PCHV_MAGIC = b"PCHV"
_FORMAT_VERSION = 1


def digest64(path: str | Path) -> str:
    """64-bit content digest (blake2b-8) as 16 hex characters."""
    h = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------- matrix market

def write_matrix_market(path: str | Path, matrix, comment: str | None = None) -> None:
    """Write one complex matrix as a Matrix Market array file (column major)."""
    a = as_complex_matrix(matrix, "matrix")
    with open(path, "w", newline="\n") as fh:
        fh.write(_MM_HEADER + "\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"%{line}\n")
        fh.write(f"{a.shape[0]} {a.shape[1]}\n")
        for j in range(a.shape[1]):
            for i in range(a.shape[0]):
                z = a[i, j]
                fh.write(f"{z.real:.17e} {z.imag:.17e}\n")


def read_matrix_market(path: str | Path) -> np.ndarray:
    """Read a complex array Matrix Market file written by this package."""
    with open(path) as fh:
        header = fh.readline().strip()
        tokens = header.lower().split()
        if len(tokens) != 5 or tokens[0] != "%%matrixmarket" or tokens[1:] != [
            "matrix", "array", "complex", "general",
        ]:
            raise ValidationError(f"unsupported Matrix Market header: {header!r}")
        line = fh.readline()
        while line.startswith("%"):
            line = fh.readline()
        try:
            rows, cols = (int(t) for t in line.split())
        except ValueError as exc:
            raise ValidationError(f"malformed size line: {line!r}") from exc
        data = np.empty(rows * cols, dtype=np.complex128)
        for idx in range(rows * cols):
            parts = fh.readline().split()
            if len(parts) != 2:
                raise ValidationError(f"malformed entry at index {idx}")
            data[idx] = float(parts[0]) + 1j * float(parts[1])
    return np.asfortranarray(data.reshape((rows, cols), order="F"))


# ------------------------------------------------------------------ pchb binary

def write_pchb(path: str | Path, ham: BseHamiltonian) -> None:
    """Compact binary: magic, version, m, then A and B column major LE."""
    with open(path, "wb") as fh:
        fh.write(_PCHB_MAGIC)
        fh.write(struct.pack("<IQ", _FORMAT_VERSION, ham.m))
        fh.write(np.asfortranarray(ham.a).astype("<c16").tobytes(order="F"))
        fh.write(np.asfortranarray(ham.b).astype("<c16").tobytes(order="F"))


def read_pchb(path: str | Path) -> BseHamiltonian:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _PCHB_MAGIC:
            raise ValidationError(f"not a PCHB file (magic {magic!r})")
        version, m = struct.unpack("<IQ", fh.read(12))
        if version != _FORMAT_VERSION:
            raise ValidationError(f"unsupported PCHB version {version}")
        count = m * m
        a = np.frombuffer(fh.read(16 * count), dtype="<c16", count=count)
        b = np.frombuffer(fh.read(16 * count), dtype="<c16", count=count)
    a = np.asfortranarray(a.reshape((m, m), order="F"))
    b = np.asfortranarray(b.reshape((m, m), order="F"))
    return BseHamiltonian(a, b)


def write_pchv(path: str | Path, vectors: np.ndarray) -> None:
    """Eigenvector dump: magic, version, n, k, data column major LE."""
    v = as_complex_matrix(vectors, "vectors")
    with open(path, "wb") as fh:
        fh.write(_PCHV_MAGIC)
        fh.write(struct.pack("<IQQ", _FORMAT_VERSION, v.shape[0], v.shape[1]))
        fh.write(v.astype("<c16").tobytes(order="F"))


def read_pchv(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _PCHV_MAGIC:
            raise ValidationError(f"not a PCHV file (magic {magic!r})")
        version, n, k = struct.unpack("<IQQ", fh.read(20))
        if version != _FORMAT_VERSION:
            raise ValidationError(f"unsupported PCHV version {version}")
        data = np.frombuffer(fh.read(16 * n * k), dtype="<c16", count=n * k)
    return np.asfortranarray(data.reshape((n, k), order="F"))


# -------------------------------------------------------------------- csv & co.

def write_eigenvalues_csv(
    path: str | Path,
    lambdas,
    residual_norms,
    input_digest: str,
    converged: bool = True,
) -> None:
    """Eigenvalues with 17 significant digits, one row per pair."""
    lambdas = np.asarray(lambdas)
    residual_norms = np.asarray(residual_norms)
    with open(path, "w", newline="\n") as fh:
        fh.write("# bsesolve eigenvalues v1\n")
        fh.write("# manifest: manifest.json\n")
        fh.write(f"# input_digest: {input_digest}\n")
        fh.write(f"# converged: {str(converged).lower()}\n")
        fh.write("index,eigenvalue,residual\n")
        for i, (lam, res) in enumerate(zip(lambdas, residual_norms)):
            fh.write(f"{i},{lam:.17g},{res:.17g}\n")


def write_trace_csv(path: str | Path, result: SolveResult, input_digest: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("# bsesolve trace v1\n")
        fh.write("# manifest: manifest.json\n")
        fh.write(f"# input_digest: {input_digest}\n")
        fh.write(
            f"# mu_1: {result.bounds.mu_1:.17g}\n"
            f"# mu_n: {result.bounds.mu_n:.17g}\n"
            f"# converged: {str(result.converged).lower()}\n"
        )
        fh.write("iter,locked,k,max_res,min_res_unlocked,mu_nevex,variant,lambda_min_M,flops\n")
        for row in result.trace:
            fh.write(
                f"{row.it},{row.locked},{row.k},{row.max_res:.17g},"
                f"{row.min_res_unlocked:.17g},{row.mu_nevex:.17g},{row.variant},"
                f"{row.lambda_min_m:.17g},{row.flops:.0f}\n"
            )


def write_manifest(
    path: str | Path,
    command: str,
    config: dict,
    inputs: dict[str, str],
    outputs: list[str],
    seed: int | None,
) -> None:
    """Replay record referenced by every output file of a run."""
    manifest = {
        "tool": "bsesolve",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "seed": seed,
        "written_utc": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
