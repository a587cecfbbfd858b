"""Command line front end: generate, solve, oracle, verify, bench.

Exit codes are a stable contract for pipelines: 0 success, 2 validation
failure, 3 I/O failure, 4 numerical abort.
"""

from __future__ import annotations

import functools
import sys
import time
from pathlib import Path

import click

from . import __version__, fileio
from .direct import direct_solve_definite, residual_norms_dense
from .errors import NumericalError, ValidationError
from .generate import GeneratorSpec, generate
from .hamiltonian import BseHamiltonian
from .solver import SolverConfig, mirror_largest, solve
from .verify import run_suite

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except OSError as exc:
            click.echo(f"i/o error: {exc}", err=True)
            sys.exit(EXIT_IO)
        except NumericalError as exc:
            click.echo(f"numerical error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)

    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name="bsesolve")
def cli() -> None:
    """Eigensolver toolkit for definite pseudo-hermitian (BSE) Hamiltonians."""


def _generator_options(fn):
    fn = click.option("--m", "m", type=int, required=True, help="Half dimension (n = 2m).")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--coupling-ratio", type=float, default=0.5, show_default=True)(fn)
    fn = click.option("--alpha", type=float, default=1.0, show_default=True)(fn)
    fn = click.option(
        "--mode", type=click.Choice(["definite", "indefinite"]), default="definite",
        show_default=True,
    )(fn)
    return fn


def _input_options(fn):
    fn = click.option("--a", "a_path", type=click.Path(), help="Matrix Market file of A.")(fn)
    fn = click.option("--b", "b_path", type=click.Path(), help="Matrix Market file of B.")(fn)
    fn = click.option("--pchb", "pchb_path", type=click.Path(), help="PCHB binary input.")(fn)
    return fn


def _load_hamiltonian(a_path, b_path, pchb_path) -> tuple[BseHamiltonian, dict[str, str]]:
    if pchb_path:
        if a_path or b_path:
            raise ValidationError("--pchb excludes --a/--b")
        ham = fileio.read_pchb(pchb_path)
        return ham, {str(pchb_path): fileio.digest64(pchb_path)}
    if not (a_path and b_path):
        raise ValidationError("provide --a and --b, or --pchb")
    ham = BseHamiltonian(
        fileio.read_matrix_market(a_path), fileio.read_matrix_market(b_path)
    )
    return ham, {
        str(a_path): fileio.digest64(a_path),
        str(b_path): fileio.digest64(b_path),
    }


def _combined_digest(inputs: dict[str, str]) -> str:
    return "+".join(inputs[k] for k in sorted(inputs))


@cli.command()
@_generator_options
@click.option(
    "--format", "fmt", type=click.Choice(["mm", "pchb"]), default="mm",
    show_default=True, help="Matrix Market pair or compact binary.",
)
@click.option("--out", type=click.Path(), default=".", show_default=True)
@handle_errors
def generate_cmd(m, seed, coupling_ratio, alpha, mode, fmt, out):
    """Write a synthetic Hamiltonian (A.mtx/B.mtx or ham.pchb) plus manifest."""
    spec = GeneratorSpec(m=m, seed=seed, alpha=alpha, coupling_ratio=coupling_ratio, mode=mode)
    ham = generate(spec)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "mm":
        fileio.write_matrix_market(out_dir / "A.mtx", ham.a, comment=f" resonant block, seed={seed}")
        fileio.write_matrix_market(out_dir / "B.mtx", ham.b, comment=f" coupling block, seed={seed}")
        outputs = ["A.mtx", "B.mtx"]
    else:
        fileio.write_pchb(out_dir / "ham.pchb", ham)
        outputs = ["ham.pchb"]
    fileio.write_manifest(
        out_dir / "manifest.json",
        command="generate",
        config={
            "m": m, "seed": seed, "coupling_ratio": coupling_ratio,
            "alpha": alpha, "mode": mode, "format": fmt,
        },
        inputs={},
        outputs=outputs,
        seed=seed,
    )
    click.echo(
        f"wrote {', '.join(outputs)} (n={ham.n}, definiteness={ham.definiteness.value})"
    )


cli.add_command(generate_cmd, name="generate")


def _solver_options(fn):
    fn = click.option("--nev", type=int, required=True)(fn)
    fn = click.option("--nex", type=int, default=None, help="Defaults to nev.")(fn)
    fn = click.option("--deg", type=int, default=20, show_default=True)(fn)
    fn = click.option("--tol", type=float, default=1e-8, show_default=True)(fn)
    fn = click.option("--maxiter", type=int, default=25, show_default=True)(fn)
    fn = click.option(
        "--rr", type=click.Choice(["auto", "hermitian", "backup"]), default="auto",
        show_default=True,
    )(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--lanczos-steps", type=int, default=24, show_default=True)(fn)
    fn = click.option("--rel-res", is_flag=True, help="Residual test relative to |mu_1|.")(fn)
    fn = click.option("--reproducible/--no-reproducible", default=True, show_default=True)(fn)
    return fn


def _make_config(nev, nex, deg, tol, maxiter, rr, seed, lanczos_steps, rel_res, reproducible):
    if deg % 2:
        click.echo(f"warning: filter degree must be even, rounding {deg} up to {deg + 1}", err=True)
        deg += 1
    return SolverConfig(
        nev=nev, nex=nex, deg=deg, tol=tol, maxiter=maxiter, rr_variant=rr,
        seed=seed, lanczos_steps=lanczos_steps, rel_res=rel_res,
        reproducible=reproducible,
    )


@cli.command("solve")
@_input_options
@_solver_options
@click.option("--largest", is_flag=True, help="Report the nev largest eigenpairs instead.")
@click.option("--out", type=click.Path(), default=".", show_default=True)
@handle_errors
def solve_cmd(a_path, b_path, pchb_path, nev, nex, deg, tol, maxiter, rr, seed,
              lanczos_steps, rel_res, reproducible, largest, out):
    """Iteratively compute the nev smallest eigenpairs."""
    ham, inputs = _load_hamiltonian(a_path, b_path, pchb_path)
    cfg = _make_config(nev, nex, deg, tol, maxiter, rr, seed, lanczos_steps,
                       rel_res, reproducible)
    result = solve(ham, cfg)
    report = mirror_largest(result) if largest else result
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = _combined_digest(inputs)
    fileio.write_eigenvalues_csv(
        out_dir / "eigenvalues.csv", report.lambdas, report.residual_norms,
        digest, converged=result.converged,
    )
    fileio.write_pchv(out_dir / "eigenvectors.bin", report.v)
    fileio.write_trace_csv(out_dir / "trace.csv", result, digest)
    fileio.write_manifest(
        out_dir / "manifest.json",
        command="solve",
        config={
            "nev": cfg.nev, "nex": cfg.nex, "deg": cfg.deg, "tol": cfg.tol,
            "maxiter": cfg.maxiter, "rr_variant": cfg.rr_variant, "seed": cfg.seed,
            "lanczos_steps": cfg.lanczos_steps, "rel_res": cfg.rel_res,
            "reproducible": cfg.reproducible, "largest": largest,
        },
        inputs=inputs,
        outputs=["eigenvalues.csv", "eigenvectors.bin", "trace.csv"],
        seed=seed,
    )
    status = "converged" if result.converged else "NOT converged"
    click.echo(
        f"{status} in {result.iterations_used} iterations "
        f"(backup events: {result.backup_events})"
    )


@cli.command("oracle")
@_input_options
@click.option("--cap", type=int, default=4096, show_default=True,
              help="Refuse problems with n above this.")
@click.option("--vectors", is_flag=True, help="Also dump eigenvectors.bin.")
@click.option("--out", type=click.Path(), default=".", show_default=True)
@handle_errors
def oracle_cmd(a_path, b_path, pchb_path, cap, vectors, out):
    """Direct dense solve of the full spectrum (reference oracle)."""
    ham, inputs = _load_hamiltonian(a_path, b_path, pchb_path)
    if ham.n > cap:
        raise ValidationError(f"n = {ham.n} exceeds the oracle cap {cap}")
    eig = direct_solve_definite(ham)
    res = residual_norms_dense(ham, eig.lambdas, eig.v)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = _combined_digest(inputs)
    fileio.write_eigenvalues_csv(
        out_dir / "eigenvalues.csv", eig.lambdas, res, digest, converged=True
    )
    outputs = ["eigenvalues.csv"]
    if vectors:
        fileio.write_pchv(out_dir / "eigenvectors.bin", eig.v)
        outputs.append("eigenvectors.bin")
    fileio.write_manifest(
        out_dir / "manifest.json", command="oracle",
        config={"cap": cap, "vectors": vectors}, inputs=inputs, outputs=outputs,
        seed=None,
    )
    click.echo(f"wrote all {eig.n} eigenvalues (max residual {res.max():.3e})")


@cli.command("verify")
@click.option("--m", "m", type=int, default=None, help="Half dimension (n = 2m).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--coupling-ratio", type=float, default=0.5, show_default=True)
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option(
    "--mode", type=click.Choice(["definite", "indefinite"]), default="definite",
    show_default=True,
)
@click.option("--a", "a_path", type=click.Path(), help="Check loaded blocks instead.")
@click.option("--b", "b_path", type=click.Path())
@handle_errors
def verify_cmd(m, seed, coupling_ratio, alpha, mode, a_path, b_path):
    """Run the structural property suite on a generated or loaded instance.

    Check failures are report content: the exit code stays 0.
    """
    import numpy as np

    from .hamiltonian import validate_pseudo_hermitian
    from .verify import PropertyCheck

    checks = []
    ham = None
    if a_path or b_path:
        if not (a_path and b_path):
            raise ValidationError("--a and --b must be given together")
        # check the raw blocks before any symmetrization can repair them
        a_raw = fileio.read_matrix_market(a_path)
        b_raw = fileio.read_matrix_market(b_path)
        h_raw = np.block([[a_raw, b_raw], [-np.conj(b_raw), -np.conj(a_raw)]])
        ok, defect = validate_pseudo_hermitian(h_raw)
        checks.append(
            PropertyCheck("pseudo_hermitian_structure", ok, f"max defect {defect:.3e}")
        )
        if ok:
            ham = BseHamiltonian(a_raw, b_raw)
    else:
        if m is None:
            raise ValidationError("provide --m or --a/--b")
        spec = GeneratorSpec(
            m=m, seed=seed, alpha=alpha, coupling_ratio=coupling_ratio, mode=mode
        )
        ham = generate(spec)
    if ham is not None:
        suite = run_suite(ham, seed=seed)
        checks.extend(c for c in suite if c.name not in {x.name for x in checks})
    failed = 0
    for check in checks:
        mark = "PASS" if check.passed else "FAIL"
        failed += not check.passed
        click.echo(f"{mark}  {check.name}: {check.detail}")
    click.echo(f"{len(checks) - failed}/{len(checks)} checks passed")


@cli.command("bench")
@_input_options
@_solver_options
@click.option("--reps", type=int, default=5, show_default=True)
@click.option("--out", type=click.Path(), default=".", show_default=True)
@handle_errors
def bench_cmd(a_path, b_path, pchb_path, nev, nex, deg, tol, maxiter, rr, seed,
              lanczos_steps, rel_res, reproducible, reps, out):
    """Repeat a solve and report per-phase times, modeled FLOPs and FLOP/s."""
    ham, inputs = _load_hamiltonian(a_path, b_path, pchb_path)
    cfg = _make_config(nev, nex, deg, tol, maxiter, rr, seed, lanczos_steps,
                       rel_res, reproducible)
    if reps < 1:
        raise ValidationError(f"reps must be >= 1, got {reps}")
    runs = []
    for _ in range(reps):
        t0 = time.perf_counter()
        result = solve(ham, cfg)
        wall = time.perf_counter() - t0
        runs.append((result, wall))
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    phases = sorted({p for result, _ in runs for p in result.ledger.flops})
    with open(out_dir / "bench.csv", "w", newline="\n") as fh:
        fh.write("# bsesolve bench v1\n")
        fh.write("# manifest: manifest.json\n")
        fh.write(f"# input_digest: {_combined_digest(inputs)}\n")
        fh.write("rep,phase,seconds,flops,gflops\n")
        for rep, (result, wall) in enumerate(runs):
            led = result.ledger
            for phase in phases:
                sec = led.seconds.get(phase, 0.0)
                flops = led.flops.get(phase, 0.0)
                rate = flops / sec / 1e9 if sec > 0 else 0.0
                fh.write(f"{rep},{phase},{sec:.6f},{flops:.0f},{rate:.3f}\n")
            fh.write(f"{rep},total,{wall:.6f},{led.total_flops():.0f},"
                     f"{led.total_flops() / wall / 1e9:.3f}\n")
        for phase in phases + ["total"]:
            if phase == "total":
                secs = [w for _, w in runs]
                flops = runs[0][0].ledger.total_flops()
            else:
                secs = [r.ledger.seconds.get(phase, 0.0) for r, _ in runs]
                flops = runs[0][0].ledger.flops.get(phase, 0.0)
            fh.write(
                f"summary,{phase},{min(secs):.6f}/{sum(secs) / len(secs):.6f}/"
                f"{max(secs):.6f},{flops:.0f},\n"
            )
    fileio.write_manifest(
        out_dir / "manifest.json",
        command="bench",
        config={
            "nev": cfg.nev, "nex": cfg.nex, "deg": cfg.deg, "tol": cfg.tol,
            "maxiter": cfg.maxiter, "rr_variant": cfg.rr_variant, "seed": cfg.seed,
            "reps": reps,
        },
        inputs=inputs,
        outputs=["bench.csv"],
        seed=seed,
    )
    for phase in phases + ["total"]:
        if phase == "total":
            secs = [w for _, w in runs]
            flops = runs[0][0].ledger.total_flops()
        else:
            secs = [r.ledger.seconds.get(phase, 0.0) for r, _ in runs]
            flops = runs[0][0].ledger.flops.get(phase, 0.0)
        click.echo(
            f"{phase:10s} min/avg/max {min(secs):.4f}/{sum(secs) / len(secs):.4f}/"
            f"{max(secs):.4f} s, modeled {flops / 1e9:.3f} GFLOP"
        )


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
