"""Command-line front end: ``nmrqsim {hamiltonian,eig,spectrum,zne-demo} INPUT ...``.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 resource cap.
Every CSV starts with ``# nmrqsim <version> config=<hash> seed=<seed>``. Files
go to ``--out-dir``, else ``$NMRQSIM_OUTPUT_DIR``, else the working directory,
and are only written once the whole computation has succeeded.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (CannotCompleteError, ConvergenceError, InconsistencyError,
                     InvalidInputError, ResourceLimitError)
from .exact_diag import EigenDecomposition, eigen_decompose
from .pauli import DENSE_QUBIT_CAP, PauliSum
from .simulator import Circuit, NoiseModel, apply_circuit, expectation, singlet_preparation, zero_state
from .spectrum import (compute_fid, default_spectral_width, fid_csv_rows, fid_to_spectrum,
                       peak_list, spectrum_csv_rows)
from .spin_system import SpinSystemSpec, build_hamiltonian, load_spec
from .trotter_qpe import QpeConfig, complete_by_trace, run_qpe, scale_hamiltonian
from .vqe import OptimizerConfig, deflation_vqe, folded_vqe, vqe_minimize, w_sweep, xy_ansatz
from .zne import ZneConfig, mitigated_expectation

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_RESOURCE = 0, 2, 3, 4
OUTPUT_ENV = "NMRQSIM_OUTPUT_DIR"
BACKENDS = ("exact", "qpe", "vqe", "vqe-folded", "vqe-deflation")

log = logging.getLogger("nmrqsim")


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to exit code 2."""

    def error(self, message):
        raise InvalidInputError(message)


def _fold_counts(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad fold counts {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nmrqsim", description="Spin-system NMR simulation on a statevector simulator.")
    p.add_argument("--version", action="version", version=f"nmrqsim {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("input", help="spin-system YAML file")
        sp.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_ENV} or cwd)")
        sp.add_argument("--seed", type=int, help="RNG seed (auto-generated and recorded if omitted)")

    h = sub.add_parser("hamiltonian", help="print the Pauli decomposition")
    common(h)
    h.add_argument("--dense", action="store_true", help="also write the dense matrix CSV")

    def solver(sp):
        sp.add_argument("--backend", choices=BACKENDS, default="exact")
        sp.add_argument("--ancillas", type=int, default=12)
        sp.add_argument("--trotter", type=int, default=10)
        sp.add_argument("--max-attempts", type=int, default=20)
        sp.add_argument("--shots", type=int, help="shots per group (VQE); exact expectations if omitted")
        sp.add_argument("--w-sweep", action="store_true", help="folded VQE over a grid of w")
        sp.add_argument("--w", type=float, help="single shift for vqe-folded")
        sp.add_argument("--levels", type=int, default=2, help="levels for vqe-deflation")
        sp.add_argument("--max-iter", type=int, default=500)

    e = sub.add_parser("eig", help="eigenvalues with the chosen backend")
    common(e)
    solver(e)

    s = sub.add_parser("spectrum", help="FID and spectrum CSVs")
    common(s)
    solver(s)
    s.add_argument("--d", type=int, default=4096, help="number of FID points")
    s.add_argument("--sw", type=float, help="spectral width in Hz (default 12 ppm)")
    s.add_argument("--ppm-window", type=float, nargs=2, metavar=("LOW", "HIGH"))
    s.add_argument("--t2", type=float, help="exponential apodization time constant (s)")
    s.add_argument("--threshold", type=float, default=0.3,
                   help="peak threshold as a fraction of the tallest point")

    z = sub.add_parser("zne-demo", help="ideal / unmitigated / mitigated VQE cost table")
    common(z)
    z.add_argument("--p1", type=float, default=0.001)
    z.add_argument("--p2", type=float, default=0.01)
    z.add_argument("--shots", type=int, default=10_000)
    z.add_argument("--fold-counts", type=_fold_counts, default=(0, 1, 2, 3, 4))
    z.add_argument("--repeats", type=int, default=5)
    return p


# --- helpers ------------------------------------------------------------------

def _config_hash(args: argparse.Namespace) -> str:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("out_dir", "verbose")}
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _header(args) -> str:
    return f"# nmrqsim {__version__} config={_config_hash(args)} seed={args.seed}\n"


def _csv_text(args, rows) -> str:
    buf = io.StringIO()
    buf.write(_header(args))
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _output_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUTPUT_ENV) or ".")


def _write_all(directory: Path, files: dict[str, str]) -> None:
    """Write every file via a temp file and rename, so readers never see partial output."""
    directory.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{name}.")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.replace(tmp, directory / name)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _validate(args) -> None:
    if getattr(args, "ancillas", 1) < 1 or getattr(args, "trotter", 1) < 1:
        raise InvalidInputError("--ancillas and --trotter must be >= 1")
    if getattr(args, "shots", None) is not None and args.shots < 1:
        raise InvalidInputError("--shots must be >= 1")
    if getattr(args, "backend", None) == "vqe-folded" and not args.w_sweep and args.w is None:
        raise InvalidInputError("vqe-folded needs --w or --w-sweep")
    if getattr(args, "levels", 1) < 1:
        raise InvalidInputError("--levels must be >= 1")
    if args.command == "spectrum":
        if args.d < 2:
            raise InvalidInputError("--d must be >= 2")
        if args.sw is not None and not args.sw > 0:
            raise InvalidInputError("--sw must be positive")
        if not args.threshold > 0:
            raise InvalidInputError("--threshold must be positive")
        if args.backend not in ("exact", "vqe", "vqe-folded"):
            raise InvalidInputError("spectrum supports the exact, vqe and vqe-folded backends")
    if args.command == "zne-demo":
        NoiseModel(args.p1, args.p2)
        ZneConfig(args.fold_counts, args.shots)
        if args.repeats < 1:
            raise InvalidInputError("--repeats must be >= 1")


def _start_states(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Singlet and ``(|00> + |11>)/sqrt(2)`` on the first two spins, rest in ``|0>``."""
    rest = zero_state(n - 2) if n > 2 else np.ones(1)
    singlet = np.kron(np.array([0, 1, -1, 0]) / np.sqrt(2), rest)
    even = np.kron(np.array([1, 0, 0, 1]) / np.sqrt(2), rest)
    return singlet.astype(complex), even.astype(complex)


def _require_spins(h: PauliSum, minimum: int, what: str):
    if h.n_qubits < minimum:
        raise InvalidInputError(f"{what} needs at least {minimum} spins")


# --- commands -----------------------------------------------------------------

def cmd_hamiltonian(args, spec: SpinSystemSpec, h: PauliSum, out) -> dict[str, str]:
    print(f"# {h.n_qubits} spins, {len(h)} Pauli terms (rad/s)", file=out)
    for t in h:
        print(f"{t.coeff.real:+.10f} {t.axes}", file=out)
    files = {"hamiltonian_terms.csv": _csv_text(
        args, [("pauli", "coefficient_rad_s")] + [(t.axes, f"{t.coeff.real:.12g}") for t in h])}
    if args.dense:
        m = h.to_dense().real
        files["hamiltonian_dense.csv"] = _csv_text(
            args, ([f"{v:.12g}" for v in row] for row in m))
    return files


def _solve(args, h: PauliSum, out) -> tuple[list[tuple], EigenDecomposition | None]:
    """Run the chosen backend. Returns CSV rows and, when complete, a decomposition."""
    backend = args.backend
    cfg = OptimizerConfig(max_iterations=args.max_iter, seed=args.seed)
    if backend == "exact":
        d = eigen_decompose(h)
        rows = [("index", "eigenvalue_rad_s")] + [(i, f"{v:.10f}") for i, v in enumerate(d.eigenvalues)]
        for i, v in enumerate(d.eigenvalues):
            print(f"lambda_{i} = {v:.6f}", file=out)
        return rows, d
    if backend == "qpe":
        qcfg = QpeConfig(args.ancillas, args.trotter, 1, args.max_attempts, args.seed)
        scaled = scale_hamiltonian(h)
        d = eigen_decompose(h) if h.n_qubits <= DENSE_QUBIT_CAP else None
        starts = [d.vector(i) for i in range(len(d))] if d is not None else None
        est = run_qpe(h, qcfg, starts)
        print(f"C = {scaled.c_scale:.6f}", file=out)
        rows = [("raw_index", "shifted_phase", "eigenvalue_rad_s", "verified", "bins")]
        for e in est:
            print(f"x={e.raw_index} phase={e.shifted_phase:.12f} lambda={e.eigenvalue:.4f} "
                  f"verified={e.verified}", file=out)
            rows.append((e.raw_index, f"{e.shifted_phase:.12f}", f"{e.eigenvalue:.6f}",
                         int(e.verified), " ".join(map(str, e.bins))))
        verified = [e.shifted_phase for e in est if e.verified]
        if len(verified) == (1 << h.n_qubits) - 1:
            missing = complete_by_trace(verified, h.trace() / scaled.c_scale)[-1]
            print(f"completed by trace: phase={missing:.12f} "
                  f"lambda={missing * scaled.c_scale:.4f}", file=out)
            rows.append(("trace", f"{missing:.12f}", f"{missing * scaled.c_scale:.6f}", 0, ""))
        return rows, None
    _require_spins(h, 2, "the XY-ansatz")
    singlet, even = _start_states(h.n_qubits)
    prep = singlet_preparation(h.n_qubits) if args.shots is not None else None
    if backend == "vqe":
        r = vqe_minimize(h, initial_state=None if prep else singlet, cfg=cfg, shots=args.shots,
                         prep=prep, seed=args.seed)
        print(f"lambda_0 = {r.eigenvalue:.6f} evaluations={r.evaluations} "
              f"converged={r.converged}", file=out)
        rows = [("index", "eigenvalue_rad_s", "converged", "evaluations")]
        rows.append((0, f"{r.eigenvalue:.10f}", int(r.converged), r.evaluations))
        return rows, None
    if backend == "vqe-deflation":
        res = deflation_vqe(h, args.levels, initial_state=singlet, cfg=cfg, shots=args.shots,
                            prep=prep, seed=args.seed)
        rows = [("level", "energy_rad_s", "converged", "verified")]
        for i, r in enumerate(res):
            print(f"level {i}: {r.eigenvalue:.6f} converged={r.converged} "
                  f"verified={r.verified}", file=out)
            rows.append((i, f"{r.eigenvalue:.10f}", int(r.converged), r.verified))
        return rows, None
    # vqe-folded
    if not args.w_sweep:
        r = folded_vqe(h, args.w, initial_state=singlet, cfg=cfg, shots=args.shots, seed=args.seed)
        print(f"w={args.w}: lambda = {r.eigenvalue:.6f} energy={r.energy:.6f} "
              f"consistent={r.consistent}", file=out)
        rows = [("w", "eigenvalue_rad_s", "energy_rad_s", "consistent")]
        rows.append((args.w, f"{r.eigenvalue:.10f}", f"{r.energy:.10f}", int(r.consistent)))
        return rows, None
    res = w_sweep(h, [singlet, even], cfg=cfg, shots=args.shots, seed=args.seed)
    rows = [("index", "eigenvalue_rad_s", "w", "energy_rad_s")]
    for i, r in enumerate(res):
        print(f"lambda_{i} = {r.eigenvalue:.6f} (w={r.w:.3f})", file=out)
        rows.append((i, f"{r.eigenvalue:.10f}", f"{r.w:.6f}", f"{r.energy:.10f}"))
    decomp = None
    if len(res) == 1 << h.n_qubits:
        decomp = EigenDecomposition(np.array([r.eigenvalue for r in res]),
                                    np.column_stack([r.eigenvector for r in res]))
    return rows, decomp


def cmd_eig(args, spec, h, out) -> dict[str, str]:
    rows, _ = _solve(args, h, out)
    return {"eigenvalues.csv": _csv_text(args, rows)}


def cmd_spectrum(args, spec, h, out) -> dict[str, str]:
    if args.backend == "vqe":
        # the spectrum needs every eigenpair; the vqe backend runs the folded sweep
        args = argparse.Namespace(**{**vars(args), "w_sweep": True, "backend": "vqe-folded"})
    rows, decomp = _solve(args, h, out)
    if decomp is None:
        raise ConvergenceError("backend did not return a complete set of eigenpairs")
    sw = args.sw or default_spectral_width(spec.field_mhz)
    fid = compute_fid(decomp, args.d, sw, t2=args.t2)
    sp = fid_to_spectrum(fid, spec.field_mhz, spec.offset_ppm)
    if args.ppm_window:
        sp = sp.crop(*sorted(args.ppm_window))
    peaks = peak_list(sp, args.threshold, relative=True) if len(sp) else []
    for p in peaks:
        print(f"peak {p.ppm:.4f} ppm ({p.hz:.3f} Hz) intensity {p.intensity:.4g}", file=out)
    peak_rows = [("ppm", "hz", "intensity")] + [
        (f"{p.ppm:.8f}", f"{p.hz:.6f}", f"{p.intensity:.8g}") for p in peaks]
    return {"eigenvalues.csv": _csv_text(args, rows),
            "fid.csv": _csv_text(args, fid_csv_rows(fid)),
            "spectrum.csv": _csv_text(args, spectrum_csv_rows(sp)),
            "peaks.csv": _csv_text(args, peak_rows)}


def cmd_zne_demo(args, spec, h, out) -> dict[str, str]:
    _require_spins(h, 2, "the XY-ansatz")
    ansatz = xy_ansatz(h.n_qubits)
    prep = singlet_preparation(h.n_qubits)
    theta = vqe_minimize(h, ansatz, prep=prep).theta_star
    circ: Circuit = prep + ansatz.circuit(theta)
    ideal = expectation(apply_circuit(zero_state(h.n_qubits), circ), h)
    noise = NoiseModel(args.p1, args.p2)
    children = np.random.SeedSequence(args.seed).spawn(args.repeats)
    rows = [("repeat", "lambda", "value")]
    summary = [("repeat", "ideal", "unmitigated", "mitigated")]
    wins = 0
    for rep, child in enumerate(children):
        cfg = ZneConfig(args.fold_counts, args.shots)
        mitigated, points = mitigated_expectation(circ, h, noise, cfg, seed=child,
                                                  return_points=True)
        unmitigated = points[0][1]
        wins += abs(mitigated - ideal) < abs(unmitigated - ideal)
        rows += [(rep, lam, f"{v:.10f}") for lam, v in points]
        summary.append((rep, f"{ideal:.10f}", f"{unmitigated:.10f}", f"{mitigated:.10f}"))
        print(f"repeat {rep}: ideal={ideal:.3f} unmitigated={unmitigated:.3f} "
              f"mitigated={mitigated:.3f}", file=out)
    print(f"mitigation closer to ideal in {wins}/{args.repeats} repeats", file=out)
    return {"zne_scales.csv": _csv_text(args, rows), "zne_summary.csv": _csv_text(args, summary)}


COMMANDS = {"hamiltonian": cmd_hamiltonian, "eig": cmd_eig, "spectrum": cmd_spectrum,
            "zne-demo": cmd_zne_demo}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except InvalidInputError as exc:
        print(f"nmrqsim: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().generate_state(1)[0])
    try:
        _validate(args)
        spec = load_spec(args.input)
        h = build_hamiltonian(spec)
        files = COMMANDS[args.command](args, spec, h, out)
        _write_all(_output_dir(args), files)
    except (InvalidInputError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"nmrqsim: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceLimitError as exc:
        print(f"nmrqsim: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConvergenceError, InconsistencyError, CannotCompleteError) as exc:
        print(f"nmrqsim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
