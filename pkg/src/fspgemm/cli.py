"""Command-line front end: conversion, multiplication, and the models.

Every command prints one JSON report to stdout (omar can print a CSV
table instead) and exits 0 exactly when the report carries no error
object. Reports are deterministic; --deterministic zeroes the
timestamp so byte-identical output can be asserted.

Matrix arguments accept a file path (.mtx or .fcsv), a synthetic spec
"synth:ROWSxCOLS:DENSITY" generated from --seed, or a bare name
resolved under $FSPGEMM_DATA_DIR.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from fspgemm import analysis, csv_format, gustavson, mmio, pipeline
from fspgemm.matrices import (
    CsrMatrix,
    MatrixFormatError,
    MatrixMeta,
    coo_to_csr,
    csr_bitwise_equal,
    random_csr,
)

SCHEMA_VERSION = 1
_EPOCH = "1970-01-01T00:00:00+00:00"


class CliError(Exception):
    """A user-facing command failure carried into the report's error object."""


def _resolve_matrix_path(spec: str) -> Path:
    p = Path(spec)
    if p.exists():
        return p
    data_dir = os.environ.get("FSPGEMM_DATA_DIR")
    if data_dir and not p.is_absolute():
        candidate = Path(data_dir) / spec
        if candidate.exists():
            return candidate
    raise CliError(f"matrix file not found: {spec}" + (f" (searched {data_dir})" if data_dir else ""))


def _parse_synth_spec(spec: str, seed: int) -> CsrMatrix:
    # synth:ROWSxCOLS:DENSITY, e.g. synth:128x128:0.05
    try:
        _, dims, density = spec.split(":")
        rows_s, cols_s = dims.lower().split("x")
        rows, cols, dens = int(rows_s), int(cols_s), float(density)
    except ValueError:
        raise CliError(f"bad synthetic matrix spec '{spec}', expected synth:ROWSxCOLS:DENSITY") from None
    return random_csr(rows, cols, dens, np.random.default_rng(seed))


def load_matrix(spec: str, seed: int = 0) -> CsrMatrix:
    if spec.startswith("synth:"):
        return _parse_synth_spec(spec, seed)
    path = _resolve_matrix_path(spec)
    suffix = path.suffix.lower()
    if suffix == ".mtx":
        return coo_to_csr(mmio.parse_matrix_market(path))
    if suffix == ".fcsv":
        return csv_format.csv_to_csr(csv_format.read_fcsv(path))
    raise CliError(f"unrecognised matrix extension '{suffix}' (expected .mtx or .fcsv)")


def _write_matrix(path: Path, c_csr: CsrMatrix, vec_width: int) -> int:
    suffix = path.suffix.lower()
    if suffix == ".mtx":
        mmio.write_matrix_market(path, c_csr)
    elif suffix == ".fcsv":
        csv_format.write_fcsv(path, csv_format.csr_to_csv(c_csr, vec_width))
    else:
        raise CliError(f"unrecognised output extension '{suffix}' (expected .mtx or .fcsv)")
    return path.stat().st_size


def cmd_convert(args) -> dict:
    m = load_matrix(getattr(args, "in"), args.seed)
    out = Path(args.out)
    if out.suffix.lower() == ".fcsv":
        csv = csv_format.csr_to_csv(m, args.vec_width)
        csv_format.write_fcsv(out, csv)
        bytes_written = out.stat().st_size
    else:
        bytes_written = _write_matrix(out, m, args.vec_width)
    return {
        "matrix": MatrixMeta.from_csr(Path(getattr(args, "in")).stem, m).to_dict(),
        "vec_width": args.vec_width,
        "out": str(out),
        "bytes_written": bytes_written,
    }


def cmd_multiply(args) -> dict:
    a = load_matrix(args.a, args.seed)
    b = load_matrix(args.b, args.seed + 1)
    flops = gustavson.count_flops(a, b)
    results: dict = {"engine": args.engine, "flops": flops}
    if args.engine == "reference":
        c_csr = gustavson.spgemm_rowwise(a, b)
    elif args.engine == "oracle":
        c_csr = gustavson.spgemm_oracle(a, b)
    else:
        cfg = pipeline.PipelineConfig(sw=args.sw, num_pe=args.num_pe)
        c_csv, stats = pipeline.simulate(a, b, cfg)
        c_csr = csv_format.csv_to_csr(c_csv)
        results["sim_stats"] = stats.to_dict()
    if args.verify:
        results["match"] = csr_bitwise_equal(c_csr, gustavson.spgemm_rowwise(a, b))
    results["c"] = {"rows": c_csr.rows, "cols": c_csr.cols, "nnz": c_csr.nnz}
    if args.out:
        vec_width = args.num_pe if args.engine == "simulate" else 1
        results["out"] = args.out
        results["bytes_written"] = _write_matrix(Path(args.out), c_csr, vec_width)
    return results


def cmd_omar(args) -> dict:
    m = load_matrix(args.matrix, args.seed)
    try:
        pes = [int(p) for p in args.pes.split(",") if p.strip()]
    except ValueError:
        raise CliError(f"bad PE list '{args.pes}', expected comma-separated integers") from None
    if not pes:
        raise CliError("PE list is empty")
    table = {pe: analysis.omar(m, pe) for pe in pes}
    return {
        "matrix": MatrixMeta.from_csr(Path(args.matrix).stem, m).to_dict(),
        "omar": {str(pe): value for pe, value in table.items()},
    }


def _omar_csv_text(results: dict) -> str:
    lines = ["num_pe,omar_percent"]
    for pe, value in results["omar"].items():
        lines.append(f"{pe},{value:.1f}")
    return "\n".join(lines) + "\n"


def cmd_optimize(args) -> dict:
    board = analysis.BoardSpec(
        mem_bandwidth_c1=analysis.gbps_to_bits_per_s(args.bandwidth_gbps),
        logic_budget_c2=args.logic_budget,
        freq_f=args.freq_mhz * 1e6,
    )
    if args.beta is not None:
        beta = args.beta

        def probe(sw: int, num_pe: int) -> float:
            return beta * sw * num_pe

    else:
        with open(args.probe_table, "r", encoding="utf-8") as fh:
            rows = json.load(fh)
        table = {(int(r["sw"]), int(r["num_pe"])): float(r["f2"]) for r in rows}

        def probe(sw: int, num_pe: int) -> float:
            try:
                return table[(sw, num_pe)]
            except KeyError:
                raise CliError(f"probe table has no entry for sw={sw}, num_pe={num_pe}") from None

    result = analysis.optimize_params(board, probe)
    return result.to_dict()


def cmd_stuf(args) -> dict:
    if args.nops is not None:
        n_ops = args.nops
    else:
        a = load_matrix(args.a, args.seed)
        b = load_matrix(args.b, args.seed + 1) if args.b else a
        n_ops = gustavson.count_flops(a, b)
    freq_hz = args.freq_mhz * 1e6
    runtime_s = args.runtime_ms * 1e-3
    u = analysis.stuf_from_runtime(n_ops, freq_hz, args.parallelism, runtime_s)
    return {
        "n_ops": n_ops,
        "freq_hz": freq_hz,
        "parallelism": args.parallelism,
        "runtime_s": runtime_s,
        "stuf": u,
        "stuf_display": f"{u:.1E}",
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fspgemm", description=__doc__)
    parser.add_argument("--deterministic", action="store_true", help="zero the report timestamp")
    parser.add_argument("--seed", type=int, default=0, help="seed for synth: matrix generation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert between .mtx and .fcsv")
    p.add_argument("--in", required=True, help="input matrix (.mtx or .fcsv)")
    p.add_argument("--out", required=True, help="output path (.fcsv or .mtx)")
    p.add_argument("--vec-width", type=int, default=1, help="band height for vector-major storage")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("multiply", help="sparse matrix product C = A*B")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--engine", choices=("reference", "oracle", "simulate"), default="reference")
    p.add_argument("--sw", type=int, default=16, help="SIMD width (simulate)")
    p.add_argument("--num-pe", type=int, default=32, help="PE count (simulate)")
    p.add_argument("--verify", action="store_true", help="also run the reference engine and report bitwise match")
    p.add_argument("--out", help="write C to this path (.mtx or .fcsv)")
    p.set_defaults(func=cmd_multiply)

    p = sub.add_parser("omar", help="memory-access reduction over PE counts")
    p.add_argument("--matrix", required=True)
    p.add_argument("--pes", default="2,4,8,16,32", help="comma-separated PE counts")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_omar)

    p = sub.add_parser("optimize", help="size sw and num_pe for a board")
    p.add_argument("--bandwidth-gbps", type=float, required=True)
    p.add_argument("--freq-mhz", type=float, required=True)
    p.add_argument("--logic-budget", type=float, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--beta", type=float, help="assumed logic units per unit parallelism")
    group.add_argument("--probe-table", help="JSON list of {sw, num_pe, f2} build-report entries")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("stuf", help="utilisation U = N_Ops/(F*P*R)")
    p.add_argument("--nops", type=float, help="operation count; omit to derive from --a/--b")
    p.add_argument("--a", help="matrix to derive N_Ops from")
    p.add_argument("--b", help="second operand (defaults to --a)")
    p.add_argument("--freq-mhz", type=float, required=True)
    p.add_argument("--parallelism", type=float, required=True)
    p.add_argument("--runtime-ms", type=float, required=True)
    p.set_defaults(func=cmd_stuf)

    return parser


def _echo_inputs(args) -> dict:
    skip = {"func", "command", "deterministic"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "stuf" and args.nops is None and not args.a:
        print("error: stuf needs --nops or --a", file=sys.stderr)
        return 2
    timestamp = _EPOCH if args.deterministic else datetime.now(timezone.utc).isoformat()
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "generated_at": timestamp,
        "inputs": _echo_inputs(args),
        "results": {},
    }
    code = 0
    try:
        report["results"] = args.func(args)
    except (CliError, MatrixFormatError, pipeline.SimulationError, ValueError, OSError) as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = 1
    if args.command == "omar" and args.format == "csv" and code == 0:
        sys.stdout.write(_omar_csv_text(report["results"]))
    else:
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
