"""Command-line front end for the tensor completion toolkit.

Subcommands
-----------
synth
    Generate a seeded synthetic low-rank tensor and write it as TNS1.
mask
    Generate a seeded observation mask (random or fiber missing) as MSK1.
corrupt
    Plant seeded sparse outliers on the observed entries of a tensor.
complete
    Run a completion method and write the recovered tensor, the anomaly
    tensor (robust method only), and a JSON run manifest.
eval
    Score a recovered tensor against the ground truth and emit the report
    as JSON plus a single CSV row.
ingest
    Convert a location-by-time CSV matrix into a TNS1 tensor and MSK1 mask.
rerun
    Re-execute the completion step recorded in a manifest, verify input
    hashes, and check that the evaluation reproduces the same CSV row.

Exit codes: 0 success, 2 usage error, 3 input/format error, 4 numeric
error.  A failed rerun comparison exits 1.  The ``--threads`` flag of
``complete`` defaults to the ``TENSORFILL_THREADS`` environment variable.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from .datagen import (
    CorruptionSpec,
    SyntheticSpec,
    corrupt,
    nm_mask,
    rm_mask,
    synthesize,
)
from .errors import InputError, TensorfillError, UsageError
from .io import (
    atomic_write_bytes,
    ingest_csv,
    read_mask,
    read_tensor,
    write_mask,
    write_tensor,
)
from .metrics import evaluate
from .solvers import (
    DEFAULT_MAX_ITERS,
    DEFAULT_RHO,
    DEFAULT_TOL,
    METHODS,
    SolverConfig,
    complete,
    default_lambda,
)

CSV_HEADER = "method,dims,pattern,rate,gamma,seed,mape,rmse,iters"
MANIFEST_VERSION = 1


def _parse_dims(text):
    """Parse ``"n1,n2,n3"`` into a tuple of three positive ints."""
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated dims, got {text!r}")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"dims must be integers, got {text!r}")
    if any(d <= 0 for d in dims):
        raise UsageError(f"dims must be positive, got {text!r}")
    return dims


def _parse_alpha(text):
    """Parse ``"a1,a2,a3"`` into a tuple of three floats."""
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"expected three comma-separated weights, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise UsageError(f"weights must be numeric, got {text!r}")


def _sha256(path):
    """Return the hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}")
    return digest.hexdigest()


def _file_entry(role, path):
    return {"role": role, "path": os.fspath(path), "sha256": _sha256(path)}


def _verify_entry(entry):
    """Check a manifest file entry's hash, raising on any mismatch."""
    actual = _sha256(entry["path"])
    if actual != entry["sha256"]:
        raise InputError(
            f"hash mismatch for {entry['role']} file {entry['path']}: "
            f"manifest {entry['sha256'][:12]}.., actual {actual[:12]}.."
        )


def _fmt_float(value):
    """Format a metric for the CSV row, stable across reruns."""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.6f}"


def format_csv_row(method, dims, pattern, rate, gamma, seed, mape, rmse, iters):
    """Render the single report row used by ``eval`` and ``rerun``."""
    dims_text = "x".join(str(d) for d in dims)
    return ",".join(
        [
            method,
            dims_text,
            pattern,
            f"{rate:g}",
            f"{gamma:g}",
            str(seed),
            _fmt_float(mape),
            _fmt_float(rmse),
            str(iters),
        ]
    )


def _write_json(path, payload):
    data = (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()
    atomic_write_bytes(path, data)


def _load_manifest(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read manifest {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest {path} is not valid JSON: {exc}")
    if manifest.get("manifest_version") != MANIFEST_VERSION:
        raise InputError(f"manifest {path} has unsupported version")
    return manifest


def _solver_config(args, lam):
    return SolverConfig(
        method=args.method,
        alpha=_parse_alpha(args.alpha),
        rho=args.rho,
        lam=lam,
        tol=args.tol,
        max_iters=args.max_iters,
        truncation_rate=args.trunc_rate,
        threads=args.threads,
    )


def cmd_synth(args):
    spec = SyntheticSpec(
        dims=_parse_dims(args.dims),
        rank=args.rank,
        noise_sigma=args.noise,
        seed=args.seed,
    )
    tensor = synthesize(spec)
    write_tensor(args.out, tensor)
    print(f"synth: dims={args.dims} rank={spec.rank} seed={spec.seed} -> {args.out}")
    return 0


def cmd_mask(args):
    dims = _parse_dims(args.dims)
    if args.pattern == "rm":
        mask = rm_mask(dims, args.rate, args.seed)
    else:
        mask = nm_mask(dims, args.rate, args.seed)
    write_mask(args.out, mask)
    missing = 1.0 - mask.mean()
    print(f"mask: pattern={args.pattern} missing_fraction={missing:.3f} -> {args.out}")
    if args.pattern == "nm":
        fibers = int(np.sum(mask.sum(axis=1) == 0))
        print(f"mask: {fibers} fully missing fibers")
    return 0


def cmd_corrupt(args):
    tensor = read_tensor(args.tensor)
    mask = read_mask(args.mask)
    spec = CorruptionSpec(gamma=args.gamma, s=args.s, seed=args.seed)
    corrupted, omega_c, _ = corrupt(tensor, mask, spec)
    write_tensor(args.out, corrupted)
    write_mask(args.omega_out, omega_c)
    n_corrupt = int(omega_c.sum())
    print(
        f"corrupt: gamma={spec.gamma:g} s={spec.s:g} corrupted_entries={n_corrupt}"
        f" -> {args.out}"
    )
    return 0


def cmd_complete(args):
    lam = args.lam
    tensor = read_tensor(args.tensor)
    mask = read_mask(args.mask)
    cfg = _solver_config(args, lam)
    inputs = [_file_entry("tensor", args.tensor), _file_entry("mask", args.mask)]

    start = time.perf_counter()
    result = complete(tensor, mask, cfg)
    wall = time.perf_counter() - start

    write_tensor(args.out, result.recovered)
    outputs = [_file_entry("recovered", args.out)]
    if cfg.method == "rtcpfnc":
        anomaly_path = args.anomaly_out
        if anomaly_path is None:
            root, ext = os.path.splitext(args.out)
            anomaly_path = root + ".anomaly" + ext
        write_tensor(anomaly_path, result.anomaly)
        outputs.append(_file_entry("anomaly", anomaly_path))

    resolved_lam = cfg.lam if cfg.lam is not None else default_lambda(tensor.shape)
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "tool": "tensorfill",
        "method": cfg.method,
        "config": dataclasses.asdict(dataclasses.replace(cfg, lam=resolved_lam)),
        "inputs": inputs,
        "outputs": outputs,
        "wall_clock_sec": wall,
        "iterations": result.iterations,
        "converged": result.converged,
        "eval": None,
        "csv_row": None,
    }
    _write_json(args.manifest, manifest)
    print(
        f"complete: method={cfg.method} iterations={result.iterations}"
        f" converged={result.converged} wall={wall:.2f}s -> {args.out}"
    )
    return 0


def _run_eval(truth, recovered, mask, on_observed):
    eval_set = mask.astype(bool) if on_observed else (1.0 - mask).astype(bool)
    return evaluate(truth, recovered, eval_set)


def cmd_eval(args):
    truth = read_tensor(args.truth)
    recovered = read_tensor(args.recovered)
    mask = read_mask(args.mask)
    report = _run_eval(truth, recovered, mask, args.on_observed)

    method, iters = "-", 0
    manifest = None
    if args.manifest is not None:
        manifest = _load_manifest(args.manifest)
        method = manifest["method"]
        iters = manifest["iterations"]

    row = format_csv_row(
        method,
        truth.shape,
        args.pattern,
        args.rate,
        args.gamma,
        args.seed,
        report.mape,
        report.rmse,
        iters,
    )
    payload = {
        "mape": report.mape,
        "rmse": report.rmse,
        "n_evaluated": report.n_evaluated,
        "n_excluded_zero": report.n_excluded_zero,
    }
    if args.json_out is not None:
        _write_json(args.json_out, payload)
    if args.csv_out is not None:
        atomic_write_bytes(args.csv_out, (CSV_HEADER + "\n" + row + "\n").encode())
    if manifest is not None:
        manifest["eval"] = {
            "truth": _file_entry("truth", args.truth),
            "mask": _file_entry("mask", args.mask),
            "on_observed": args.on_observed,
            "pattern": args.pattern,
            "rate": args.rate,
            "gamma": args.gamma,
            "seed": args.seed,
            "report": payload,
        }
        manifest["csv_row"] = row
        _write_json(args.manifest, manifest)
    print(f"eval: mape={_fmt_float(report.mape)} rmse={_fmt_float(report.rmse)}")
    print(row)
    return 0


def cmd_ingest(args):
    dims = _parse_dims(args.dims)
    tensor, mask = ingest_csv(args.csv, dims)
    write_tensor(args.out, tensor)
    write_mask(args.mask_out, mask)
    print(f"ingest: dims={args.dims} observed_fraction={mask.mean():.3f} -> {args.out}")
    return 0


def cmd_rerun(args):
    manifest = _load_manifest(args.manifest)
    for entry in manifest["inputs"]:
        _verify_entry(entry)

    cfg_dict = dict(manifest["config"])
    cfg_dict["alpha"] = tuple(cfg_dict["alpha"])
    cfg = SolverConfig(**cfg_dict)
    paths = {e["role"]: e["path"] for e in manifest["inputs"]}
    tensor = read_tensor(paths["tensor"])
    mask = read_mask(paths["mask"])
    result = complete(tensor, mask, cfg)

    workdir = args.workdir
    os.makedirs(workdir, exist_ok=True)
    for entry in manifest["outputs"]:
        out_path = os.path.join(workdir, os.path.basename(entry["path"]))
        data = result.recovered if entry["role"] == "recovered" else result.anomaly
        write_tensor(out_path, data)
        if _sha256(out_path) != entry["sha256"]:
            print(f"rerun: output {entry['role']} differs")
            return 1

    if manifest["eval"] is not None:
        info = manifest["eval"]
        _verify_entry(info["truth"])
        _verify_entry(info["mask"])
        truth = read_tensor(info["truth"]["path"])
        eval_mask = read_mask(info["mask"]["path"])
        report = _run_eval(truth, result.recovered, eval_mask, info["on_observed"])
        row = format_csv_row(
            manifest["method"],
            truth.shape,
            info["pattern"],
            info["rate"],
            info["gamma"],
            info["seed"],
            report.mape,
            report.rmse,
            result.iterations,
        )
        print(f"recorded: {manifest['csv_row']}")
        print(f"rerun:    {row}")
        if row != manifest["csv_row"]:
            print("rerun: CSV row differs")
            return 1
    print("rerun: identical")
    return 0


def _add_seed(parser):
    parser.add_argument("--seed", type=int, default=0, help="RNG seed")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tensorfill",
        description="Dense third-order tensor completion toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic low-rank tensor")
    p.add_argument("--dims", required=True, help="tensor dims n1,n2,n3")
    p.add_argument("--rank", type=int, required=True, help="number of components")
    p.add_argument("--noise", type=float, default=0.0, help="noise sigma")
    _add_seed(p)
    p.add_argument("-o", "--out", required=True, help="output TNS1 path")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("mask", help="generate an observation mask")
    p.add_argument("--dims", required=True, help="tensor dims n1,n2,n3")
    p.add_argument("--pattern", required=True, choices=("rm", "nm"))
    p.add_argument("--rate", type=float, required=True, help="missing rate in [0,1]")
    _add_seed(p)
    p.add_argument("-o", "--out", required=True, help="output MSK1 path")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("corrupt", help="plant sparse outliers on observed entries")
    p.add_argument("--tensor", required=True, help="input TNS1 path")
    p.add_argument("--mask", required=True, help="observation MSK1 path")
    p.add_argument("--gamma", type=float, required=True, help="corruption rate")
    p.add_argument("--s", type=float, required=True, help="outlier magnitude bound")
    _add_seed(p)
    p.add_argument("-o", "--out", required=True, help="corrupted TNS1 path")
    p.add_argument("--omega-out", required=True, help="corrupted-set MSK1 path")
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("complete", help="run a completion method")
    p.add_argument("--tensor", required=True, help="observed TNS1 path")
    p.add_argument("--mask", required=True, help="observation MSK1 path")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--rho", type=float, default=DEFAULT_RHO, help="ADMM penalty")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="anomaly sparsity weight (robust method)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="stop tolerance")
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--trunc-rate", type=float, default=0.0,
                   help="truncation rate for the tnn method")
    p.add_argument("--alpha", default="0.3333333333333333,0.3333333333333333,0.3333333333333334",
                   help="mode weights a1,a2,a3 summing to 1")
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("TENSORFILL_THREADS", "1")),
                   help="per-mode worker threads (default TENSORFILL_THREADS or 1)")
    p.add_argument("-o", "--out", required=True, help="recovered TNS1 path")
    p.add_argument("--anomaly-out", default=None,
                   help="anomaly TNS1 path (robust method; default <out>.anomaly)")
    p.add_argument("--manifest", required=True, help="run manifest JSON path")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("eval", help="score a recovered tensor")
    p.add_argument("--truth", required=True, help="ground-truth TNS1 path")
    p.add_argument("--recovered", required=True, help="recovered TNS1 path")
    p.add_argument("--mask", required=True, help="observation MSK1 path")
    p.add_argument("--on-observed", action="store_true",
                   help="evaluate on observed entries instead of held-out ones")
    p.add_argument("--manifest", default=None,
                   help="manifest JSON to annotate with the evaluation")
    p.add_argument("--pattern", default="-", help="mask pattern label for the row")
    p.add_argument("--rate", type=float, default=0.0, help="missing rate label")
    p.add_argument("--gamma", type=float, default=0.0, help="corruption rate label")
    _add_seed(p)
    p.add_argument("--json-out", default=None, help="report JSON path")
    p.add_argument("--csv-out", default=None, help="report CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ingest", help="convert a CSV matrix to TNS1 and MSK1")
    p.add_argument("--csv", required=True, help="input CSV path")
    p.add_argument("--dims", required=True, help="tensor dims n1,n2,n3")
    p.add_argument("-o", "--out", required=True, help="output TNS1 path")
    p.add_argument("--mask-out", required=True, help="output MSK1 path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("rerun", help="replay a recorded completion run")
    p.add_argument("--manifest", required=True, help="run manifest JSON path")
    p.add_argument("--workdir", required=True, help="directory for replayed outputs")
    p.set_defaults(func=cmd_rerun)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TensorfillError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
