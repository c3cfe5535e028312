"""Command-line surface: sequence diagnostics, index brackets, and the full
extension pipeline, emitted as JSON reports plus CSV traces.

Every run is deterministic (there is no randomness anywhere in the
library), and every JSON report embeds the hash of the run configuration,
so identical invocations produce byte-identical reports.

Exit codes: 0 all asserted bounds pass, 1 usage error, 2 precondition
failure, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import constructions as cx
from . import extension as ex
from . import indices as ix
from . import sequences as sq
from . import weights as wf
from .quadrature import QuadratureError

SCHEMA = "v1"

SEQUENCE_PROPERTIES = ("normalized", "lc", "slc", "mg", "nq_r", "gamma_r",
                       "beta1", "beta3")


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run; hashed into every report."""

    command: str
    horizon: int
    r: float
    arguments: tuple

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _emit_json(path: Path, payload: dict, cfg: RunConfig) -> None:
    payload = dict(payload)
    payload["schema"] = SCHEMA
    payload["config_hash"] = cfg.digest()
    path.write_text(json.dumps(payload, sort_keys=True, indent=2,
                               default=_jsonable) + "\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)!r}")


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v
                             for v in row])


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

def _sequence_from_args(args) -> sq.WeightSequence:
    P = args.horizon
    if args.gevrey is not None:
        return sq.gevrey_sequence(args.gevrey, P)
    if args.example is not None:
        if args.example == "factorial-block":
            return cx.factorial_block_example(P)
        if args.example == "langenbruch":
            if args.gamma is None:
                raise UsageError("--example langenbruch needs --gamma")
            return cx.langenbruch_example(args.gamma, args.variant, P)
        raise UsageError(f"unknown example {args.example!r}")
    if args.file is not None:
        return sq.WeightSequence.from_json(Path(args.file).read_text())
    raise UsageError("need one of --gevrey, --example, --file")


def _pair_from_args(args):
    P = args.horizon
    if args.gevrey_pair is not None:
        r1, r2 = args.gevrey_pair
        return sq.gevrey_sequence(r1, P), sq.gevrey_sequence(r2, P)
    if args.pair_file is not None:
        obj = json.loads(Path(args.pair_file).read_text())
        M = sq.WeightSequence.from_json(json.dumps(obj["M"]))
        N = sq.WeightSequence.from_json(json.dumps(obj["N"]))
        return M, N
    raise UsageError("need one of --gevrey-pair, --pair-file")


def _report_dict(rep: sq.PropertyReport) -> dict:
    out = {"verdict": rep.verdict, "witness": _finite(rep.witness)}
    if rep.notes:
        out["notes"] = rep.notes
    if rep.constants:
        out["constants"] = {k: _finite(v) for k, v in rep.constants.items()}
    return out


def _finite(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _estimate_dict(est: ix.IndexEstimate) -> dict:
    return {"estimate": _finite(est.estimate), "r_lo": _finite(est.r_lo),
            "r_hi": _finite(est.r_hi), "unbounded": est.unbounded,
            "notes": est.notes}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_sequence(args) -> int:
    cfg = RunConfig("sequence", args.horizon, args.r, _argtuple(args))
    M = _sequence_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = {}
    rows = []
    for prop in SEQUENCE_PROPERTIES:
        rep = sq.check_property(M, prop, r=args.r)
        reports[prop] = _report_dict(rep)
        if rep.trace_p is not None:
            for p, v in zip(np.asarray(rep.trace_p),
                            np.asarray(rep.trace_values)):
                rows.append((prop, int(p), float(v)))
    _emit_json(out / "sequence.json",
               {"label": M.label, "horizon": M.horizon,
                "r": args.r, "properties": reports}, cfg)
    _write_csv(out / "sequence_trace.csv", ("property", "p", "value"), rows)
    print(f"{M.label}: " + ", ".join(
        f"{k}={v['verdict']}" for k, v in reports.items()))
    return 0


def cmd_indices(args) -> int:
    cfg = RunConfig("indices", args.horizon, args.r, _argtuple(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {}
    if args.gevrey is not None or args.example is not None \
            or args.file is not None:
        M = _sequence_from_args(args)
        payload["label"] = M.label
        payload["mu"] = _estimate_dict(ix.mu_of_sequence(M))
        if args.weights:
            payload["mu_weight"] = _estimate_dict(
                ix.mu_of_weight(wf.omega_from_sequence(M)))
    else:
        M, N = _pair_from_args(args)
        payload["labels"] = [M.label, N.label]
        payload["gamma"] = _estimate_dict(ix.gamma_mixed_sequences(M, N))
        payload["mu_M"] = _estimate_dict(ix.mu_of_sequence(M))
        payload["mu_N"] = _estimate_dict(ix.mu_of_sequence(N))
        if args.weights:
            payload["gamma_weight"] = _estimate_dict(ix.gamma_mixed_weights(
                wf.omega_from_sequence(M), wf.omega_from_sequence(N)))
    _emit_json(out / "indices.json", payload, cfg)
    for key in ("mu", "gamma", "gamma_weight"):
        if key in payload:
            e = payload[key]
            print(f"{key}: [{e['r_lo']}, {e['r_hi']}]")
    return 0


def _parse_lam(args):
    if args.lam is not None:
        lam = json.loads(args.lam)
        if not isinstance(lam, list):
            raise UsageError("--lam must be a JSON list")
        return [float(v) for v in lam]
    if args.lam_gen == "factorial":
        return [math.factorial(p) for p in range(args.lam_len)]
    if args.lam_gen == "delta":
        return [1.0] + [0.0] * (args.lam_len - 1)
    raise UsageError("need --lam or --lam-gen")


def cmd_extend(args) -> int:
    cfg = RunConfig("extend", args.horizon, args.gamma, _argtuple(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.verify_only:
        return _verify_stored(out)
    lam = _parse_lam(args)
    M, N = _pair_from_args(args)
    bracket = ix.gamma_mixed_sequences(M, N)
    result = ex.extend(lam, (M, N), args.gamma, args.h, args.x, bracket)

    z = np.geomspace(result.R0 / 300.0, result.R0 / 2.0, args.samples)
    f = result.sampler(z.astype(complex))
    _write_csv(out / "samples.csv", ("abs_z", "arg_z", "re_f", "im_f"),
               [(float(abs(zz)), float(np.angle(zz)), float(ff.real),
                 float(ff.imag)) for zz, ff in zip(z, f)])

    rep = ex.remainder_report(result, z)
    flat = ex.flat_sandwich(result.handle)
    outer = ex.outer_sandwich(result.handle)
    kernel = ex.kernel_bound(result.handle, result.x)
    passes = {
        "envelope": {str(n): bool(v) for n, v in rep.passes.items()},
        "flat_sandwich": flat.passes,
        "outer_sandwich": outer.passes,
        "kernel_bound": kernel.upper_pass,
    }
    all_pass = all(rep.passes.values()) and flat.passes and outer.passes \
        and kernel.upper_pass
    _emit_json(out / "constants.json",
               {"constants": result.constants, "bracket":
                _estimate_dict(bracket), "lam": lam}, cfg)
    _emit_json(out / "remainder.json", {
        "passes": passes,
        "front_constant": rep.front_constant,
        "slopes": {str(n): v for n, v in rep.slopes.items()},
        "abs_z": np.abs(z),
        "measured": {str(n): v for n, v in rep.measured.items()},
        "envelope": {str(n): v for n, v in rep.envelope.items()},
    }, cfg)
    print(f"R0={result.R0:.6g}  slopes=" +
          ", ".join(f"N={n}:{s:.3g}" for n, s in rep.slopes.items()))
    print("bounds " + ("pass" if all_pass else "FAIL"))
    return 0 if all_pass else 3


def _verify_stored(out: Path) -> int:
    """Recheck envelope domination from a stored remainder report."""
    path = out / "remainder.json"
    if not path.exists():
        raise UsageError(f"no stored report at {path}")
    obj = json.loads(path.read_text())
    stored = obj["passes"]["envelope"]
    recomputed = {}
    for key, measured in obj["measured"].items():
        env = np.asarray(obj["envelope"][key])
        m = np.asarray(measured)
        median = float(np.median(np.asarray(obj["abs_z"])))
        held = np.asarray(obj["abs_z"]) > median
        recomputed[key] = bool(np.all(m[held] <= env[held] * (1 + 1e-9)))
    identical = recomputed == {k: bool(v) for k, v in stored.items()}
    print("verify: " + ("identical verdicts" if identical else "MISMATCH"))
    for key in sorted(recomputed):
        print(f"  N={key}: stored={stored[key]} recomputed={recomputed[key]}")
    if not identical:
        return 3
    return 0 if all(recomputed.values()) else 3


# ---------------------------------------------------------------------------
# wiring
# ---------------------------------------------------------------------------

def _argtuple(args) -> tuple:
    return tuple(sorted(f"{k}={v}" for k, v in vars(args).items()
                        if k != "func"))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sectorext")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--horizon", type=int, default=sq.DEFAULT_HORIZON)
        p.add_argument("--out", default="sectorext-out")

    def source(p):
        p.add_argument("--gevrey", type=float)
        p.add_argument("--example",
                       choices=("langenbruch", "factorial-block"))
        p.add_argument("--gamma", type=float)
        p.add_argument("--variant", choices=("mg", "no-mg"), default="mg")
        p.add_argument("--file")

    p = sub.add_parser("sequence", help="run all sequence diagnostics")
    common(p)
    source(p)
    p.add_argument("--r", type=float, default=1.0)
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("indices", help="growth-index brackets")
    common(p)
    source(p)
    p.add_argument("--gevrey-pair", type=float, nargs=2)
    p.add_argument("--pair-file")
    p.add_argument("--weights", action="store_true",
                   help="also estimate at the weight-function level")
    p.add_argument("--r", type=float, default=1.0)
    p.set_defaults(func=cmd_indices)

    p = sub.add_parser("extend", help="full extension pipeline")
    common(p)
    p.add_argument("--gevrey-pair", type=float, nargs=2)
    p.add_argument("--pair-file")
    p.add_argument("--lam", help="JSON list of coefficients")
    p.add_argument("--lam-gen", choices=("delta", "factorial"))
    p.add_argument("--lam-len", type=int, default=13)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--x", type=float, default=0.125)
    p.add_argument("--samples", type=int, default=24)
    p.add_argument("--verify-only", action="store_true")
    p.set_defaults(func=cmd_extend)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except (sq.SequenceError, wf.WeightError, ex.ExtensionError) as err:
        print(f"precondition failure: {err}", file=sys.stderr)
        return 2
    except (QuadratureError, FloatingPointError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
