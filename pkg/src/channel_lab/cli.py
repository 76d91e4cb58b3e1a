"""Command-line front end.

Subcommands: ``convert`` between channel representations, ``sequence`` to
sweep convergence defects over built-in families, ``gaussian`` for the
parameter-level calculus, and ``report`` to re-emit saved reports.

Exit codes: 0 on success, 2 when a value fails validation (including
command-line usage errors), 3 when an input file cannot be parsed.
All outputs are deterministic for a fixed invocation and seed.  The
CHANNEL_LAB_THREADS environment variable caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import ensembles, gaussian, sequences, serialize
from .core import (
    DensityOperator,
    KrausChannel,
    StinespringIsometry,
    ValidationError,
    identity_channel,
    max_action_deviation,
)
from .dilation import (
    UnitaryDilation,
    isometry_from_kraus,
    kraus_from_isometry,
    minimal_stinespring,
    stinespring_from_unitary,
    unitary_from_isometry,
)

ACTION_TOL = 1e-8


def _as_kraus(obj) -> KrausChannel:
    if isinstance(obj, KrausChannel):
        return obj
    if isinstance(obj, StinespringIsometry):
        return kraus_from_isometry(obj)
    if isinstance(obj, UnitaryDilation):
        return kraus_from_isometry(stinespring_from_unitary(obj))
    raise ValidationError(f"object of type {type(obj).__name__} is not a channel representation")


def _as_isometry(obj) -> StinespringIsometry:
    if isinstance(obj, StinespringIsometry):
        return obj
    if isinstance(obj, UnitaryDilation):
        return stinespring_from_unitary(obj)
    return isometry_from_kraus(_as_kraus(obj))


def cmd_convert(args) -> int:
    source = serialize.load(args.infile)
    source_kind = serialize.to_json_obj(source)["kind"]
    if args.to == "kraus":
        target = _as_kraus(source)
    elif args.to == "stinespring":
        target = _as_isometry(source)
    elif args.to == "minimal-stinespring":
        target = minimal_stinespring(_as_kraus(source))
    elif args.to == "unitary-dilation":
        target = unitary_from_isometry(_as_isometry(source))
    else:
        raise ValidationError(f"unknown target representation {args.to!r}")

    deviation = max_action_deviation(_as_kraus(source), _as_kraus(target))
    metadata = {
        "source_kind": source_kind,
        "max_action_deviation": deviation,
        "verified": bool(deviation <= ACTION_TOL),
    }
    if args.out:
        serialize.dump(target, args.out, metadata=metadata)
        print(f"wrote {args.out} (verified={metadata['verified']})")
    else:
        doc = serialize.to_json_obj(target)
        doc["metadata"] = metadata
        print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _parse_int_list(text: str) -> list[int]:
    text = text.strip()
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def _write_report(report, prefix: str) -> None:
    report.write_csv(prefix + ".csv")
    report.write_json(prefix + ".json")
    print(f"wrote {prefix}.csv and {prefix}.json")


def _gaussian_sweep(k: float, n_max: int, eps: float, grid_points: int) -> gaussian.GaussianConvergenceReport:
    # Transmissivities k + 1/n are only valid parameters once they drop to 1,
    # so the sweep starts at the first usable index.
    if not 0.0 < k < 1.0:
        raise ValidationError(f"limit transmissivity must lie in (0, 1), got {k}")
    start = 1
    while k + 1.0 / start > 1.0:
        start += 1
    if start > n_max:
        raise ValidationError(
            f"no valid sweep indices: k + 1/n stays above 1 up to n = {n_max}"
        )
    seq = gaussian.attenuator_sequence(lambda n: k + 1.0 / n, k)
    grid = gaussian.z_grid(1, max_points=grid_points)
    return gaussian.param_convergence_check(seq, range(start, n_max + 1), eps, grid=grid)


def cmd_sequence(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.dim is None:
        args.dim = {"compress": 8, "swap": 16, "partial-trace-form": 4}.get(args.kind, 8)
    if args.kind == "compress":
        if args.infile:
            base = _as_kraus(serialize.load(args.infile))
        else:
            base = identity_channel(args.dim)
        ranks = _parse_int_list(args.ranks) if args.ranks else list(range(1, base.d_out + 1))
        sigma = DensityOperator(np.eye(base.d_out) / base.d_out)
        seq = sequences.compression_sequence(base, sigma, ranks)
        report = sequences.convergence_report(
            seq,
            range(1, len(ranks) + 1),
            ensembles.default_test_states(base.d_in, rng),
            ensembles.matrix_unit_observables(base.d_out),
            ensembles.default_test_vectors(base.d_in, rng),
            test_family=f"basis+haar states, matrix-unit obs, basis+haar vectors, seed={args.seed}",
        )
    elif args.kind == "swap":
        report = _swap_report(args.dim, args.probe)
    elif args.kind == "partial-trace-form":
        report = _rotation_report(args, rng)
    elif args.kind == "gaussian":
        ns = _parse_int_list(args.ns) if args.ns else list(range(1, 101))
        report = _gaussian_sweep(args.k, max(ns), args.tol, args.grid * args.grid)
    else:
        raise ValidationError(f"unknown sequence kind {args.kind!r}")
    _write_report(report, args.out)
    return 0


def _swap_report(d: int, probe: int) -> sequences.ConvergenceReport:
    """Vector-level defects of the swap family, with the embedded-channel Choi column."""
    if d % 2:
        raise ValidationError(f"the swap report needs an even dimension to embed, got {d}")
    if not 1 <= probe <= d - 1:
        raise ValidationError(f"probe index must lie in 1..{d - 1}, got {probe}")
    terms, psi = sequences.swap_counterexample(d)
    limit = terms[0].initial_projector
    tau = np.zeros(d, dtype=np.complex128)
    tau[probe - 1] = 1.0

    v0 = StinespringIsometry(np.eye(d, d - 1), 2, d // 2)
    form = sequences.PartialTraceForm(v0, lambda n: terms[n - 1])
    channel_seq = sequences.channels_from_partial_isometries(form)

    indices, strong, strongstar, choi = [], [], [], []
    for n in range(1, d):
        w = terms[n - 1].w
        indices.append(n)
        strong.append(float(np.linalg.norm((w - limit) @ tau)))
        strongstar.append(float(np.linalg.norm((w.conj().T - limit) @ psi)))
        choi.append(sequences.choi_defect(channel_seq, n))
    return sequences.ConvergenceReport(
        indices=tuple(indices),
        strong=tuple(strong),
        strongstar=tuple(strongstar),
        choi=tuple(choi),
        strong_witness=(f"tau[{probe}]",) * len(indices),
        strongstar_witness=("psi",) * len(indices),
        test_family=f"vector-level probes tau[{probe}] and psi; choi from the (2, {d // 2}) embedding",
    )


def _rotation_report(args, rng) -> sequences.ConvergenceReport:
    d_in, d_out, d_env = args.dim, args.dim_out, args.dim_env
    total = d_out * d_env
    if d_in >= total:
        raise ValidationError(
            f"embedding needs d_in < d_out*d_env, got {d_in} >= {total}"
        )
    v0 = StinespringIsometry(np.eye(total, d_in), d_out, d_env)
    form = sequences.rotation_partial_trace_form(v0, (total - 1, 0), lambda n: 1.0 / n)
    ns = _parse_int_list(args.ns) if args.ns else [1, 10, 100, 1000]
    seq = sequences.channels_from_partial_isometries(form, ns=ns[:1])
    return sequences.convergence_report(
        seq,
        ns,
        ensembles.default_test_states(d_in, rng),
        ensembles.matrix_unit_observables(d_out),
        ensembles.default_test_vectors(d_in, rng),
        test_family=f"rotation angles 1/n in plane ({total - 1}, 0), seed={args.seed}",
    )


def cmd_gaussian(args) -> int:
    if args.action == "distance":
        print(repr(gaussian.attenuator_output_distance(args.k, args.kprime, complex(args.eta))))
        return 0
    if args.action == "validate":
        obj = serialize.load(args.infile)
        if isinstance(obj, gaussian.GaussianState):
            check = gaussian.validate_state(obj)
        elif isinstance(obj, gaussian.GaussianChannel):
            check = gaussian.validate_channel(obj)
        else:
            raise ValidationError(f"cannot validate objects of type {type(obj).__name__}")
        print(
            f"valid={check.ok} min_eig_plus={check.min_eig_plus!r} "
            f"min_eig_minus={check.min_eig_minus!r}"
        )
        return 0 if check.ok else 2
    if args.action == "apply":
        channel = (
            serialize.load(args.channel) if args.channel else gaussian.attenuator(args.k)
        )
        if not isinstance(channel, gaussian.GaussianChannel):
            raise ValidationError("the --channel file must hold a gaussian-channel")
        state = serialize.load(args.infile) if args.infile else gaussian.vacuum(channel.modes_in)
        if not isinstance(state, gaussian.GaussianState):
            raise ValidationError("the --in file must hold a gaussian-state")
        out = gaussian.apply_gaussian(channel, state)
        doc = {
            "input": serialize.to_json_obj(state),
            "channel": serialize.to_json_obj(channel),
            "output": serialize.to_json_obj(out),
        }
        text = json.dumps(doc, indent=2, sort_keys=True)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
            print(f"wrote {args.out}")
        else:
            print(text)
        return 0
    if args.action == "converge":
        report = _gaussian_sweep(args.k, args.ns, args.tol, args.grid * args.grid)
        _write_report(report, args.out)
        return 0
    raise ValidationError(f"unknown gaussian action {args.action!r}")


def cmd_report(args) -> int:
    with open(args.infile) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise serialize.SchemaError(f"invalid JSON in {args.infile}: {exc}") from exc
    kind = doc.get("kind")
    if kind == "convergence-report":
        report = sequences.report_from_json_dict(doc)
    elif kind == "gaussian-convergence-report":
        report = gaussian.report_from_json_dict(doc)
    else:
        raise serialize.SchemaError(f"not a report document (kind={kind!r})")
    if args.out:
        report.write_csv(args.out)
        print(f"wrote {args.out}")
    else:
        for line in _summary_lines(report):
            print(line)
    return 0


def _summary_lines(report) -> list[str]:
    lines = [f"indices: {report.indices[0]}..{report.indices[-1]} ({len(report.indices)} rows)"]
    if isinstance(report, sequences.ConvergenceReport):
        for name in ("strong", "strongstar", "choi"):
            col = getattr(report, name)
            lines.append(f"{name}: first={col[0]!r} last={col[-1]!r} max={max(col)!r}")
    else:
        for name in ("scale_dev", "shift_dev", "noise_dev", "char_dev"):
            col = getattr(report, name)
            lines.append(f"{name}: first={col[0]!r} last={col[-1]!r} max={max(col)!r}")
    if report.test_family:
        lines.append(f"test family: {report.test_family}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="channel-lab",
        description="Quantum channel representations and convergence diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert between channel representations")
    p.add_argument("--in", dest="infile", required=True, help="input representation JSON")
    p.add_argument(
        "--to",
        required=True,
        choices=["kraus", "stinespring", "minimal-stinespring", "unitary-dilation"],
    )
    p.add_argument("--out", help="output JSON path (default: print to stdout)")
    p.set_defaults(fn=cmd_convert)

    p = sub.add_parser("sequence", help="sweep convergence defects over a built-in family")
    p.add_argument("kind", choices=["compress", "swap", "partial-trace-form", "gaussian"])
    p.add_argument("--in", dest="infile", help="base channel JSON (compress only)")
    p.add_argument("--out", required=True, help="output path prefix for .csv and .json")
    p.add_argument(
        "--dim",
        type=int,
        help="base dimension (defaults: compress 8, swap 16, partial-trace-form 4)",
    )
    p.add_argument("--dim-out", type=int, default=2, help="output dim (partial-trace-form)")
    p.add_argument("--dim-env", type=int, default=3, help="environment dim (partial-trace-form)")
    p.add_argument("--ranks", help="compression ranks, e.g. 1:8 or 1,2,4,8")
    p.add_argument("--ns", help="indices to sweep, e.g. 1:100 or 1,10,100")
    p.add_argument("--probe", type=int, default=1, help="tracked frame index (swap)")
    p.add_argument("--k", type=float, default=0.5, help="limit transmissivity (gaussian)")
    p.add_argument("--grid", type=int, default=5, help="grid points per phase-space axis")
    p.add_argument("--seed", type=int, default=7, help="seed for the random test family")
    p.add_argument("--tol", type=float, default=1e-6, help="co-vanishing threshold (gaussian)")
    p.set_defaults(fn=cmd_sequence)

    p = sub.add_parser("gaussian", help="parameter-level Gaussian calculus")
    p.add_argument("action", choices=["apply", "validate", "distance", "converge"])
    p.add_argument("--in", dest="infile", help="gaussian-state or gaussian-channel JSON")
    p.add_argument("--channel", help="gaussian-channel JSON (apply)")
    p.add_argument("--out", help="output path (apply) or prefix (converge)")
    p.add_argument("--k", type=float, default=0.5, help="attenuator transmissivity")
    p.add_argument("--kprime", type=float, default=0.5, help="second transmissivity (distance)")
    p.add_argument("--eta", default="1", help="coherent amplitude, complex literal (distance)")
    p.add_argument("--ns", type=int, default=100, help="largest sweep index (converge)")
    p.add_argument("--grid", type=int, default=5, help="grid points per phase-space axis")
    p.add_argument("--tol", type=float, default=1e-6, help="co-vanishing threshold (converge)")
    p.set_defaults(fn=cmd_gaussian)

    p = sub.add_parser("report", help="summarize or re-emit a saved report")
    p.add_argument("--in", dest="infile", required=True, help="report JSON")
    p.add_argument("--out", help="CSV output path (default: print a summary)")
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (serialize.SchemaError, json.JSONDecodeError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, FileNotFoundError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
