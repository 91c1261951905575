"""Command-line surface: sample point clouds and run the verify battery.

Commands emit CSV or JSON to stdout or --out.  Randomness is controlled
by --seed (falling back to the PPPKIT_SEED environment variable, then 0)
and --stream; replication r runs on stream --stream + r, so output is
byte-identical across reruns with the same settings.

Exit codes: 0 on success, 1 when the verify battery fails or sampling
hits a runtime limit, 2 on argument, grammar, or validation errors.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from pppkit.battery import DEFAULT_REPS, run_battery
from pppkit.errors import (DimensionMismatchError, RegionParseError,
                           RejectionLimitError, ZeroMeasureRegionError)
from pppkit.process import sample_conditional, sample_ppp, superpose, thin
from pppkit.randcore import RngStream
from pppkit.regions import format_region, parse_region
from pppkit.stats import DEFAULT_ALPHA

_EPILOG = """\
environment:
  PPPKIT_SEED   default seed when --seed is not given

region grammar:
  box:LO;HI             axis-aligned box, e.g. box:0,0;1,1
  ball:CENTER;RADIUS    e.g. ball:0,0;0.5
  union(R, R, ...)  inter(R, R, ...)  diff(R, R)
"""


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pppkit",
        description="Sample spatial point processes and verify their laws.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def sampling_flags(p):
        p.add_argument("--region", required=True,
                       help="region expression, e.g. 'box:0,0;1,1'")
        p.add_argument("--dim", type=int,
                       help="expected dimension (checked against --region)")
        p.add_argument("--seed", type=int, help="stream seed")
        p.add_argument("--stream", type=int, default=0,
                       help="base stream id (replication r uses stream + r)")
        p.add_argument("--reps", type=int, default=1,
                       help="number of replications")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("sample", help="sample a homogeneous process")
    p.add_argument("--mu", required=True, help="intensity per unit volume")
    sampling_flags(p)

    p = sub.add_parser("conditional",
                       help="sample exactly n uniform points on the region")
    p.add_argument("--n", type=int, required=True, help="number of points")
    sampling_flags(p)

    p = sub.add_parser("thin",
                       help="sample a process and color points independently")
    p.add_argument("--mu", required=True, help="intensity per unit volume")
    p.add_argument("--probs", required=True,
                   help="comma-separated color probabilities, e.g. '1/3,2/3'")
    sampling_flags(p)

    p = sub.add_parser("superpose",
                       help="merge independent processes on one region")
    p.add_argument("--mu", required=True,
                   help="comma-separated intensities, e.g. '2,3'")
    sampling_flags(p)

    p = sub.add_parser("verify", help="run the statistical battery")
    p.add_argument("--seed", type=int, help="stream seed")
    p.add_argument("--reps", type=int, default=DEFAULT_REPS,
                   help="replications per check")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA,
                   help="significance level per check")
    p.add_argument("--out", help="write the JSON report here")

    return parser


def _resolve_seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PPPKIT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"PPPKIT_SEED must be an integer, got {env!r}")
    return 0


def _parse_number(token, label):
    token = token.strip()
    try:
        if "/" in token:
            num, den = token.split("/", 1)
            return float(num) / float(den)
        return float(token)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse {label} value {token!r}")


def _parse_number_list(text, label):
    return [_parse_number(tok, label) for tok in text.split(",")]


def _prepare(args):
    region = parse_region(args.region)
    if args.dim is not None and args.dim != region.dim:
        raise DimensionMismatchError(
            f"--dim {args.dim} does not match region dimension {region.dim}")
    if args.reps < 1:
        raise ValueError(f"--reps must be >= 1, got {args.reps}")
    return region, _resolve_seed(args)


def _format_csv(clouds, dim):
    has_marks = any(c.marks is not None for c in clouds)
    multi = len(clouds) > 1
    header = ([] if not multi else ["rep"]) + [f"x{i}" for i in range(dim)]
    if has_marks:
        header.append("mark")
    lines = [",".join(header)]
    for rep, cloud in enumerate(clouds):
        for j in range(len(cloud)):
            row = [] if not multi else [str(rep)]
            row += [repr(float(v)) for v in cloud.points[j]]
            if has_marks:
                row.append(str(int(cloud.marks[j])))
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _cloud_dict(cloud):
    seed, stream = cloud.provenance
    return {
        "dim": cloud.dim,
        "region": format_region(cloud.region),
        "intensity": cloud.intensity,
        "seed": seed,
        "stream": stream,
        "points": cloud.points.tolist(),
        "marks": None if cloud.marks is None else cloud.marks.tolist(),
    }


def _format_json(clouds):
    if len(clouds) == 1:
        payload = _cloud_dict(clouds[0])
    else:
        payload = {"replications": [_cloud_dict(c) for c in clouds]}
    return json.dumps(payload, indent=2) + "\n"


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_clouds(clouds, args, dim):
    if args.format == "csv":
        text = _format_csv(clouds, dim)
    else:
        text = _format_json(clouds)
    _emit(text, args.out)


def _cmd_sample(args):
    region, seed = _prepare(args)
    mu = _parse_number(args.mu, "--mu")
    clouds = [sample_ppp(mu, region, RngStream(seed, args.stream + r))
              for r in range(args.reps)]
    _emit_clouds(clouds, args, region.dim)
    return 0


def _cmd_conditional(args):
    region, seed = _prepare(args)
    clouds = [sample_conditional(args.n, region, RngStream(seed,
                                                           args.stream + r))
              for r in range(args.reps)]
    _emit_clouds(clouds, args, region.dim)
    return 0


def _cmd_thin(args):
    region, seed = _prepare(args)
    mu = _parse_number(args.mu, "--mu")
    probs = _parse_number_list(args.probs, "--probs")
    clouds = []
    for r in range(args.reps):
        rng = RngStream(seed, args.stream + r)
        parts = thin(sample_ppp(mu, region, rng), probs, rng)
        clouds.append(superpose(parts))
    _emit_clouds(clouds, args, region.dim)
    return 0


def _cmd_superpose(args):
    region, seed = _prepare(args)
    mus = _parse_number_list(args.mu, "--mu")
    if not mus:
        raise ValueError("--mu needs at least one intensity")
    clouds = []
    for r in range(args.reps):
        rng = RngStream(seed, args.stream + r)
        clouds.append(superpose([sample_ppp(m, region, rng) for m in mus]))
    _emit_clouds(clouds, args, region.dim)
    return 0


def _cmd_verify(args):
    battery = run_battery(_resolve_seed(args), reps=args.reps,
                          alpha=args.alpha)
    _emit(json.dumps(battery.to_dict(), indent=2) + "\n", args.out)
    return 0 if battery.passed else 1


_COMMANDS = {
    "sample": _cmd_sample,
    "conditional": _cmd_conditional,
    "thin": _cmd_thin,
    "superpose": _cmd_superpose,
    "verify": _cmd_verify,
}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except RegionParseError as exc:
        print(f"pppkit: region error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, DimensionMismatchError, ZeroMeasureRegionError) as exc:
        print(f"pppkit: {exc}", file=sys.stderr)
        return 2
    except RejectionLimitError as exc:
        print(f"pppkit: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
