"""Command-line front end.

Exit codes: 0 success (or asserted property held), 1 asserted property failed,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections import Counter
from pathlib import Path

from facsim import generators as gen
from facsim.cost import cost_report, load_weights
from facsim.cost import to_csv as cost_csv
from facsim.cost import to_json as cost_json
from facsim.dsp import AdderModel, FixedPointImage, round_trip
from facsim.faults import Exhaustive, Sampled, enumerate_faults, faulty_unit_test, resolve_scope, run_campaign
from facsim.netlist import FaultKind, depth, gate_count, to_text
from facsim.pgm import atomic_write, read_pgm, synthetic_corpus, write_pgm
from facsim.quality import INFINITY_MARKER, quality_report
from facsim.words import AdderSpec, Strategy

EXIT_OK, EXIT_ASSERT, EXIT_USAGE = 0, 1, 2
DEFAULT_L = 10


class UsageError(Exception):
    pass


def _int_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo_i, hi_i = int(lo), int(hi)
        if hi_i < lo_i:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return list(range(lo_i, hi_i + 1))
    return [int(x) for x in text.split(",")]


def _spec(args) -> AdderSpec:
    try:
        return AdderSpec(args.N, args.L if args.L is not None else DEFAULT_L, Strategy(args.strategy))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_circuit(scheme: str, args) -> gen.RedundantCircuit:
    """Circuit for ``scheme`` from the ``--N/--L/--strategy`` flags."""
    N = args.N
    low = args.L if args.L is not None else 0
    try:
        if scheme == "cla":
            return gen.build_single(gen.build_cla(N), name=f"cla-N{N}")
        if scheme == "single":
            return gen.build_single_adder(N, low)
        if scheme == "imprecise":
            return gen.build_single_imprecise(_spec(args))
        if scheme == "tmr":
            return gen.build_tmr_adder(N, low)
        if scheme == "fac":
            return gen.build_fac(_spec(args))
        if scheme == "mvrpr":
            return gen.build_mvrpr(N)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown scheme {scheme!r}")


def circuit_stats(c: gen.RedundantCircuit) -> dict:
    nl = c.netlist
    kinds = Counter(g.kind.name for g in nl.gates)
    by_region = Counter(nl.regions[g.output] for g in nl.gates if not g.kind.is_tie)
    voter = sum(by_region[r] for r in c.voter_regions)
    per_replica = {label: sum(by_region[r] for r in regs) for label, regs in c.replicas.items()}
    return {
        "circuit": c.name,
        "scheme": c.scheme.value,
        "nets": nl.num_nets,
        "gates": len(nl.gates),
        "gate_count": gate_count(nl),
        "depth": depth(nl),
        "replica_gate_count": per_replica,
        "voter_gate_count": voter,
        "unprotected_gate_count": sum(by_region[r] for r in c.unprotected),
        "gate_kinds": dict(sorted(kinds.items())),
        "ports": {name: len(nets) for name, nets in nl.outputs.items()},
    }


def _emit(path: str | None, text: str) -> None:
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------------

def cmd_gen(args) -> int:
    c = build_circuit(args.scheme, args)
    stats = circuit_stats(c)
    lines = [f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in stats.items()]
    text = to_text(c.netlist, comments=lines)
    if args.out:
        atomic_write(args.out, text)
        print("\n".join(lines))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_faultcamp(args) -> int:
    if args.inputs == "sampled":
        if args.seed is None:
            raise UsageError("sampled inputs require --seed")
        inputs = Sampled(args.samples, args.seed)
    else:
        inputs = Exhaustive()
    c = build_circuit(args.scheme, args)
    scope = args.scope.split(",") if args.scope else None
    if args.include_voters:
        scope = list(scope or resolve_scope(c, None)) + ["voters"]
    try:
        resolve_scope(c, scope)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    kinds = (FaultKind.BIT_FLIP,) if args.kinds == "flip" else (FaultKind.STUCK_AT_0, FaultKind.STUCK_AT_1)
    faults = enumerate_faults(c, scope, kinds)
    try:
        report = run_campaign(c, faults, inputs, jobs=args.jobs, scope=scope)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    doc = json.loads(report.to_json())
    if args.unit_test:
        doc["faulty_unit"] = {u: faulty_unit_test(c, u, inputs).value for u in sorted(c.replicas)}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.json:
        atomic_write(args.json, text)
    if args.csv:
        atomic_write(args.csv, report.to_csv())
    s = report.summary()
    print(f"{c.name} scope={','.join(s['scope']) or '-'} faults={s['faults_total']} "
          f"masked={s['faults_masked']} propagated={s['faults_propagated']} worst_error={s['worst_error']}")
    if args.unit_test:
        print("faulty unit: " + " ".join(f"{u}={v}" for u, v in doc["faulty_unit"].items()))
    if args.assert_ == "masked":
        ok = report.faults_propagated == 0 and all(v == "masked" for v in doc.get("faulty_unit", {}).values())
        return EXIT_OK if ok else EXIT_ASSERT
    if args.assert_ == "propagates":
        return EXIT_OK if report.faults_propagated > 0 else EXIT_ASSERT
    return EXIT_OK


def _adder(args) -> AdderModel:
    if args.N != 32:
        raise UsageError("the image pipeline uses N=32")
    if args.adder == "exact":
        return AdderModel.exact()
    return AdderModel(_spec(args))


def _image_doc(name: str, pixels, adder: AdderModel, rt) -> dict:
    q = quality_report(pixels, rt.image.pixels)
    return {
        "image": name,
        "width": int(pixels.shape[1]),
        "height": int(pixels.shape[0]),
        "adder": adder.describe(),
        "quality": q.to_dict(),
        "clamped_pixels": rt.clamped,
        "overflows": rt.overflows,
        "additions": rt.additions,
    }


def cmd_image_run(args) -> int:
    adder = _adder(args)
    try:
        pixels = read_pgm(args.inp)
        image = FixedPointImage(pixels)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    rt = round_trip(image, adder)
    doc = _image_doc(Path(args.inp).name, pixels, adder, rt)
    if args.out:
        write_pgm(args.out, rt.image.pixels)
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    _emit(args.report, text) if args.report else print(text, end="")
    if args.assert_quality:
        q = doc["quality"]
        p = math.inf if q["psnr"] == INFINITY_MARKER else q["psnr"]
        return EXIT_OK if p > args.min_psnr and q["ssim"] >= args.min_ssim else EXIT_ASSERT
    return EXIT_OK


def _images(paths: list[str] | None, size: int, seed: int) -> dict:
    if not paths:
        return synthetic_corpus(size, seed)
    try:
        return {Path(p).name: read_pgm(p) for p in paths}
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_sweep(args) -> int:
    images = _images(args.inp, args.size, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["image", "L", "psnr", "ssim", "mse"])
    for L in args.L_range:
        try:
            adder = AdderModel.imprecise(L, Strategy(args.strategy))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        for name, pixels in images.items():
            rt = round_trip(FixedPointImage(pixels), adder)
            q = quality_report(pixels, rt.image.pixels).to_dict()
            w.writerow([name, L, q["psnr"] if isinstance(q["psnr"], str) else f"{q['psnr']:.6f}",
                        f"{q['ssim']:.6f}", f"{q['mse']:.6f}"])
    _emit(args.csv, buf.getvalue())
    return EXIT_OK


def cmd_corpus(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, pixels in synthetic_corpus(args.size, args.seed).items():
        write_pgm(out / f"{name}.pgm", pixels)
        print(out / f"{name}.pgm")
    return EXIT_OK


def cmd_cost_report(args) -> int:
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if args.L is None:
        args.L = DEFAULT_L
    circuits = []
    for s in schemes:
        if s in ("tmr", "single"):
            # unit adders are full-width accurate CLAs; the vote split does not change cost
            circuits.append(build_circuit(s, argparse.Namespace(**{**vars(args), "L": None})))
        else:
            circuits.append(build_circuit(s, args))
    weights = load_weights(args.weights) if args.weights else None
    try:
        rows = cost_report(circuits, args.baseline, weights)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.json:
        atomic_write(args.json, cost_json(rows, args.baseline))
    _emit(args.csv, cost_csv(rows))
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def _adder_flags(p: argparse.ArgumentParser, L_default=None) -> None:
    p.add_argument("--N", type=int, default=32, help="operand width in bits")
    p.add_argument("--L", type=int, default=L_default, help="approximate lower-part width in bits")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.OR_BITS.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="facsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    schemes = ["cla", "single", "imprecise", "tmr", "fac", "mvrpr"]

    p = sub.add_parser("gen", help="generate a circuit netlist")
    p.add_argument("--scheme", choices=schemes, required=True)
    _adder_flags(p)
    p.add_argument("--out", help="netlist file (stats go to stdout); default prints the netlist")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("faultcamp", help="single-fault campaign")
    p.add_argument("--scheme", choices=schemes, required=True)
    _adder_flags(p)
    p.add_argument("--scope", help="comma-separated replica labels (u1..) or region names; default all but voters")
    p.add_argument("--include-voters", action="store_true")
    p.add_argument("--inputs", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int)
    p.add_argument("--kinds", choices=["stuck", "flip"], default="stuck")
    p.add_argument("--unit-test", action="store_true", help="also corrupt each whole replica in turn")
    p.add_argument("--assert", dest="assert_", choices=["none", "masked", "propagates"], default="none")
    p.add_argument("--json")
    p.add_argument("--csv")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_faultcamp)

    p = sub.add_parser("image-run", help="FFT/IFFT round trip of one PGM image")
    p.add_argument("--adder", choices=["exact", "imprecise"], required=True)
    _adder_flags(p, L_default=DEFAULT_L)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out")
    p.add_argument("--report")
    p.add_argument("--assert-quality", action="store_true")
    p.add_argument("--min-psnr", type=float, default=30.0)
    p.add_argument("--min-ssim", type=float, default=0.9)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_image_run)

    p = sub.add_parser("sweep", help="PSNR/SSIM over a range of L")
    p.add_argument("--L", dest="L_range", type=_int_range, default=list(range(6, 17)), help="e.g. 6..16 or 8,10,12")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.OR_BITS.value)
    p.add_argument("--in", dest="inp", nargs="*", help="PGM images; default the synthetic corpus")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("corpus", help="write the synthetic test images as PGM")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("cost-report", help="gate-count and depth comparison")
    p.add_argument("--schemes", default="single,tmr,fac")
    _adder_flags(p)
    p.add_argument("--baseline", default="tmr")
    p.add_argument("--weights", help="JSON map of gate kind to weight")
    p.add_argument("--csv")
    p.add_argument("--json")
    p.set_defaults(func=cmd_cost_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    L = getattr(args, "L", None)
    if isinstance(L, int) and L >= getattr(args, "N", L + 1):
        parser.error(f"--L must be smaller than --N (got L={L}, N={args.N})")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"facsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
