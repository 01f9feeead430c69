"""Command-line entry point.

Subcommands: prepare (validate manifest), plan (print expansion arithmetic),
run (Stage 1), verify, fid. Exit codes: 0 success (possibly with failed
cases), 1 config/manifest error, 2 verify violations.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter

from . import manifest, orchestrator
from .errors import PipelineError


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config file")
    parser.add_argument("--seed", type=int, default=None,
                        help="override plan.master_seed")
    parser.add_argument("--out", default=None, help="override output_dir")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker count (0 = auto)")


def _load_config(args) -> orchestrator.PipelineConfig:
    config = orchestrator.load_config(args.config)
    return orchestrator.with_overrides(config, seed=args.seed, out=args.out,
                                       threads=args.threads)


def cmd_prepare(args) -> int:
    config = _load_config(args)
    records = manifest.load_manifest(config.manifest_path,
                                     working_size=config.plan.working_size,
                                     min_tumor_area=config.min_tumor_area)
    print(f"manifest OK: {len(records)} patients")
    return 0


def cmd_plan(args) -> int:
    config = _load_config(args)
    records = manifest.load_manifest(config.manifest_path,
                                     working_size=config.plan.working_size,
                                     min_tumor_area=config.min_tumor_area)
    assignments = manifest.expand_plan(records, config.plan)
    per_patient = Counter(m for m, _, _ in assignments)
    counts = sorted(set(per_patient.values()))
    print(f"patients={len(records)} S={config.plan.s_per_patient} "
          f"P={config.plan.p_per_patient} target={config.plan.target_cases}")
    print(f"assignments={len(assignments)} per-patient counts={counts}")
    return 0


def cmd_run(args) -> int:
    config = _load_config(args)
    summary = orchestrator.run_stage1(config)
    print(f"written={summary.written} failed={summary.failed}")
    for cid, reason in summary.failures:
        print(f"failed_case={cid}:{reason}")
    return 0


def cmd_verify(args) -> int:
    config = _load_config(args)
    output_dir = args.out if args.out is not None else config.output_dir
    report = orchestrator.verify(output_dir, config)
    print(f"checked={report.checked} violations={len(report.violations)}")
    for cid, reason in report.violations:
        print(f"violation={cid}:{reason}")
    return 0 if report.ok else 2


def cmd_fid(args) -> int:
    print(orchestrator.fid_command(args.real, args.fake, surrogate=args.surrogate))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liversynth",
        description="Deterministic tumor-conditioning image pipeline with FID evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_text in [
        ("prepare", cmd_prepare, "validate the dataset manifest"),
        ("plan", cmd_plan, "print the generation-plan arithmetic without writing"),
        ("run", cmd_run, "run Stage 1 over the generation plan"),
        ("verify", cmd_verify, "re-check an output tree against pipeline invariants"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _add_config_flags(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("fid", help="Frechet distance between two image/embedding sets")
    p.add_argument("--real", required=True, help="EMB1 file or image directory")
    p.add_argument("--fake", required=True, help="EMB1 file or image directory")
    p.add_argument("--surrogate", action="store_true",
                   help="embed image directories with the built-in surrogate extractor")
    p.set_defaults(func=cmd_fid)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PipelineError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
