"""CLI: train / infer / embed."""

from __future__ import annotations

import argparse
import sys

from .config import ACQUISITIONS, TrainConfig, toy_preset
from .embed import embed
from .errors import SuiteError
from .infer import infer
from .train import train_command


def cmd_train(args) -> int:
    if args.toy:
        config = toy_preset(acquisition=args.acquisition, seed=args.seed)
    else:
        config = TrainConfig(acquisition=args.acquisition, epochs=args.epochs,
                             learning_rate=args.lr, batch_size=args.batch_size,
                             l1_weight=args.l1_weight, image_size=args.image_size,
                             seed=args.seed)
    train_command(args.manifest, args.stage1, config, args.checkpoint)
    print(f"checkpoint written to {args.checkpoint}")
    return 0


def cmd_infer(args) -> int:
    warnings = infer(args.checkpoint, args.stage1, stochastic=args.stochastic)
    print(f"done ({len(warnings)} warnings)")
    return 0


def cmd_embed(args) -> int:
    values = embed(args.image_dir, args.out)
    print(f"wrote {args.out}: n={values.shape[0]}, d={values.shape[1]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pix2pix-suite")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one acquisition's generator")
    p.add_argument("--acquisition", choices=ACQUISITIONS, required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--stage1", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--batch-size", type=int, default=24)
    p.add_argument("--l1-weight", type=float, default=100.0)
    p.add_argument("--image-size", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--toy", action="store_true",
                   help="desk-scale preset: 64x64, 4 filters, 5 epochs")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="generate PNGs over a Stage-1 tree")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--stage1", required=True)
    p.add_argument("--stochastic", action="store_true",
                   help="keep dropout active at inference")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("embed", help="export EMB1 embeddings for an image directory")
    p.add_argument("--image-dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SuiteError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
