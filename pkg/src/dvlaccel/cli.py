"""``dvlaccel`` command line: run pipeline stages from a JSON config."""

from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .config import RunConfig
from .errors import ConfigError, DvlAccelError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

COMMANDS = {
    "simulate": "generate train/test segments",
    "augment": "write one augmented copy of each training segment",
    "split": "window segments and write the train/validation/test manifest",
    "train": "train the CNN-LSTM and write the checkpoint and loss history",
    "eval": "score the checkpoint on the test windows",
    "compare": "score network and least-squares baseline side by side",
    "plot": "write SVG loss and acceleration-trace plots",
    "pipeline": "run every stage in order",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dvlaccel", description="AUV acceleration from DVL velocity windows")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run file (defaults are used when omitted)")
    common.add_argument("--seed", type=int, help="override the root seed")
    common.add_argument("--out", help="override the output directory")
    common.add_argument("--format", choices=("csv", "json"), help="machine-readable report format")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        cfg = cfg.with_seed(args.seed)
    if args.out:
        cfg.out = args.out
    if args.format:
        cfg.report_format = args.format
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args)
        cmd = args.command
        if cmd == "simulate":
            paths = pipeline.run_simulate(cfg)
            print(f"wrote {len(paths)} segment files under {cfg.out}")
        elif cmd == "augment":
            pipeline.run_augment(cfg)
        elif cmd == "split":
            split = pipeline.run_split(cfg)
            print(f"train {len(split.train)}  validation {len(split.validation)}  test {len(split.test)}")
        elif cmd == "train":
            _, hist = pipeline.run_train(cfg)
            print(f"final train loss {hist.train_loss[-1]:.6g}")
        elif cmd == "eval":
            res = pipeline.run_eval(cfg)
            print(f"dl_rmse: {res['dl_rmse']!r}")
        elif cmd == "compare":
            sys.stdout.write(pipeline.run_compare(cfg).to_text())
        elif cmd == "plot":
            for p in pipeline.run_plot(cfg):
                print(p)
        elif cmd == "pipeline":
            sys.stdout.write(pipeline.run_pipeline(cfg).to_text())
    except DvlAccelError as exc:
        print(f"dvlaccel {args.command}: error {exc}", file=sys.stderr)
        return exc.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
