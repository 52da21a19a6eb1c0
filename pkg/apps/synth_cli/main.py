"""
CLI синтезатора: extract-masks, synthesize, verify, stats, evaluate.

Коды выхода: 0 - успех, 1 - нарушения или отказ, 2 - ошибка
использования или конфигурации.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

# Корень проекта в sys.path, чтобы импортировать packages.core
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from dotenv import load_dotenv

from packages.core.config import load_run_config
from packages.core.constants import ABLATION_PRESETS, INTERPOLATION_ALL_POINT, INTERPOLATION_VOC11
from packages.core.exceptions import ConfigError, CorruptDataset, SynthError

from .commands import cmd_evaluate, cmd_extract_masks, cmd_stats, cmd_synthesize, cmd_verify

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _u64(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits, got {value}")
    return seed


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synth",
        description="Cut-paste synthetic dataset generator for instance detection",
    )
    parser.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: $SYNTH_LOG_LEVEL or INFO)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    masks = sub.add_parser("extract-masks", help="Segment object views that have no mask")
    masks.add_argument("--config", type=Path, help="Run config JSON (paths and mask params)")
    masks.add_argument("--objects-dir", type=Path, help="Override paths.objects_dir")
    masks.add_argument("--masks-dir", type=Path, help="Override paths.masks_dir")
    masks.add_argument("--skip-failures", action="store_true",
                       help="List images without foreground in a report instead of failing")
    masks.add_argument("--failures-report", type=Path, help="Where to write the failures report")

    synth = sub.add_parser("synthesize", help="Generate the dataset")
    synth.add_argument("--config", type=Path, help="Run config JSON")
    synth.add_argument("--workers", type=_positive, help="Worker processes")
    synth.add_argument("--seed", type=_u64, help="Master seed (overrides the config)")
    synth.add_argument("--preset", choices=sorted(ABLATION_PRESETS), help="Ablation preset")
    synth.add_argument("--output-dir", type=Path, help="Override paths.output_dir")
    synth.add_argument("--num-scenes", type=_positive, help="Override dataset.num_scenes")

    verify = sub.add_parser("verify", help="Re-check constraints and annotations of a dataset")
    verify.add_argument("dataset_dir", type=Path)
    verify.add_argument("--no-digests", action="store_true", help="Skip image sha256 checks")

    stats = sub.add_parser("stats", help="Dataset composition statistics")
    stats.add_argument("dataset_dir", type=Path)

    evaluate = sub.add_parser("evaluate", help="AP/mAP of detections against the dataset")
    evaluate.add_argument("dataset_dir", type=Path)
    evaluate.add_argument("detections", type=Path, help="COCO-style detection results JSON")
    evaluate.add_argument("--interpolation", choices=[INTERPOLATION_ALL_POINT, INTERPOLATION_VOC11])
    evaluate.add_argument("--iou", type=float, dest="iou_threshold", help="IoU match threshold")
    evaluate.add_argument("--output", type=Path, help="Also write the result as JSON")

    return parser


def configure_logging(level: Optional[str]) -> None:
    level = (level or os.getenv("SYNTH_LOG_LEVEL") or "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        force=True,
    )


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "extract-masks":
        config = load_run_config(args.config)
        objects_dir = args.objects_dir or Path(config.paths.objects_dir)
        if args.masks_dir:
            masks_dir = args.masks_dir
        elif args.objects_dir and not config.paths.masks_dir:
            masks_dir = objects_dir.parent / "masks"
        else:
            masks_dir = config.paths.resolved_masks_dir()
        return cmd_extract_masks(
            objects_dir, masks_dir, config.mask, args.skip_failures, args.failures_report
        )
    if args.command == "synthesize":
        return cmd_synthesize(
            args.config,
            workers=args.workers,
            seed=args.seed,
            preset=args.preset,
            output_dir=args.output_dir,
            num_scenes=args.num_scenes,
        )
    if args.command == "verify":
        return cmd_verify(args.dataset_dir, check_digests=not args.no_digests)
    if args.command == "stats":
        return cmd_stats(args.dataset_dir)
    return cmd_evaluate(
        args.dataset_dir,
        args.detections,
        interpolation=args.interpolation,
        iou_threshold=args.iou_threshold,
        output=args.output,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Точка входа CLI.

    Returns:
        Код выхода
    """
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    configure_logging(args.log_level)
    logger.debug(f"[CLI] {args.command} {vars(args)}")

    try:
        return _dispatch(args)
    except ConfigError as e:
        logger.error(f"[CLI] configuration error: {e}")
        print(f"❌ config error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CorruptDataset as e:
        logger.error(f"[CLI] corrupt dataset: {e}")
        print(f"❌ corrupt dataset: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except SynthError as e:
        logger.error(f"[CLI] {type(e).__name__}: {e}")
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
