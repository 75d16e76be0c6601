# decoybounds/cli.py
"""
decoy-sweep: sweep channel loss, estimate the single-photon bounds in
separate and global mode, and write a CSV plus a JSON summary.
"""
import argparse
import logging
from pathlib import Path

from decoybounds.errors import ConfigError, DecoyBoundsError, ReportError
from decoybounds.services.sweep import emit_report, load_sweep_config, run_sweep
from decoybounds.settings import settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decoy-sweep",
        description="Compare separate and global decoy-state estimation over channel loss.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--config", type=Path, help="JSON sweep configuration")
    parser.add_argument("--protocol", choices=["bb84", "mdi"], help="Protocol to simulate")
    parser.add_argument("--loss-start", type=float, help="First loss point in dB")
    parser.add_argument("--loss-end", type=float, help="Last loss point in dB")
    parser.add_argument("--loss-step", type=float, help="Loss step in dB")
    parser.add_argument("--mu", type=float, help="Signal intensity (Alice for mdi)")
    parser.add_argument("--nu", type=float, help="Decoy intensity (Alice for mdi)")
    parser.add_argument("--mu-b", type=float, help="Bob's signal intensity (mdi)")
    parser.add_argument("--nu-b", type=float, help="Bob's decoy intensity (mdi)")
    parser.add_argument("--out", type=Path, dest="output", help="CSV output path")
    parser.add_argument(
        "--observables", type=Path, help="Measured statistics to estimate instead of simulating"
    )
    parser.add_argument(
        "--yield-table", type=Path, help="Photon-number yield table replacing the mdi model"
    )
    parser.add_argument("--workers", type=int, help="Worker processes for row evaluation")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=settings.log_level,
        help="Logging verbosity",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    """Run a sweep; returns 0 on success, 2 on a config error, 3 on an I/O error."""
    args = create_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level,
        format="%(asctime)s [%(levelname)s] [%(name)s] %(message)s",
    )

    overrides = {
        name: getattr(args, name)
        for name in (
            "protocol",
            "loss_start",
            "loss_end",
            "loss_step",
            "mu",
            "nu",
            "mu_b",
            "nu_b",
            "output",
            "observables",
            "yield_table",
            "workers",
        )
    }
    try:
        config = load_sweep_config(args.config, overrides)
        rows = run_sweep(config)
        emit_report(rows, config)
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except ReportError as e:
        logger.error("Report error: %s", e)
        return EXIT_IO
    except DecoyBoundsError as e:
        logger.error("%s: %s", e.error_code.value, e)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
