"""
Process entry point for the thor2 command.
Configures logging, dispatches to the sub-command and maps exceptions to exit codes.
"""

import sys
import time
from typing import Optional, Sequence

import structlog

from thor2 import __version__
from thor2.cli.router import build_parser, settings_from_args
from thor2.core.exceptions import ConfigException, Thor2Exception
from thor2.core.logging import configure_logging

logger = structlog.get_logger()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = settings_from_args(args)
    except ConfigException as exc:
        configure_logging()
        logger.error("Invalid configuration", error_code=exc.error_code, message=exc.message, details=exc.details)
        return exc.exit_code

    configure_logging(settings.log_level, settings.log_format)
    start_time = time.time()
    logger.info("Command started", command=args.command, version=__version__, seed=settings.seed)

    try:
        code = args.handler(args, settings)
    except Thor2Exception as exc:
        logger.error(
            "Command failed",
            command=args.command,
            error_code=exc.error_code,
            message=exc.message,
            details=exc.details,
        )
        return exc.exit_code
    except Exception as exc:
        logger.exception("Unexpected error", command=args.command, error=str(exc))
        return 1

    logger.info(
        "Command finished",
        command=args.command,
        exit_code=code,
        duration_ms=round((time.time() - start_time) * 1000, 2),
    )
    return code


if __name__ == "__main__":
    sys.exit(main())
