"""
TiltStress - Main Entry Point
Robust outperformance and stress scenarios under KL ambiguity
"""

import logging
import sys

from rich.console import Console
from rich.logging import RichHandler

from cli import main as cli_main
from config import Config


def setup_logging():
    """Route logs to stderr (and optionally a file) so reports stay clean on stdout"""
    handlers = [RichHandler(console=Console(stderr=True), show_path=False)]
    if Config.LOG_FILE:
        file_handler = logging.FileHandler(Config.LOG_FILE)
        file_handler.setFormatter(logging.Formatter(Config.LOG_FORMAT))
        handlers.append(file_handler)

    logging.basicConfig(
        level=Config.LOG_LEVEL,
        format="%(name)s - %(message)s",
        handlers=handlers,
    )


def main(argv=None):
    """Main entry point"""
    setup_logging()
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
