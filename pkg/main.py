#!/usr/bin/env python3
"""
Main application entry point for the rb-lab application.
"""

import logging
import os
import sys

from dotenv import load_dotenv

from src.cli import CLI

# Load environment variables from .env file
load_dotenv()

RB_THREADS = int(os.getenv("RB_THREADS", "1"))
RB_OUT_DIR = os.getenv("RB_OUT_DIR", "out")
DEBUG = os.getenv("DEBUG", "false").lower() == "true"


def configure_logging(debug: bool = DEBUG) -> None:
    """Configure the root logger once: DEBUG when requested, else WARNING."""
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def main(argv=None) -> int:
    """
    Run the application.

    Args:
        argv (list): Command and flags; defaults to sys.argv[1:]

    Returns:
        int: Exit code
    """
    configure_logging()
    cli = CLI(out_dir=RB_OUT_DIR, threads=RB_THREADS)
    return cli.run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
