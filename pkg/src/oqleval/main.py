#!/usr/bin/env python3
"""
oqleval - OverpassQL evaluation toolkit

Parses and analyses OverpassQL queries, scores generated queries against
references, executes them against an Overpass API endpoint and runs
few-shot generation experiments over an OverpassNL-style corpus.
"""

import logging
import sys
from pathlib import Path
from typing import List, Optional

from oqleval.cli.app import build_parser, config_overrides
from oqleval.cli.commands import CommandContext, run_command
from oqleval.errors import ConfigError, CorpusError, OqlEvalError, QuerySyntaxError
from oqleval.utils.config_manager import ConfigManager
from oqleval.utils.constants import APP_NAME, APP_VERSION, EXIT_FAILURE, EXIT_USAGE


class OqlEvalApplication:
    """Main application class for oqleval."""

    def __init__(self) -> None:
        self.config_manager: Optional[ConfigManager] = None
        self.logger = logging.getLogger(__name__)

    def _setup_logging(self, verbose: bool = False, quiet: bool = False) -> None:
        """Configure application logging; stdout is left to command output."""
        level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
        log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        logging.basicConfig(
            level=level,
            format=log_format,
            handlers=[
                logging.StreamHandler(sys.stderr),
            ],
            force=True,
        )

    def _fail(self, message: str, code: int) -> int:
        print(f"{APP_NAME}: error: {message}", file=sys.stderr)
        return code

    def run(self, argv: Optional[List[str]] = None) -> int:
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

        self._setup_logging(args.verbose, args.quiet)
        self.logger.debug(f"Starting {APP_NAME} v{APP_VERSION}")

        try:
            if args.config and not Path(args.config).exists():
                raise ConfigError(f"Configuration file not found: {args.config}")
            config_path = Path(args.config) if args.config else None
            self.config_manager = ConfigManager(config_path)
            self.config_manager.apply_overrides(config_overrides(args))
            return run_command(args, CommandContext(self.config_manager))
        except QuerySyntaxError as e:
            return self._fail(str(e), EXIT_FAILURE)
        except (ConfigError, FileNotFoundError) as e:
            return self._fail(str(e), EXIT_USAGE)
        except CorpusError as e:
            for line, problem in e.problems:
                self.logger.error(f"{e.path}:{line}: {problem}")
            return self._fail(f"invalid corpus file {e.path}", EXIT_FAILURE)
        except OqlEvalError as e:
            return self._fail(str(e), EXIT_FAILURE)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the application."""
    app = OqlEvalApplication()
    return app.run(argv)


if __name__ == "__main__":
    sys.exit(main())
