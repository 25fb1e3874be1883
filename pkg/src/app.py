import argparse
import logging
import traceback
from datetime import datetime
from typing import Callable, Dict, List, Optional, Sequence

from config import APP
from utils.command_utils import ExitCode, emit_json, exit_code_for
from utils.logging_manager import LoggingManager

current_time = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
log_filename = f"{APP.LOG.LOG_FILE_PATH.rsplit('.', 1)[0]}_{current_time}.log"

LoggingManager.setup_logger(
    name=None,
    console_output=True,
    file_output=APP.LOG.LOG_TO_FILE,
    filename=log_filename,
    file_mode="w",
    level=getattr(logging, APP.LOG.LOG_LEVEL.upper(), logging.INFO),
)
logger = logging.getLogger(APP.NAME)


class CommandLineApp:
    def __init__(self):
        self.parser = argparse.ArgumentParser(
            prog=APP.NAME,
            description="Exact computations on monochromatic 3-term arithmetic progressions",
        )
        self.subparsers = self.parser.add_subparsers(dest="command", required=True)
        self.handlers: Dict[str, Callable[[argparse.Namespace], dict]] = {}

    def command(self, name: str, help: str, arguments: Sequence = ()) -> Callable:
        """
        Register a subcommand.

        Args:
            name: Subcommand name
            help: One-line description
            arguments: ``arg(...)`` specs forwarded to ``add_argument``

        Returns:
            Decorator for a handler taking the parsed namespace and returning the
            JSON payload
        """

        def decorator(handler: Callable[[argparse.Namespace], dict]) -> Callable:
            subparser = self.subparsers.add_parser(name, help=help, description=help)
            for flags, kwargs in arguments:
                subparser.add_argument(*flags, **kwargs)
            self.handlers[name] = handler
            return handler

        return decorator

    def load_commands(self) -> None:
        """Import the command modules so their handlers register themselves."""
        if self.handlers:
            return
        from commands import all_commands

        logger.debug(f"Loaded commands: {', '.join(sorted(self.handlers))}")

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Parse ``argv``, run the selected command and print its JSON result.

        Returns:
            The process exit code
        """
        self.load_commands()
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return ExitCode.OK if e.code in (0, None) else ExitCode.USAGE

        handler = self.handlers[args.command]
        try:
            payload = handler(args)
        except KeyboardInterrupt:
            raise
        except Exception as e:
            code = exit_code_for(e)
            if code is ExitCode.INTERNAL:
                logger.critical(f"Command '{args.command}' failed: {str(e)}")
                logger.critical(traceback.format_exc())
            else:
                logger.error(f"Command '{args.command}' failed: {str(e)}")
            error = {"error": str(e), "exit_code": int(code)}
            if hasattr(e, "triple"):
                error["triple"] = list(e.triple)
            emit_json(error)
            return code

        emit_json(payload)
        return ExitCode.OK


app = CommandLineApp()
