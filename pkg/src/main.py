import sys
import traceback

from app import app, logger
from utils.command_utils import ExitCode


def main() -> int:
    try:
        return int(app.run(sys.argv[1:]))
    except KeyboardInterrupt:
        logger.info("Stopped by user (KeyboardInterrupt).")
        return ExitCode.INTERNAL
    except Exception as e:
        logger.critical(f"Crashed: {str(e)}")
        logger.critical(traceback.format_exc())
        return ExitCode.INTERNAL


if __name__ == "__main__":
    sys.exit(main())
