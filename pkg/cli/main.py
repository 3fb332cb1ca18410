import os
import sys
from typing import List, Optional

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from pydantic import ValidationError

from cli.response import Response
from cli.router import Router
from system.exceptions import ExitCode, SmoothingErrorCode, SmoothingException
from tools.logger import Logger

logger = Logger()


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Точка входу командного рядка.

    :return: 0 - успіх, 1 - використання/конфігурація, 2 - дані, 3 - чисельна помилка.
    """
    try:
        return Router().dispatch(argv)
    except SmoothingException as e:
        logger.error(f"❌ {e.detail}")
        return Response.error(e.detail, exit_code=e.exit_code, details=e.to_dict())
    except ValidationError as e:
        error = SmoothingException(SmoothingErrorCode.CONFIG_ERROR, str(e.errors()[0]["msg"]))
        logger.error(f"❌ {error.detail}")
        return Response.error(error.detail, exit_code=ExitCode.USAGE, details=error.to_dict())


if __name__ == "__main__":
    sys.exit(cli_main())
