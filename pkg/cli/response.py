import json
import sys
from typing import Any, Dict, Optional

from system.exceptions import ExitCode


class Response:
    @staticmethod
    def success(
            data: Optional[Dict[str, Any]] = None,
            message: str = "Operation successful",
            exit_code: int = ExitCode.OK
    ) -> int:
        """
        Стандартний успішний результат команди.

        :param data: Підсумок, який виводиться в stdout одним JSON-рядком.
        :param message: Повідомлення про успішне виконання.
        :param exit_code: Код завершення (за замовчуванням 0).
        :return: Код завершення.
        """
        content = {
            "status": "success",
            "message": message,
            "data": data,
            "exit_code": exit_code
        }
        print(json.dumps(content, ensure_ascii=False, default=str), file=sys.stdout)
        return exit_code

    @staticmethod
    def error(
            message: str = "An error occurred",
            exit_code: int = ExitCode.USAGE,
            details: Optional[Dict[str, Any]] = None
    ) -> int:
        """
        Стандартний результат команди з помилкою.

        :param message: Повідомлення про помилку.
        :param exit_code: Код завершення (за замовчуванням 1).
        :param details: Додаткові деталі помилки.
        :return: Код завершення.
        """
        content = {
            "status": "error",
            "message": message,
            "details": details,
            "exit_code": exit_code
        }
        print(json.dumps(content, ensure_ascii=False, default=str), file=sys.stderr)
        return exit_code
