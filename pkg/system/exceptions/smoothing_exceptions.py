from enum import Enum
from typing import Any, Dict, Optional


class ExitCode:
    """Коди завершення CLI."""
    OK = 0
    USAGE = 1
    DATA = 2
    NUMERICAL = 3


class SmoothingErrorCode(Enum):
    # Помилки геометрії симплекса
    NON_POSITIVE_PART = "NON_POSITIVE_PART"
    DIMENSION_TOO_SMALL = "DIMENSION_TOO_SMALL"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    NOT_IN_HYPERPLANE = "NOT_IN_HYPERPLANE"

    # Помилки генераторів
    DEGENERATE_DRAW = "DEGENERATE_DRAW"

    # Помилки ядрового згладжування
    SINGULAR_BANDWIDTH = "SINGULAR_BANDWIDTH"
    ALL_WEIGHTS_ZERO = "ALL_WEIGHTS_ZERO"
    SINGULAR_DESIGN = "SINGULAR_DESIGN"

    # Помилки робастного оцінювання
    ZERO_SCALE = "ZERO_SCALE"
    NO_BRACKET = "NO_BRACKET"
    NO_CONVERGENCE = "NO_CONVERGENCE"
    NO_FINITE_RESIDUALS = "NO_FINITE_RESIDUALS"

    # Помилки крос-валідації та Монте-Карло
    FOLD_TOO_SMALL = "FOLD_TOO_SMALL"
    LENGTH_MISMATCH = "LENGTH_MISMATCH"
    REPRODUCTION_FAILED = "REPRODUCTION_FAILED"

    # Помилки вводу/виводу та конфігурації
    PARSE_ERROR = "PARSE_ERROR"
    RAGGED_ROW = "RAGGED_ROW"
    CONFIG_ERROR = "CONFIG_ERROR"
    USAGE_ERROR = "USAGE_ERROR"


ERROR_MESSAGES: Dict[SmoothingErrorCode, Dict[str, Any]] = {
    # Помилки геометрії симплекса
    SmoothingErrorCode.NON_POSITIVE_PART: {
        "detail": "Композиція містить недодатну компоненту",
        "exit_code": ExitCode.DATA
    },
    SmoothingErrorCode.DIMENSION_TOO_SMALL: {
        "detail": "Композиція повинна мати щонайменше дві компоненти",
        "exit_code": ExitCode.DATA
    },
    SmoothingErrorCode.DIMENSION_MISMATCH: {
        "detail": "Розмірності не збігаються",
        "exit_code": ExitCode.DATA
    },
    SmoothingErrorCode.NOT_IN_HYPERPLANE: {
        "detail": "Вектор clr не лежить у гіперплощині нульової суми",
        "exit_code": ExitCode.DATA
    },

    # Помилки генераторів
    SmoothingErrorCode.DEGENERATE_DRAW: {
        "detail": "Гамма-вибірка вироджена після 100 спроб",
        "exit_code": ExitCode.NUMERICAL
    },

    # Помилки ядрового згладжування
    SmoothingErrorCode.SINGULAR_BANDWIDTH: {
        "detail": "Матриця ширини вікна не є додатно визначеною",
        "exit_code": ExitCode.NUMERICAL
    },
    SmoothingErrorCode.ALL_WEIGHTS_ZERO: {
        "detail": "Усі ядрові ваги нульові: ширина вікна замала для точки запиту",
        "exit_code": ExitCode.NUMERICAL
    },
    SmoothingErrorCode.SINGULAR_DESIGN: {
        "detail": "Зважена матриця плану вироджена: замало ефективних сусідів",
        "exit_code": ExitCode.NUMERICAL
    },

    # Помилки робастного оцінювання
    SmoothingErrorCode.ZERO_SCALE: {
        "detail": "Робастний масштаб дорівнює нулю",
        "exit_code": ExitCode.NUMERICAL
    },
    SmoothingErrorCode.NO_BRACKET: {
        "detail": "Неможливо локалізувати корінь рівняння S-масштабу",
        "exit_code": ExitCode.NUMERICAL
    },
    SmoothingErrorCode.NO_CONVERGENCE: {
        "detail": "Ітерації IRWLS не збіглися",
        "exit_code": ExitCode.NUMERICAL
    },
    SmoothingErrorCode.NO_FINITE_RESIDUALS: {
        "detail": "Жодного скінченного залишку: оцінка не вдалася в усіх точках даних",
        "exit_code": ExitCode.NUMERICAL
    },

    # Помилки крос-валідації та Монте-Карло
    SmoothingErrorCode.FOLD_TOO_SMALL: {
        "detail": "Навчальна частина фолду не дозволяє побудувати оцінку",
        "exit_code": ExitCode.NUMERICAL
    },
    SmoothingErrorCode.LENGTH_MISMATCH: {
        "detail": "Довжини векторів не збігаються",
        "exit_code": ExitCode.DATA
    },
    SmoothingErrorCode.REPRODUCTION_FAILED: {
        "detail": "Частка виключених реплікацій перевищує 1%",
        "exit_code": ExitCode.NUMERICAL
    },

    # Помилки вводу/виводу та конфігурації
    SmoothingErrorCode.PARSE_ERROR: {
        "detail": "Не вдалося розібрати значення",
        "exit_code": ExitCode.DATA
    },
    SmoothingErrorCode.RAGGED_ROW: {
        "detail": "Кількість полів у рядку не відповідає заголовку",
        "exit_code": ExitCode.DATA
    },
    SmoothingErrorCode.CONFIG_ERROR: {
        "detail": "Некоректна конфігурація",
        "exit_code": ExitCode.USAGE
    },
    SmoothingErrorCode.USAGE_ERROR: {
        "detail": "Некоректне використання команди",
        "exit_code": ExitCode.USAGE
    },
}


class SmoothingException(Exception):
    """Клас для винятків чисельного ядра та вводу/виводу."""

    def __init__(
            self,
            error_code: SmoothingErrorCode,
            message: Optional[str] = None,
            line: Optional[int] = None,
            key: Optional[str] = None
    ):
        """
        Ініціалізація винятку.

        :param error_code: Код помилки.
        :param message: Додаткове уточнення до стандартного повідомлення.
        :param line: Номер рядка файлу, якщо помилка стосується даних.
        :param key: Ключ конфігурації, якщо помилка стосується конфігурації.
        """
        self.error_code = error_code
        self.line = line
        self.key = key

        error_info = ERROR_MESSAGES.get(error_code)
        if not error_info:
            error_info = {
                "detail": "Невідома помилка",
                "exit_code": ExitCode.NUMERICAL
            }

        self.exit_code = error_info["exit_code"]
        parts = [error_info["detail"]]
        if message:
            parts.append(message)
        if key is not None:
            parts.append(f"ключ {key}")
        if line is not None:
            parts.append(f"рядок {line}")
        self.detail = ": ".join(parts[:1]) + ("" if len(parts) == 1 else " (" + "; ".join(parts[1:]) + ")")

        super().__init__(self.detail)

    @property
    def code(self) -> str:
        return self.error_code.value

    def to_dict(self) -> Dict[str, Any]:
        return {
            "code": self.code,
            "detail": self.detail,
            "exit_code": self.exit_code,
        }
