class PalinrulerError(ValueError):
    """Нарушение предусловия операции библиотеки"""


class MaskError(PalinrulerError):
    """Недопустимые параметры маски или несовпадение длин"""


class OversizeError(PalinrulerError):
    """Превышена допустимая граница (оракул, max_len)"""


class BFileParseError(PalinrulerError):
    """Ошибка разбора b-файла; line - номер строки (с 1)"""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
