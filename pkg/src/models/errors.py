from typing import Any, Optional


class SegKitError(Exception):
    """
    Base error of the toolkit. The CLI prints `payload` and exits with `exit_code`.
    """

    def __init__(self, payload: str, details: Optional[Any] = None, exit_code: int = 1):
        super().__init__(payload)
        self.success = False
        self.payload = payload
        self.details = details
        self.exit_code = exit_code

    def __str__(self) -> str:
        if self.details is None:
            return self.payload
        return f"{self.payload} ({self.details})"


class ShapeError(SegKitError):
    pass


class NonFiniteError(SegKitError):
    pass


class TapeError(SegKitError):
    pass


class InstrumentationError(SegKitError):
    pass


class CostModelError(SegKitError):
    pass


class AugmentError(SegKitError):
    pass


class AnymapFormatError(SegKitError):
    pass


class DatasetError(SegKitError):
    pass


class CheckpointError(SegKitError):
    pass


class TrainingError(SegKitError):
    pass


class ConfigError(SegKitError):
    pass
