"""Exception types shared across the package."""


class SdmkitError(Exception):
    """Base class for all package-specific failures."""


class ParseError(SdmkitError):
    """Malformed input file; the message names the offending line when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataError(SdmkitError):
    """Dataset-level failure: exhausted sampling, empty output, class deficits."""


class SchemaError(SdmkitError):
    """A file or model does not match the expected column/field contract."""
