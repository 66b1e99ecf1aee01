"""
Core exception handling system.
Every failure a command can report maps to one of these and to a process exit code.
"""

from typing import Optional, Dict, Any


class Thor2Exception(Exception):
    """Base application exception"""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        error_code: str = "INTERNAL_ERROR",
        details: Optional[Dict[str, Any]] = None,
    ):
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code
        self.details = details or {}
        super().__init__(self.message)


class ConfigException(Thor2Exception):
    """Configuration could not be parsed or validated"""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(
            message=message,
            exit_code=2,
            error_code="CONFIG_ERROR",
            details=details,
        )


class DataException(Thor2Exception):
    """Input data is malformed or inconsistent with the configured layout"""

    def __init__(
        self,
        message: str,
        details: Optional[Dict] = None,
        error_code: str = "DATA_ERROR",
    ):
        super().__init__(
            message=message,
            exit_code=3,
            error_code=error_code,
            details=details,
        )


class ValidationException(DataException):
    """Argument precondition violated"""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(message=message, details=details, error_code="VALIDATION_ERROR")


class StorageException(Thor2Exception):
    """Artifact file could not be read or written"""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(
            message=message,
            exit_code=3,
            error_code="STORAGE_ERROR",
            details=details,
        )


class HashMismatchException(Thor2Exception):
    """Artifact was produced from a different upstream configuration"""

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(
            message=message,
            exit_code=4,
            error_code="HASH_MISMATCH",
            details=details,
        )
