"""Custom exceptions for the cluster-typing NED toolkit.

This module defines the exception hierarchy used throughout the application.
All exceptions inherit from NedError for easy catching.
"""

from typing import Any, Dict, Optional


class NedError(Exception):
    """Base exception for all toolkit errors.

    Attributes:
        message: Human-readable error description
        details: Additional error context (optional)
    """

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Initialize exception with message and optional details.

        Args:
            message: Human-readable error description
            details: Dictionary with additional error context
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ValidationError(NedError):
    """Error in data validation.

    Raised when data does not meet expected format or constraints, such as a
    duplicate entity id, a non-positive surface form frequency or a mention
    span outside its sentence.

    Attributes:
        field: Name of the field that failed validation
        value: The invalid value
    """

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        value: Any = None,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Initialize validation error.

        Args:
            message: Error description
            field: Name of the invalid field
            value: The value that failed validation
            details: Additional error details
        """
        super().__init__(message, details)
        self.field = field
        self.value = value


class ParseError(ValidationError):
    """Malformed line in an input or artifact file."""

    def __init__(
        self,
        path: str,
        line_number: int,
        message: str,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Initialize parse error.

        Args:
            path: File being parsed
            line_number: 1-based line number of the offending line
            message: What is wrong with the line
            details: Additional error details
        """
        super().__init__(f"{path}:{line_number}: {message}", field="line", value=line_number,
                         details=details)
        self.path = path
        self.line_number = line_number


class ConfigurationError(NedError):
    """Error in application configuration.

    Raised when required configuration is missing or invalid.
    """

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Initialize configuration error.

        Args:
            message: Error description
            config_key: Name of the configuration key that failed
            details: Additional error details
        """
        super().__init__(message, details)
        self.config_key = config_key


class ArtifactError(NedError):
    """Error reading or writing a pipeline artifact."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Initialize artifact error.

        Args:
            message: Error description
            path: Artifact path
            details: Additional error details
        """
        super().__init__(message, details)
        self.path = path


class MissingArtifactError(ArtifactError):
    """A required artifact does not exist.

    The message names the subcommand that produces the artifact so the user
    knows which pipeline step to run first.
    """

    def __init__(
        self,
        path: str,
        producer: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Initialize missing artifact error.

        Args:
            path: Path to the artifact that was not found
            producer: Subcommand that writes this artifact
            details: Additional error details
        """
        message = f"Artifact not found: {path}"
        if producer:
            message = f"{message} (run `{producer}` first)"
        super().__init__(message, path=path, details=details)
        self.producer = producer


class ArtifactVersionError(ArtifactError):
    """Artifact header is missing, of another kind, or of another version."""


class DataProcessingError(NedError):
    """Error during data processing.

    Raised when an algorithm cannot proceed, such as an empty vocabulary after
    pruning, an empty training set or a violated optimization invariant.
    """

    def __init__(
        self,
        message: str,
        operation: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ) -> None:
        """Initialize data processing error.

        Args:
            message: Error description
            operation: Name of the operation that failed
            details: Additional error details
        """
        super().__init__(message, details)
        self.operation = operation


class ContractError(DataProcessingError):
    """A component was used against its contract.

    For example a word-context window fed to a surface-context typing model,
    or second-stage features requested without first-stage probabilities.
    """
