"""Exception hierarchy shared by every module.

Each exception carries a machine-readable ``code`` that the CLI prints as
``error[CODE]: message`` on standard error.
"""

from typing import Any, Dict, Optional


class TfmError(Exception):
    """Base class for all errors raised by the package."""

    code = "E_TFM"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"code": self.code, "message": self.message, "details": self.details}


class MoneyError(TfmError):
    code = "E_MONEY"


class MechanismError(TfmError):
    code = "E_MECHANISM"


class OutOfGridError(MechanismError):
    code = "E_GRID"


class OutcomeInvariantError(MechanismError):
    code = "E_INVARIANT"


class ContractError(TfmError):
    code = "E_CONTRACT"


class SchemaError(TfmError):
    code = "E_SCHEMA"


class GenerationError(TfmError):
    code = "E_GENERATE"


class StageFailure(TfmError):
    """A reduction stage could not establish its guarantee.

    ``assumption`` names the property that failed and ``profile`` is the
    concrete bid profile exhibiting it.
    """

    code = "E_STAGE"

    def __init__(
        self,
        stage: str,
        assumption: str,
        message: str,
        profile: Optional[Any] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message, details)
        self.stage = stage
        self.assumption = assumption
        self.profile = profile


class InternalConsistencyError(TfmError):
    code = "E_INTERNAL"


class CircuitError(TfmError):
    code = "E_CIRCUIT"


class PreconditionError(TfmError):
    code = "E_PRECONDITION"


class ConfigError(TfmError):
    code = "E_CONFIG"
