"""
Error hierarchy shared by the services, the CLI and the HTTP routers.
"""
from typing import Any, Optional


class ContractumError(Exception):
    """Base class for every domain error; validators let it through unwrapped."""


class EmptyValueSetError(ContractumError):
    def __init__(self, message: str = "empty value set"):
        super().__init__(message)


class EmptySampleError(ContractumError):
    pass


class MetricAxiomError(ContractumError):
    pass


class RangeContractError(ContractumError):
    pass


class OutOfDomainError(ContractumError):
    pass


class SelectionError(ContractumError):
    """No image point satisfies both selection conditions; keeps the closest miss."""

    def __init__(self, message: str, record: Optional[Any] = None):
        super().__init__(message)
        self.record = record


class PerturbationError(ContractumError):
    pass


class HypothesisError(ContractumError):
    pass


class MalformedModeError(ContractumError):
    pass


class TraceTooShortError(ContractumError):
    pass


class MajorantError(ContractumError):
    pass


class CorpusValidationError(ContractumError):
    def __init__(self, message: str, witnesses: Optional[list] = None):
        super().__init__(message)
        self.witnesses = witnesses or []


class ConfigError(ContractumError):
    pass
