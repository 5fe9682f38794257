"""
Exceptions raised by the grn-dynamics engine.

Each exception has a stable error code and a context dict. The error handler
counts failures by code and the command line maps every subclass of
GrnDynamicsError to exit code 1.
"""

from typing import Dict, Any, List, Optional, Sequence
import logging

logger = logging.getLogger(__name__)


class GrnDynamicsError(Exception):
    """
    Root of the engine's exception tree.

    Subclasses set ``code``; an explicit ``error_code`` argument wins over it.
    """

    code = "UNKNOWN_ERROR"

    def __init__(self, message: str, error_code: str = None, context: Dict[str, Any] = None,
                 cause: Exception = None):
        """
        Args:
            message: what went wrong, in one line
            error_code: overrides the class code
            context: values that locate the failure (node, parameter index, file)
            cause: the exception this one wraps
        """
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.code
        self.context = context or {}
        self.cause = cause

        logger.debug(f"{self.error_code}: {message}", extra={
            'error_code': self.error_code,
            'context': self.context,
            'cause': repr(cause) if cause else None,
        })

    def to_dict(self) -> Dict[str, Any]:
        return {
            'error_code': self.error_code,
            'message': self.message,
            'context': self.context,
            'cause': str(self.cause) if self.cause else None,
        }


class NetworkParseError(GrnDynamicsError):
    """A line of a network description could not be read."""

    code = "NETWORK_PARSE_ERROR"

    def __init__(self, message: str, line_number: int = None, line: str = None,
                 cause: Exception = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message, context={'line_number': line_number, 'line': line}, cause=cause)
        self.line_number = line_number


class NetworkValidationError(GrnDynamicsError):
    """The network parsed but breaks a structural rule."""

    code = "NETWORK_VALIDATION_ERROR"

    def __init__(self, message: str, node: str = None, errors: List[str] = None,
                 cause: Exception = None):
        super().__init__(message, context={'node': node, 'errors': errors or []}, cause=cause)


class EnumerationGuardError(GrnDynamicsError):
    """A node has more in- or out-edges than the enumeration limits allow."""

    code = "ENUMERATION_GUARD_ERROR"

    def __init__(self, message: str, node: str = None, in_degree: int = None,
                 out_degree: int = None, max_in: int = None, max_out: int = None):
        super().__init__(message, context={
            'node': node,
            'in_degree': in_degree,
            'out_degree': out_degree,
            'max_in_edges': max_in,
            'max_out_edges': max_out,
        })


class ParameterIndexError(GrnDynamicsError):
    code = "PARAMETER_INDEX_ERROR"

    def __init__(self, message: str, index: Any = None, size: int = None):
        super().__init__(message, context={'index': index, 'size': size})


class RestrictionShapeError(GrnDynamicsError):
    """Restriction partitions exist only for one-in/one-out and two-in/one-out nodes."""

    code = "RESTRICTION_SHAPE_ERROR"

    def __init__(self, message: str, node: str = None, in_degree: int = None,
                 out_degree: int = None):
        super().__init__(message, context={'node': node, 'in_degree': in_degree, 'out_degree': out_degree})


class ConsistencyError(GrnDynamicsError):
    """An internal invariant broke: a black wall, or an enumerated region with no interior."""

    code = "CONSISTENCY_ERROR"

    def __init__(self, message: str, details: Dict[str, Any] = None, cause: Exception = None):
        super().__init__(message, context=dict(details or {}), cause=cause)


class TimeSeriesError(GrnDynamicsError):
    code = "TIME_SERIES_ERROR"

    def __init__(self, message: str, file_path: str = None, gene: str = None,
                 cause: Exception = None):
        super().__init__(message, context={'file_path': file_path, 'gene': gene}, cause=cause)


class PatternError(GrnDynamicsError):
    """Malformed pattern, or one that names variables the network lacks."""

    code = "PATTERN_ERROR"

    def __init__(self, message: str, variables: Sequence[str] = None, errors: List[str] = None,
                 cause: Exception = None):
        super().__init__(message, context={'variables': list(variables or []), 'errors': errors or []},
                         cause=cause)


class PhenotypeSpecError(GrnDynamicsError):
    code = "PHENOTYPE_SPEC_ERROR"

    def __init__(self, message: str, spec_path: str = None, errors: List[str] = None,
                 cause: Exception = None):
        super().__init__(message, context={'spec_path': spec_path, 'errors': errors or []}, cause=cause)


class ShardMergeError(GrnDynamicsError):
    """Shards overlap, leave a gap, or were produced from different inputs."""

    code = "SHARD_MERGE_ERROR"

    def __init__(self, message: str, ranges: List[Any] = None, fingerprints: List[str] = None):
        super().__init__(message, context={'ranges': ranges or [], 'fingerprints': fingerprints or []})


class ManifestVersionError(GrnDynamicsError):
    code = "MANIFEST_VERSION_ERROR"

    def __init__(self, message: str, found: Any = None, expected: Any = None,
                 file_path: str = None):
        super().__init__(message, context={'found': found, 'expected': expected, 'file_path': file_path})


class WitnessError(GrnDynamicsError):
    """No real-valued parameterization could be produced for a parameter node."""

    code = "WITNESS_ERROR"

    def __init__(self, message: str, parameter_index: int = None, node: str = None,
                 cause: Exception = None):
        super().__init__(message, context={'parameter_index': parameter_index, 'node': node}, cause=cause)


class SimulationError(GrnDynamicsError):
    """Integration left the finite positive orthant, or refinement did not converge."""

    code = "SIMULATION_ERROR"

    def __init__(self, message: str, time: float = None, step: int = None):
        super().__init__(message, context={'time': time, 'step': step})
        self.time = time


class NoOscillationError(GrnDynamicsError):
    """Every variable's tail amplitude is below the noise level."""

    code = "NO_OSCILLATION_ERROR"

    def __init__(self, message: str, amplitudes: Dict[str, float] = None, epsilon: float = None):
        super().__init__(message, context={'amplitudes': amplitudes or {}, 'epsilon': epsilon})


class YAMLParsingError(GrnDynamicsError):
    """A YAML or JSON-lines file is unreadable or has the wrong shape."""

    code = "YAML_PARSING_ERROR"

    def __init__(self, message: str, file_path: str = None, line_number: int = None,
                 cause: Exception = None):
        super().__init__(message, context={'file_path': file_path, 'line_number': line_number}, cause=cause)


class FileSystemError(GrnDynamicsError):
    code = "FILESYSTEM_ERROR"

    def __init__(self, message: str, file_path: str = None, operation: str = None,
                 cause: Exception = None):
        super().__init__(message, context={'file_path': file_path, 'operation': operation}, cause=cause)


class ConfigurationError(GrnDynamicsError):
    """A GRN_* setting is missing, malformed or out of range."""

    code = "CONFIGURATION_ERROR"

    def __init__(self, message: str, config_key: str = None, config_value: Optional[str] = None,
                 cause: Exception = None):
        super().__init__(message, context={'config_key': config_key, 'config_value': config_value},
                         cause=cause)


ERROR_CODES = {cls.code: cls for cls in GrnDynamicsError.__subclasses__()}


def get_exception_class(error_code: str) -> type:
    """Exception class registered for ``error_code``; GrnDynamicsError when none is."""
    return ERROR_CODES.get(error_code, GrnDynamicsError)
