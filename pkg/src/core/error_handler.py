"""
Error reporting for long enumerations and sweeps.

A sweep touches millions of parameter nodes; one broken node must not take the
shard down with it. The handler keeps a report per failure (with the parameter
index when the error carries one), counts failures per error code and can dump
everything as JSON next to the sweep output.
"""

import functools
import json
import logging
import traceback
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Callable, Dict, List, Optional

from .exceptions import GrnDynamicsError

logger = logging.getLogger(__name__)


@dataclass
class ErrorReport:
    timestamp: datetime
    error_code: str
    message: str
    context: Dict[str, Any]
    stack_trace: str

    @property
    def parameter(self) -> Optional[int]:
        """Parameter index the failure belongs to, if any."""
        value = self.context.get('parameter', self.context.get('parameter_index'))
        return int(value) if isinstance(value, int) else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'timestamp': self.timestamp.isoformat(),
            'error_code': self.error_code,
            'message': self.message,
            'parameter': self.parameter,
            'context': self.context,
            'stack_trace': self.stack_trace,
        }


class ErrorHandler:
    """
    Collects failure reports.

    Domain errors keep their own code; anything else is classified by type.
    """

    # A bug or broken input rather than one bad parameter node.
    CRITICAL_CODES = ('CONSISTENCY_ERROR', 'CONFIGURATION_ERROR', 'MANIFEST_VERSION_ERROR')

    def __init__(self):
        self.error_reports: List[ErrorReport] = []
        self.error_counts: Dict[str, int] = {}

    def handle_error(self, error: Exception, context: Dict[str, Any] = None) -> ErrorReport:
        """
        Record one failure.

        Args:
            error: the exception
            context: extra context merged over the error's own

        Returns:
            the stored report
        """
        if isinstance(error, GrnDynamicsError):
            code, message = error.error_code, error.message
            merged = dict(error.context)
        else:
            code, message = classify_error(error), str(error)
            merged = {}
        merged.update(context or {})

        report = ErrorReport(datetime.now(), code, message, merged,
                             ''.join(traceback.format_exception(type(error), error, error.__traceback__)))
        self.error_reports.append(report)
        self.error_counts[code] = self.error_counts.get(code, 0) + 1

        level = logging.ERROR if code in self.CRITICAL_CODES else logging.WARNING
        logger.log(level, f"{code}: {message}", extra={'error_code': code, 'context': merged})
        return report

    def failed_parameters(self) -> List[int]:
        return sorted({r.parameter for r in self.error_reports if r.parameter is not None})

    def get_error_summary(self) -> Dict[str, Any]:
        critical = [r for r in self.error_reports if r.error_code in self.CRITICAL_CODES]
        return {
            'total_errors': len(self.error_reports),
            'error_counts': dict(self.error_counts),
            'failed_parameters': self.failed_parameters(),
            'critical_errors': [r.to_dict() for r in critical[-5:]],
            'recent_errors': [r.to_dict() for r in self.error_reports[-10:]],
        }

    def clear_errors(self):
        self.error_reports.clear()
        self.error_counts.clear()

    def export_error_report(self, file_path: str):
        """Write the summary and every report as JSON; a failed write is logged, not raised."""
        document = {
            'generated_at': datetime.now().isoformat(),
            'summary': self.get_error_summary(),
            'detailed_errors': [r.to_dict() for r in self.error_reports],
        }
        try:
            with open(file_path, 'w') as f:
                json.dump(document, f, indent=2, default=str)
            logger.info(f"Error report exported to: {file_path}")
        except OSError as e:
            logger.error(f"Failed to export error report: {e}")


def classify_error(error: Exception) -> str:
    """Error code for an exception raised outside the engine (numpy, scipy, the OS)."""
    if isinstance(error, (FileNotFoundError, PermissionError, IsADirectoryError)):
        return 'FILESYSTEM_ERROR'
    if 'yaml' in type(error).__name__.lower():
        return 'YAML_PARSING_ERROR'
    if isinstance(error, (FloatingPointError, OverflowError, ZeroDivisionError)):
        return 'SIMULATION_ERROR'
    if isinstance(error, (IndexError, KeyError)):
        return 'PARAMETER_INDEX_ERROR'
    if isinstance(error, (ValueError, TypeError)):
        return 'VALIDATION_ERROR'
    return 'UNKNOWN_ERROR'


def handle_errors(error_handler: ErrorHandler = None):
    """
    Decorator turning foreign exceptions into reported GrnDynamicsErrors.

    Domain errors pass through untouched; whoever catches them reports them.
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except GrnDynamicsError:
                raise
            except Exception as e:
                handler = error_handler or get_global_error_handler()
                report = handler.handle_error(e, {'function': func.__name__})
                raise GrnDynamicsError(str(e), report.error_code, report.context, e) from e
        return wrapper
    return decorator


def safe_execute(func: Callable, *args, default=None, error_handler: ErrorHandler = None, **kwargs):
    """Call ``func``; on any failure report it and return ``default``."""
    try:
        return func(*args, **kwargs)
    except Exception as e:
        (error_handler or get_global_error_handler()).handle_error(
            e, {'function': getattr(func, '__name__', 'unknown')})
        return default


_global_error_handler = ErrorHandler()


def get_global_error_handler() -> ErrorHandler:
    return _global_error_handler


def reset_global_error_handler():
    global _global_error_handler
    _global_error_handler = ErrorHandler()
