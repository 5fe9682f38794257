"""
File I/O helpers: YAML documents, newline-delimited JSON records and content hashes.

All readers and writers translate OS and parser failures into FileSystemError or
YAMLParsingError so callers only deal with the engine's own exceptions.
"""

import hashlib
import json
import logging
import os
from typing import Any, Dict, Iterable, Iterator, List

import yaml

from .exceptions import FileSystemError, YAMLParsingError

logger = logging.getLogger(__name__)


def save_yaml(data: Any, file_path: str):
    """
    Save data to a YAML file, creating the parent directory if needed.

    Args:
        data: Data to save
        file_path: Path where to save the file
    """
    try:
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)

        with open(file_path, 'w') as f:
            yaml.dump(data, f, default_flow_style=False, sort_keys=False, indent=2)

    except PermissionError as e:
        raise FileSystemError(f"Permission denied writing to file: {file_path}",
                              file_path=file_path, operation="write", cause=e)
    except OSError as e:
        raise FileSystemError(f"Failed to write YAML file: {file_path}",
                              file_path=file_path, operation="write", cause=e)
    except yaml.YAMLError as e:
        raise YAMLParsingError(f"Failed to serialize data to YAML: {e}",
                               file_path=file_path, cause=e)


def load_yaml(file_path: str) -> Any:
    """
    Load data from a YAML file.

    Args:
        file_path: Path to the YAML file

    Returns:
        Loaded data
    """
    try:
        with open(file_path, 'r') as f:
            return yaml.safe_load(f)
    except FileNotFoundError as e:
        raise FileSystemError(f"YAML file not found: {file_path}",
                              file_path=file_path, operation="read", cause=e)
    except PermissionError as e:
        raise FileSystemError(f"Permission denied reading YAML file: {file_path}",
                              file_path=file_path, operation="read", cause=e)
    except yaml.YAMLError as e:
        line = None
        mark = getattr(e, 'problem_mark', None)
        if mark is not None:
            line = mark.line + 1
        raise YAMLParsingError(f"Failed to parse YAML file: {file_path}",
                               file_path=file_path, line_number=line, cause=e)


def read_text(file_path: str) -> str:
    """Read a UTF-8 text file."""
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            return f.read()
    except FileNotFoundError as e:
        raise FileSystemError(f"File not found: {file_path}",
                              file_path=file_path, operation="read", cause=e)
    except OSError as e:
        raise FileSystemError(f"Failed to read file: {file_path}",
                              file_path=file_path, operation="read", cause=e)


def write_text(text: str, file_path: str):
    """Write a UTF-8 text file, creating the parent directory if needed."""
    try:
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(file_path, 'w', encoding='utf-8') as f:
            f.write(text)
    except OSError as e:
        raise FileSystemError(f"Failed to write file: {file_path}",
                              file_path=file_path, operation="write", cause=e)


def dump_record(record: Dict[str, Any]) -> str:
    """Canonical one-line JSON encoding of a record (sorted keys, no spaces)."""
    return json.dumps(record, sort_keys=True, separators=(',', ':'))


def write_jsonl(records: Iterable[Dict[str, Any]], file_path: str, append: bool = False) -> int:
    """
    Write records as newline-delimited JSON.

    Returns:
        Number of records written
    """
    count = 0
    try:
        directory = os.path.dirname(file_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(file_path, 'a' if append else 'w', encoding='utf-8') as f:
            for record in records:
                f.write(dump_record(record))
                f.write('\n')
                count += 1
    except OSError as e:
        raise FileSystemError(f"Failed to write records: {file_path}",
                              file_path=file_path, operation="write", cause=e)
    return count


def iter_jsonl(file_path: str) -> Iterator[Dict[str, Any]]:
    """Iterate over the records of a newline-delimited JSON file."""
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            for line_number, line in enumerate(f, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as e:
                    raise YAMLParsingError(f"Malformed record at {file_path}:{line_number}",
                                           file_path=file_path, line_number=line_number, cause=e)
    except FileNotFoundError as e:
        raise FileSystemError(f"Record file not found: {file_path}",
                              file_path=file_path, operation="read", cause=e)


def read_jsonl(file_path: str) -> List[Dict[str, Any]]:
    return list(iter_jsonl(file_path))


def text_hash(text: str) -> str:
    """sha256 hex digest of a text."""
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def file_hash(file_path: str) -> str:
    """sha256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    try:
        with open(file_path, 'rb') as f:
            for chunk in iter(lambda: f.read(65536), b''):
                digest.update(chunk)
    except OSError as e:
        raise FileSystemError(f"Failed to hash file: {file_path}",
                              file_path=file_path, operation="read", cause=e)
    return digest.hexdigest()


def data_hash(data: Any) -> str:
    """sha256 of the canonical JSON encoding of a data structure."""
    return text_hash(json.dumps(data, sort_keys=True, separators=(',', ':'), default=str))
