"""
Run manifests: the provenance record written next to every result file.

A manifest names the subcommand, the tool and format versions, the network
fingerprint, the spec hash, the index range or sample that was processed and
simple counters. Manifests written by another format version are rejected.
"""

import logging
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

from .exceptions import ManifestVersionError, YAMLParsingError
from .records import load_yaml, save_yaml

logger = logging.getLogger(__name__)

TOOL_NAME = 'grn-dynamics'
TOOL_VERSION = '1.0.0'
FORMAT_VERSION = 1
MANIFEST_SUFFIX = '.manifest.yaml'


def build_fingerprint() -> str:
    """Version string printed by ``--version`` and embedded in manifests."""
    return f"{TOOL_NAME} {TOOL_VERSION} (record format {FORMAT_VERSION})"


def manifest_path(output_path: str) -> str:
    """Sidecar manifest of a single-file output: ``<output>.manifest.yaml``."""
    return output_path + MANIFEST_SUFFIX


@dataclass
class RunManifest:
    subcommand: str
    network_fingerprint: Optional[str] = None
    spec_hash: Optional[str] = None
    phenotype: Optional[str] = None
    range: Optional[List[int]] = None
    sample: Optional[Dict[str, int]] = None
    seed: Optional[int] = None
    input_hashes: Dict[str, str] = field(default_factory=dict)
    processed: int = 0
    matched: int = 0
    errors: int = 0
    complete: bool = False
    started: str = field(default_factory=lambda: datetime.now().isoformat(timespec='seconds'))
    finished: Optional[str] = None
    elapsed_seconds: Optional[float] = None
    notes: Dict[str, Any] = field(default_factory=dict)
    version: str = TOOL_VERSION
    format_version: int = FORMAT_VERSION

    @property
    def parameter_count(self) -> int:
        """Number of parameter indices the manifest covers."""
        if self.range is not None:
            return self.range[1] - self.range[0]
        if self.sample is not None:
            return int(self.sample.get('count', 0))
        return 0

    def finish(self, started_at: datetime):
        now = datetime.now()
        self.finished = now.isoformat(timespec='seconds')
        self.elapsed_seconds = round((now - started_at).total_seconds(), 3)
        self.complete = True

    def attach(self, output_path: str) -> str:
        """
        Save as the sidecar manifest of a single output file.

        Returns the sidecar's file name, which the output embeds as its reference.
        """
        self.notes['output'] = os.path.basename(output_path)
        self.finished = datetime.now().isoformat(timespec='seconds')
        self.complete = True
        path = manifest_path(output_path)
        self.save(path)
        return os.path.basename(path)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any], file_path: Optional[str] = None) -> 'RunManifest':
        if not isinstance(data, dict) or 'subcommand' not in data:
            raise YAMLParsingError("Manifest document is missing 'subcommand'", file_path=file_path)
        found = data.get('format_version')
        if found != FORMAT_VERSION:
            raise ManifestVersionError(
                f"Manifest format version {found} is not supported (expected {FORMAT_VERSION})",
                found=found, expected=FORMAT_VERSION, file_path=file_path)
        known = {name for name in cls.__dataclass_fields__}
        unknown = sorted(set(data) - known)
        if unknown:
            logger.warning(f"Ignoring unknown manifest keys: {unknown}", extra={'file_path': file_path})
        return cls(**{key: value for key, value in data.items() if key in known})

    def save(self, file_path: str):
        save_yaml(self.to_dict(), file_path)
        logger.debug(f"Manifest written: {file_path}")

    @classmethod
    def load(cls, file_path: str) -> 'RunManifest':
        return cls.from_dict(load_yaml(file_path), file_path)
