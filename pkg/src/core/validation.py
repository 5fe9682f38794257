"""
Validation framework for phenotype spec and pattern documents.

Documents are first checked against a JSON schema (structure, types, enums) and
then by rule objects that express the cross-field constraints a schema cannot:
which fields a phenotype kind needs, and the shape of fixed-point tuples.
Errors are collected and returned as a list; callers raise the domain error.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Sequence, Set

from jsonschema import Draft7Validator

logger = logging.getLogger(__name__)

PHENOTYPE_KINDS = ['WT_CYCLING', 'MUTANT_CYCLING', 'CHECKPOINT_FP']
RESTRICTION_LABELS = ['WT', 'ON', 'OFF', 'INT_H', 'INT_L']
CHECKPOINT_PRESETS = ['SAC', 'DRC_NRM1', 'DRC_YOX1']
NOT_LOW = 'not_low'

PHENOTYPE_SPEC_SCHEMA: Dict[str, Any] = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'required': ['name', 'kind'],
    'additionalProperties': False,
    'properties': {
        'name': {'type': 'string', 'pattern': r'^[A-Za-z0-9_.\-]+$'},
        'kind': {'type': 'string', 'enum': PHENOTYPE_KINDS},
        'description': {'type': 'string'},
        'network': {'type': 'string'},
        'pattern': {'type': 'string', 'minLength': 1},
        'fixed_node': {'type': 'string', 'minLength': 1},
        'restriction': {'type': 'string', 'enum': RESTRICTION_LABELS},
        'mode': {'type': 'string', 'enum': ['restricted', 'relaxed']},
        'match': {'type': 'string', 'enum': ['cycle', 'path']},
        'stable_only': {'type': 'boolean'},
        'preset': {'type': 'string', 'enum': CHECKPOINT_PRESETS},
        'fixed_points': {
            'type': 'array',
            'minItems': 1,
            'items': {
                'type': 'array',
                'minItems': 1,
                'items': {'anyOf': [{'type': 'integer', 'minimum': 0},
                                    {'type': 'string', 'enum': [NOT_LOW]}]},
            },
        },
    },
}

PATTERN_SCHEMA: Dict[str, Any] = {
    '$schema': 'http://json-schema.org/draft-07/schema#',
    'type': 'object',
    'required': ['events'],
    'properties': {
        'events': {
            'type': 'array',
            'items': {
                'type': 'object',
                'required': ['gene', 'kind'],
                'properties': {
                    'gene': {'type': 'string', 'minLength': 1},
                    'kind': {'type': 'string', 'enum': ['min', 'max']},
                    'ordinal': {'type': 'integer', 'minimum': 1},
                },
            },
        },
        'order': {
            'type': ['array', 'null'],
            'items': {'type': 'array', 'minItems': 2, 'maxItems': 2, 'items': {'type': 'string'}},
        },
        'metadata': {'type': ['object', 'null']},
    },
}


class DocumentRule(ABC):
    """A constraint between fields of one document that the schema cannot state."""

    @abstractmethod
    def check(self, obj: Dict[str, Any]) -> List[str]:
        """Messages for every violation; empty when the document passes."""


class RequiredByKindRule(DocumentRule):
    """
    Fields a document needs depending on the value of a selector field.

    ``requirements`` maps a selector value to the fields it needs; a nested list
    means any one of those fields will do.
    """

    def __init__(self, selector: str, requirements: Dict[str, List[Any]]):
        self.selector = selector
        self.requirements = requirements

    def check(self, obj: Dict[str, Any]) -> List[str]:
        needed = self.requirements.get(obj.get(self.selector), [])
        errors = []
        for entry in needed:
            options = entry if isinstance(entry, list) else [entry]
            if all(obj.get(name) is None for name in options):
                errors.append(f"{self.selector} {obj[self.selector]} needs '{' or '.join(options)}'")
        return errors


class ExclusiveFieldsRule(DocumentRule):
    def __init__(self, *groups: Sequence[str]):
        self.groups = groups

    def check(self, obj: Dict[str, Any]) -> List[str]:
        errors = []
        for group in self.groups:
            given = [name for name in group if obj.get(name) is not None]
            if len(given) > 1:
                errors.append(f"only one of {list(group)} may be given, found {given}")
        return errors


class FixedPointShapeRule(DocumentRule):
    """All fixed-point tuples have one coordinate per network node."""

    def __init__(self, node_count: Optional[int] = None):
        self.node_count = node_count

    def check(self, obj: Dict[str, Any]) -> List[str]:
        points = [p for p in obj.get('fixed_points') or [] if isinstance(p, list)]
        errors = []
        lengths = sorted({len(p) for p in points})
        if len(lengths) > 1:
            errors.append(f"Fixed-point tuples have differing lengths: {lengths}")
        if self.node_count is not None:
            errors.extend(f"Fixed point {p} has {len(p)} coordinates; the network has {self.node_count} nodes"
                          for p in points if len(p) != self.node_count)
        return errors


class KnownGenesRule(DocumentRule):
    """Every pattern event names a gene the network or the time series provides."""

    def __init__(self, genes: Sequence[str]):
        self.genes: Set[str] = set(genes)

    def check(self, obj: Dict[str, Any]) -> List[str]:
        return [f"events.{i}: unknown gene '{event['gene']}'"
                for i, event in enumerate(obj['events']) if event['gene'] not in self.genes]


class DocumentValidator:
    """JSON-schema check first; the rules only run on documents the schema accepts."""

    def __init__(self, schema: Dict[str, Any], rules: Sequence[DocumentRule] = ()):
        self.schema_validator = Draft7Validator(schema)
        self.rules = list(rules)

    def validate(self, obj: Any) -> List[str]:
        errors = []
        for error in sorted(self.schema_validator.iter_errors(obj), key=lambda e: list(e.absolute_path)):
            location = '.'.join(str(p) for p in error.absolute_path) or '<root>'
            errors.append(f"{location}: {error.message}")
        if errors:
            logger.debug(f"Schema rejected document with {len(errors)} error(s)")
            return errors
        for rule in self.rules:
            errors.extend(rule.check(obj))
        return errors


def validate_phenotype_spec(data: Any, node_count: Optional[int] = None) -> List[str]:
    validator = DocumentValidator(PHENOTYPE_SPEC_SCHEMA, [
        RequiredByKindRule('kind', {
            'WT_CYCLING': ['pattern'],
            'MUTANT_CYCLING': ['pattern', 'fixed_node', 'restriction'],
            'CHECKPOINT_FP': [['fixed_points', 'preset']],
        }),
        ExclusiveFieldsRule(['fixed_points', 'preset']),
        FixedPointShapeRule(node_count),
    ])
    return validator.validate(data)


def validate_pattern_document(data: Any, known_genes: Optional[Sequence[str]] = None) -> List[str]:
    """Schema check of a pattern file, optionally against the genes a network or series provides."""
    rules = [] if known_genes is None else [KnownGenesRule(known_genes)]
    return DocumentValidator(PATTERN_SCHEMA, rules).validate(data)
