"""Domain types, dictionary kinds, and the adapter registry.

A DictionaryAdapter describes one dictionary type: its table and field
names, its code shape, and how parent/child relationships are derived.
Built-in adapters for the four NHS dictionary types are registered at
import time; extensions register additional kinds through
:func:`register_adapter`.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import DuplicateKind, InvalidAdapter, UnknownKind

# Built-in dictionary-type names.
READ_V2 = "NHSReadV2"
READ_V3 = "NHSReadV3"
ICD10 = "NHSICD10"
SNOMED_CT = "NHSSnomedCT"

VALID_STATUSES = ("C", "R", "O", "E")

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class RelationStrategy(Enum):
    """How ancestor/descendant queries are answered for a dictionary."""

    PREFIX_HIERARCHY = "prefix_hierarchy"  # parents derived from code text
    DAG = "dag"                            # explicit parent-link table


class FieldType(Enum):
    """Semantic type of a schema column; drives parsing and validation."""

    CODE = "code"
    TERM = "term"
    TEXT = "text"
    FLAG = "flag"        # boolean, encoded 0/1 in files
    STATUS = "status"    # one of C/R/O/E, may be absent
    TERM_ID = "term_id"  # per-code term identifier, may be absent


@dataclass(frozen=True)
class DictionaryAdapter:
    """Schema and traversal strategy descriptor for one dictionary type.

    ``code_length`` is the stored width: exact for dot-padded dictionaries,
    a maximum for variable-width ones. ``min_code_length`` is the smallest
    number of significant (non-pad) characters a valid code may have.
    """

    kind: str
    concept_table: str
    code_field: str
    term_field: str
    relation_strategy: RelationStrategy
    code_length: int
    parent_table: str | None = None
    ptable_code_field: str | None = None
    ptable_parent_field: str | None = None
    extra_fields: tuple[tuple[str, FieldType], ...] = ()
    pad_codes: bool = True
    pad_char: str = "."
    min_code_length: int = 1
    root_code: str | None = None

    def significant(self, code: str) -> str:
        """The code with trailing pad characters removed (identity when unpadded)."""
        return code.rstrip(self.pad_char) if self.pad_codes else code

    def code_shape_problem(self, code: str) -> str | None:
        """Reason string when ``code`` does not fit this adapter, else None."""
        if not code:
            return "empty code"
        if self.pad_codes:
            if len(code) != self.code_length:
                return f"code must be exactly {self.code_length} characters, got {len(code)}"
            sig = code.rstrip(self.pad_char)
            if self.pad_char in sig:
                return f"pad character {self.pad_char!r} inside significant part"
        else:
            if len(code) > self.code_length:
                return f"code longer than {self.code_length} characters"
            sig = code
        if len(sig) < self.min_code_length:
            return f"fewer than {self.min_code_length} significant characters"
        return None


@dataclass(frozen=True)
class SchemaInfo:
    """Ordered column layout of one dictionary's concept table."""

    table: str
    columns: tuple[tuple[str, FieldType], ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.columns)

    def type_of(self, name: str) -> FieldType | None:
        for col, ftype in self.columns:
            if col == name:
                return ftype
        return None


@dataclass
class ConceptRecord:
    """One concept-table row: a code plus one of its terms.

    ``extras`` holds the dictionary-specific text columns (keyed by column
    name); absent optional values are simply missing from the mapping.
    """

    code: str
    term: str
    synonym: bool = False
    status: str | None = None
    term_id: str | None = None
    extras: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ParentLink:
    """One directed edge (code -> parent code) in a DAG dictionary."""

    code: str
    parent_code: str


# --- registry -----------------------------------------------------------------

_REGISTRY: dict[str, DictionaryAdapter] = {}


def _check_identifier(name: str | None, what: str) -> None:
    if not name or not _IDENT_RE.match(name):
        raise InvalidAdapter(f"{what} must be a plain identifier, got {name!r}")


def _validate_adapter(adapter: DictionaryAdapter) -> None:
    if not adapter.kind or not adapter.kind.strip():
        raise InvalidAdapter("kind name must be non-empty")
    _check_identifier(adapter.concept_table, "concept_table")
    _check_identifier(adapter.code_field, "code_field")
    _check_identifier(adapter.term_field, "term_field")

    dag = adapter.relation_strategy is RelationStrategy.DAG
    has_ptable = (
        adapter.parent_table is not None
        and adapter.ptable_code_field is not None
        and adapter.ptable_parent_field is not None
    )
    if dag and not has_ptable:
        raise InvalidAdapter(
            "DAG strategy requires parent_table, ptable_code_field and ptable_parent_field"
        )
    if not dag and (
        adapter.parent_table is not None
        or adapter.ptable_code_field is not None
        or adapter.ptable_parent_field is not None
    ):
        raise InvalidAdapter("prefix-hierarchy adapters must not declare a parent table")
    if dag:
        _check_identifier(adapter.parent_table, "parent_table")
        _check_identifier(adapter.ptable_code_field, "ptable_code_field")
        _check_identifier(adapter.ptable_parent_field, "ptable_parent_field")
        if adapter.ptable_code_field == adapter.ptable_parent_field:
            raise InvalidAdapter("parent-table code and parent fields must differ")

    if adapter.code_length < 1:
        raise InvalidAdapter("code_length must be >= 1")
    if not 0 <= adapter.min_code_length <= adapter.code_length:
        raise InvalidAdapter("min_code_length must lie between 0 and code_length")
    if len(adapter.pad_char) != 1:
        raise InvalidAdapter("pad_char must be a single character")

    seen = {adapter.code_field, adapter.term_field}
    if len(seen) != 2:
        raise InvalidAdapter("code_field and term_field must differ")
    special_seen: set[FieldType] = set()
    for name, ftype in adapter.extra_fields:
        _check_identifier(name, "extra field name")
        if name in seen:
            raise InvalidAdapter(f"duplicate column name {name!r}")
        seen.add(name)
        if ftype in (FieldType.CODE, FieldType.TERM):
            raise InvalidAdapter("extra fields cannot use the CODE or TERM types")
        if ftype in (FieldType.FLAG, FieldType.STATUS, FieldType.TERM_ID):
            if ftype in special_seen:
                raise InvalidAdapter(f"at most one {ftype.value} column is allowed")
            special_seen.add(ftype)

    if adapter.root_code is not None:
        problem = adapter.code_shape_problem(adapter.root_code)
        if problem:
            raise InvalidAdapter(f"root_code invalid: {problem}")


def register_adapter(adapter: DictionaryAdapter) -> None:
    """Register an adapter under its kind name.

    Raises DuplicateKind when the name is taken and InvalidAdapter when the
    adapter violates its invariants. Built-ins are pre-registered at import.
    """
    _validate_adapter(adapter)
    if adapter.kind in _REGISTRY:
        raise DuplicateKind(f"dictionary kind {adapter.kind!r} is already registered")
    _REGISTRY[adapter.kind] = adapter


def resolve_adapter(kind_name: str) -> DictionaryAdapter:
    """Return the adapter registered under ``kind_name``."""
    try:
        return _REGISTRY[kind_name]
    except KeyError:
        raise UnknownKind(
            f"unknown dictionary kind {kind_name!r}; "
            f"registered kinds: {', '.join(sorted(_REGISTRY))}"
        ) from None


def registered_kinds() -> list[str]:
    return sorted(_REGISTRY)


def adapter_schema(adapter: DictionaryAdapter) -> SchemaInfo:
    """Full ordered column layout: code, term, then the adapter's extra fields."""
    columns = (
        (adapter.code_field, FieldType.CODE),
        (adapter.term_field, FieldType.TERM),
        *adapter.extra_fields,
    )
    return SchemaInfo(table=adapter.concept_table, columns=columns)


# --- built-in adapters -----------------------------------------------------------

_BUILTINS = (
    DictionaryAdapter(
        kind=READ_V2,
        concept_table="readv2_concept",
        code_field="read_code",
        term_field="term",
        relation_strategy=RelationStrategy.PREFIX_HIERARCHY,
        code_length=5,
        min_code_length=1,
    ),
    DictionaryAdapter(
        kind=READ_V3,
        concept_table="readv3_concept",
        code_field="read_code",
        term_field="term",
        relation_strategy=RelationStrategy.DAG,
        code_length=5,
        parent_table="readv3_concept_parents",
        ptable_code_field="read_code",
        ptable_parent_field="parent_read_code",
        extra_fields=(
            ("term_30", FieldType.TEXT),
            ("term_60", FieldType.TEXT),
            ("term_198", FieldType.TEXT),
            ("term_id", FieldType.TERM_ID),
            ("synonym", FieldType.FLAG),
            ("status", FieldType.STATUS),
        ),
        # the thesaurus root is the all-pad code
        min_code_length=0,
        root_code=".....",
    ),
    DictionaryAdapter(
        kind=ICD10,
        concept_table="icd10_concept",
        code_field="icd10_code",
        term_field="term",
        relation_strategy=RelationStrategy.PREFIX_HIERARCHY,
        code_length=5,
        extra_fields=(
            ("description", FieldType.TEXT),
            ("modifier_4", FieldType.TEXT),
            ("modifier_5", FieldType.TEXT),
            ("tree_description", FieldType.TEXT),
        ),
        pad_codes=False,
        min_code_length=3,
    ),
    DictionaryAdapter(
        kind=SNOMED_CT,
        concept_table="snomed_concept",
        code_field="snomed_code",
        term_field="term",
        relation_strategy=RelationStrategy.DAG,
        code_length=18,
        parent_table="snomed_concept_parents",
        ptable_code_field="snomed_code",
        ptable_parent_field="parent_snomed_code",
        extra_fields=(
            ("term_id", FieldType.TERM_ID),
            ("synonym", FieldType.FLAG),
            ("status", FieldType.STATUS),
        ),
        pad_codes=False,
        min_code_length=6,
    ),
)

for _adapter in _BUILTINS:
    register_adapter(_adapter)
