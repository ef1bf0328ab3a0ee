"""termforge: build and query single-file clinical concept dictionary stores.

Supports Read v2, Read v3 (CTV3), ICD-10 and SNOMED-CT dictionary shapes,
term/code searches through a small predicate DSL, and ancestor/descendant
queries over both prefix hierarchies and DAGs.
"""
from .errors import (
    AlreadyBuilt,
    AlreadyExists,
    BadJson,
    CodeWidthError,
    CorruptStore,
    CycleDetected,
    DanglingParent,
    DuplicateKind,
    InvalidAdapter,
    MalformedRow,
    MissingColumn,
    MissingKey,
    NotFound,
    PermissionDenied,
    PredicateSyntaxError,
    SchemaMissing,
    StoreBusy,
    TermforgeError,
    UnknownBackend,
    UnknownCode,
    UnknownField,
    UnknownKind,
)
from .ingest import (
    BuildReport,
    SourceBundle,
    build_concept_tables,
    compose_icd10_term,
    parse_source,
)
from .model import (
    ICD10,
    READ_V2,
    READ_V3,
    SNOMED_CT,
    ConceptRecord,
    DictionaryAdapter,
    FieldType,
    ParentLink,
    RelationStrategy,
    SchemaInfo,
    adapter_schema,
    register_adapter,
    registered_kinds,
    resolve_adapter,
)
from .query import (
    OutputMode,
    Predicate,
    eval_predicate,
    parse_predicate,
    search_concepts,
    validate_predicate,
)
from .relations import (
    ClosureRequest,
    dag_closure,
    edge_lookup,
    get_child_codes,
    get_parent_codes,
    prefix_children,
    prefix_parent,
)
from .store import (
    Direction,
    StoreConfig,
    StoreHandle,
    StoreMode,
    open_store,
)

__version__ = "0.1.0"
