"""Single-file embedded store for dictionary tables.

Backed by sqlite. One store file can hold several dictionaries side by
side because every adapter owns distinct table names. The case-sensitivity
switch lives on the handle and is honoured by the query evaluator; it never
changes stored bytes.
"""
from __future__ import annotations

import sqlite3
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator

from .errors import (
    AlreadyExists,
    CorruptStore,
    NotFound,
    PermissionDenied,
    SchemaMissing,
    StoreBusy,
    UnknownBackend,
)
from .model import (
    ConceptRecord,
    DictionaryAdapter,
    FieldType,
    ParentLink,
    adapter_schema,
)

BACKEND_SQLITE = "sqlite"

_BUSY_TIMEOUT_MS = 250


class StoreMode(Enum):
    READ_ONLY = "ro"
    READ_WRITE = "rw"


class Direction(Enum):
    """Traversal direction for relationship queries."""

    DESCENDANTS = "descendants"
    ANCESTORS = "ancestors"


@dataclass(frozen=True)
class StoreConfig:
    """Connection settings; user/pass/host/port are accepted but unused here."""

    type: str
    dbname: str
    user: str | None = None
    password: str | None = None
    host: str | None = None
    port: str | None = None


def open_store(config: StoreConfig, mode: StoreMode = StoreMode.READ_ONLY) -> "StoreHandle":
    """Open (or, in read-write mode, create) the store file named by ``config``.

    Read-only opens of a missing file raise NotFound rather than creating
    one. Existing files are integrity-checked; failures raise CorruptStore.
    """
    if config.type != BACKEND_SQLITE:
        raise UnknownBackend(
            f"unsupported store type {config.type!r}; this build provides {BACKEND_SQLITE!r}"
        )
    if not config.dbname:
        raise NotFound("store path (dbname) is empty")

    path = Path(config.dbname)
    existed = path.exists()
    if mode is StoreMode.READ_ONLY:
        if not existed:
            raise NotFound(f"store file not found: {path}")
        if path.is_dir():
            raise PermissionDenied(f"store path is a directory: {path}")
        uri = f"file:{path}?mode=ro"
    else:
        if path.is_dir():
            raise PermissionDenied(f"store path is a directory: {path}")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
        except PermissionError as exc:
            raise PermissionDenied(str(exc)) from exc
        uri = f"file:{path}?mode=rwc"

    try:
        conn = sqlite3.connect(uri, uri=True, isolation_level=None)
    except sqlite3.OperationalError as exc:
        raise PermissionDenied(f"cannot open store {path}: {exc}") from exc

    conn.execute(f"PRAGMA busy_timeout = {_BUSY_TIMEOUT_MS}")
    handle = StoreHandle(config=config, mode=mode, conn=conn)
    if existed and path.stat().st_size > 0:
        handle._integrity_check()
    return handle


class StoreHandle:
    """Connection to one store file, carrying mode and the case-sensitivity flag."""

    def __init__(self, config: StoreConfig, mode: StoreMode, conn: sqlite3.Connection):
        self.config = config
        self.mode = mode
        self.case_sensitive = False
        self._conn = conn

    # -- lifecycle ----------------------------------------------------------

    def close(self) -> None:
        self._conn.close()

    def __enter__(self) -> "StoreHandle":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _integrity_check(self) -> None:
        try:
            row = self._conn.execute("PRAGMA quick_check").fetchone()
        except sqlite3.DatabaseError as exc:
            self._conn.close()
            raise CorruptStore(f"{self.config.dbname}: {exc}") from exc
        if row is None or row[0] != "ok":
            self._conn.close()
            raise CorruptStore(f"{self.config.dbname}: integrity check failed: {row}")

    def _require_write(self) -> None:
        if self.mode is not StoreMode.READ_WRITE:
            raise PermissionDenied("store handle is read-only")

    # -- case sensitivity -----------------------------------------------------

    def set_case_sensitivity(self, enabled: bool) -> None:
        """Toggle case-sensitive string comparison for queries on this handle."""
        self.case_sensitive = bool(enabled)

    # -- schema ---------------------------------------------------------------

    def table_exists(self, name: str) -> bool:
        row = self._conn.execute(
            "SELECT 1 FROM sqlite_master WHERE type = 'table' AND name = ?", (name,)
        ).fetchone()
        return row is not None

    def schema_initialized(self, adapter: DictionaryAdapter) -> bool:
        return self.table_exists(adapter.concept_table)

    def initialize_schema(self, adapter: DictionaryAdapter, overwrite: bool = False) -> None:
        """Create the adapter's concept table (and parent table for DAGs).

        Raises AlreadyExists when tables are present and overwrite is off.
        """
        self._require_write()
        if self.schema_initialized(adapter) and not overwrite:
            raise AlreadyExists(
                f"schema for {adapter.kind} already exists in {self.config.dbname}"
            )
        self.begin_exclusive()
        try:
            self._create_tables(adapter)
            self.commit()
        except BaseException:
            self.rollback()
            raise

    def _create_tables(self, adapter: DictionaryAdapter) -> None:
        """Drop and recreate the adapter's tables; caller manages the transaction."""
        schema = adapter_schema(adapter)
        self._conn.execute(f'DROP TABLE IF EXISTS "{adapter.concept_table}"')
        cols = []
        for name, ftype in schema.columns:
            if ftype in (FieldType.CODE, FieldType.TERM):
                cols.append(f'"{name}" TEXT NOT NULL')
            elif ftype is FieldType.FLAG:
                cols.append(f'"{name}" INTEGER NOT NULL DEFAULT 0')
            else:
                cols.append(f'"{name}" TEXT')
        self._conn.execute(
            f'CREATE TABLE "{adapter.concept_table}" ({", ".join(cols)})'
        )
        self._conn.execute(
            f'CREATE INDEX "idx_{adapter.concept_table}_code" '
            f'ON "{adapter.concept_table}" ("{adapter.code_field}")'
        )
        if adapter.parent_table:
            self._conn.execute(f'DROP TABLE IF EXISTS "{adapter.parent_table}"')
            self._conn.execute(
                f'CREATE TABLE "{adapter.parent_table}" '
                f'("{adapter.ptable_code_field}" TEXT NOT NULL, '
                f'"{adapter.ptable_parent_field}" TEXT NOT NULL)'
            )
            self._conn.execute(
                f'CREATE INDEX "idx_{adapter.parent_table}_code" '
                f'ON "{adapter.parent_table}" ("{adapter.ptable_code_field}")'
            )
            self._conn.execute(
                f'CREATE INDEX "idx_{adapter.parent_table}_parent" '
                f'ON "{adapter.parent_table}" ("{adapter.ptable_parent_field}")'
            )

    # -- transactions -----------------------------------------------------------

    def begin_exclusive(self) -> None:
        self._require_write()
        try:
            self._conn.execute("BEGIN IMMEDIATE")
        except sqlite3.OperationalError as exc:
            if "locked" in str(exc) or "busy" in str(exc):
                raise StoreBusy(f"another writer holds {self.config.dbname}") from exc
            raise

    def commit(self) -> None:
        self._conn.execute("COMMIT")

    def rollback(self) -> None:
        if self._conn.in_transaction:
            self._conn.execute("ROLLBACK")

    # -- writes -------------------------------------------------------------------

    def insert_concept(self, adapter: DictionaryAdapter, rec: ConceptRecord) -> None:
        schema = adapter_schema(adapter)
        values = []
        for name, ftype in schema.columns:
            if ftype is FieldType.CODE:
                values.append(rec.code)
            elif ftype is FieldType.TERM:
                values.append(rec.term)
            elif ftype is FieldType.FLAG:
                values.append(1 if rec.synonym else 0)
            elif ftype is FieldType.STATUS:
                values.append(rec.status)
            elif ftype is FieldType.TERM_ID:
                values.append(rec.term_id)
            else:
                values.append(rec.extras.get(name))
        placeholders = ", ".join("?" for _ in values)
        self._conn.execute(
            f'INSERT INTO "{adapter.concept_table}" VALUES ({placeholders})', values
        )

    def insert_link(self, adapter: DictionaryAdapter, link: ParentLink) -> None:
        self._conn.execute(
            f'INSERT INTO "{adapter.parent_table}" VALUES (?, ?)',
            (link.code, link.parent_code),
        )

    # -- reads ------------------------------------------------------------------------

    def _concept_order_by(self, adapter: DictionaryAdapter) -> str:
        schema = adapter_schema(adapter)
        keys = [f'"{adapter.code_field}"']
        if any(ftype is FieldType.TERM_ID for _, ftype in schema.columns):
            for name, ftype in schema.columns:
                if ftype is FieldType.TERM_ID:
                    keys.append(f'"{name}"')
        keys.append(f'"{adapter.term_field}"')
        return ", ".join(keys)

    def _record_from_row(self, adapter: DictionaryAdapter, row: tuple) -> ConceptRecord:
        schema = adapter_schema(adapter)
        rec = ConceptRecord(code="", term="")
        for (name, ftype), value in zip(schema.columns, row):
            if ftype is FieldType.CODE:
                rec.code = value
            elif ftype is FieldType.TERM:
                rec.term = value
            elif ftype is FieldType.FLAG:
                rec.synonym = bool(value)
            elif ftype is FieldType.STATUS:
                rec.status = value if value else None
            elif ftype is FieldType.TERM_ID:
                rec.term_id = value if value else None
            else:
                if value:
                    rec.extras[name] = value
        return rec

    def _require_concept_table(self, adapter: DictionaryAdapter) -> None:
        if not self.table_exists(adapter.concept_table):
            raise SchemaMissing(
                f"store {self.config.dbname} holds no {adapter.kind} concept table"
            )

    def scan_concepts(self, adapter: DictionaryAdapter) -> Iterator[ConceptRecord]:
        """Yield every stored record once, ordered by (code, term_id, term)."""
        self._require_concept_table(adapter)
        names = ", ".join(f'"{n}"' for n in adapter_schema(adapter).names)
        cursor = self._conn.execute(
            f'SELECT {names} FROM "{adapter.concept_table}" '
            f"ORDER BY {self._concept_order_by(adapter)}"
        )
        for row in cursor:
            yield self._record_from_row(adapter, row)

    def scan_links(self, adapter: DictionaryAdapter) -> Iterator[ParentLink]:
        """Yield every parent link once, ordered by (code, parent_code)."""
        if not adapter.parent_table or not self.table_exists(adapter.parent_table):
            raise SchemaMissing(
                f"store {self.config.dbname} holds no {adapter.kind} parent table"
            )
        cursor = self._conn.execute(
            f'SELECT "{adapter.ptable_code_field}", "{adapter.ptable_parent_field}" '
            f'FROM "{adapter.parent_table}" '
            f'ORDER BY "{adapter.ptable_code_field}", "{adapter.ptable_parent_field}"'
        )
        for code, parent in cursor:
            yield ParentLink(code=code, parent_code=parent)

    def concepts_by_code(self, adapter: DictionaryAdapter, code: str) -> list[ConceptRecord]:
        """Indexed point lookup; code comparison is always exact."""
        self._require_concept_table(adapter)
        names = ", ".join(f'"{n}"' for n in adapter_schema(adapter).names)
        cursor = self._conn.execute(
            f'SELECT {names} FROM "{adapter.concept_table}" '
            f'WHERE "{adapter.code_field}" = ? '
            f"ORDER BY {self._concept_order_by(adapter)}",
            (code,),
        )
        return [self._record_from_row(adapter, row) for row in cursor]

    def code_exists(self, adapter: DictionaryAdapter, code: str) -> bool:
        self._require_concept_table(adapter)
        row = self._conn.execute(
            f'SELECT 1 FROM "{adapter.concept_table}" WHERE "{adapter.code_field}" = ? LIMIT 1',
            (code,),
        ).fetchone()
        return row is not None

    def all_codes(self, adapter: DictionaryAdapter) -> list[str]:
        self._require_concept_table(adapter)
        cursor = self._conn.execute(
            f'SELECT DISTINCT "{adapter.code_field}" FROM "{adapter.concept_table}" '
            f'ORDER BY "{adapter.code_field}"'
        )
        return [row[0] for row in cursor]

    def link_neighbors(
        self, adapter: DictionaryAdapter, code: str, direction: Direction
    ) -> list[str]:
        """One-step neighbors in the parent table (children or parents of ``code``)."""
        if not adapter.parent_table or not self.table_exists(adapter.parent_table):
            raise SchemaMissing(
                f"store {self.config.dbname} holds no {adapter.kind} parent table"
            )
        if direction is Direction.DESCENDANTS:
            sql = (
                f'SELECT "{adapter.ptable_code_field}" FROM "{adapter.parent_table}" '
                f'WHERE "{adapter.ptable_parent_field}" = ?'
            )
        else:
            sql = (
                f'SELECT "{adapter.ptable_parent_field}" FROM "{adapter.parent_table}" '
                f'WHERE "{adapter.ptable_code_field}" = ?'
            )
        return [row[0] for row in self._conn.execute(sql, (code,))]
