"""Parse dictionary source directories and drive full store builds.

Source directories use a documented tab-separated interchange layout:

* ``concepts.tsv`` — one header line naming the adapter schema columns in
  order, then one row per concept record. UTF-8, LF line endings, no quoting;
  fields must not contain tabs. Boolean flags are encoded 0/1 and an empty
  string denotes an absent optional field.
* ``parents.tsv`` — required for DAG dictionaries only; header
  ``code<TAB>parent_code`` followed by one row per directed link.

Builds are atomic: either every parsed record and link is committed, or the
store is left exactly as found.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .errors import (
    AlreadyBuilt,
    CodeWidthError,
    CycleDetected,
    DanglingParent,
    MalformedRow,
    MissingColumn,
    NotFound,
)
from .model import (
    ConceptRecord,
    DictionaryAdapter,
    FieldType,
    ParentLink,
    VALID_STATUSES,
    adapter_schema,
)
from .store import StoreHandle

CONCEPTS_FILENAME = "concepts.tsv"
PARENTS_FILENAME = "parents.tsv"
PARENTS_HEADER = ("code", "parent_code")

_ICD10_COMPOSE_COLUMNS = ("description", "modifier_4", "modifier_5")


@dataclass(frozen=True)
class SourceBundle:
    """The files making up one dictionary source directory."""

    root_dir: Path
    concepts_file: Path
    parents_file: Path | None = None

    @classmethod
    def from_dir(cls, adapter: DictionaryAdapter, root: str | Path) -> "SourceBundle":
        root = Path(root)
        if not root.is_dir():
            raise NotFound(f"source directory not found: {root}")
        concepts = root / CONCEPTS_FILENAME
        if not concepts.is_file():
            raise NotFound(f"concepts file not found: {concepts}")
        parents: Path | None = None
        if adapter.parent_table:
            parents = root / PARENTS_FILENAME
            if not parents.is_file():
                raise NotFound(f"parents file not found: {parents}")
        return cls(root_dir=root, concepts_file=concepts, parents_file=parents)


class RejectedRow(NamedTuple):
    file: str
    line: int
    reason: str


class ParseResult(NamedTuple):
    records: list[ConceptRecord]
    links: list[ParentLink]
    rejects: list[RejectedRow]


@dataclass
class BuildReport:
    """Counts from one build; ``rejects`` is populated only by lenient builds."""

    concepts: int
    links: int
    rejected: int
    rejects: list[RejectedRow] = field(default_factory=list)


def compose_icd10_term(
    description: str,
    modifier_4: str | None,
    modifier_5: str | None,
    code: str,
) -> str:
    """Build the searchable term for an ICD-10 code.

    The base description stands alone for 3-character codes; the 4th- and
    5th-character modifier texts are appended when the code reaches that
    length and the modifier is present. Absent modifiers contribute nothing.
    """
    parts = [description]
    if len(code) >= 4 and modifier_4:
        parts.append(modifier_4)
    if len(code) >= 5 and modifier_5:
        parts.append(modifier_5)
    return " ".join(parts)


def _read_rows(path: Path) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Return (header fields, [(line number, row fields), ...])."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MissingColumn(f"{path.name}: empty file, header row is mandatory")
    header = lines[0].rstrip("\r").split("\t")
    rows = []
    for idx, line in enumerate(lines[1:], start=2):
        rows.append((idx, line.rstrip("\r").split("\t")))
    return header, rows


def _check_header(path: Path, header: list[str], expected: tuple[str, ...]) -> None:
    if tuple(header) == expected:
        return
    missing = [name for name in expected if name not in header]
    if missing:
        raise MissingColumn(f"{path.name}: missing column(s) {', '.join(missing)}")
    raise MissingColumn(
        f"{path.name}: header {header!r} does not match expected column order {list(expected)!r}"
    )


class _Collector:
    """Routes row-level defects: raise in strict mode, collect in lenient mode."""

    def __init__(self, lenient: bool):
        self.lenient = lenient
        self.rejects: list[RejectedRow] = []

    def reject(self, exc: MalformedRow | CodeWidthError | DanglingParent) -> None:
        if not self.lenient:
            raise exc
        self.rejects.append(RejectedRow(exc.file, exc.line, exc.reason))


def _parse_concepts(
    adapter: DictionaryAdapter,
    path: Path,
    collector: _Collector,
) -> list[tuple[int, ConceptRecord]]:
    schema = adapter_schema(adapter)
    header, rows = _read_rows(path)
    _check_header(path, header, schema.names)

    compose = all(
        schema.type_of(name) is FieldType.TEXT for name in _ICD10_COMPOSE_COLUMNS
    )
    has_flag = any(ftype is FieldType.FLAG for _, ftype in schema.columns)
    width = len(schema.names)

    out: list[tuple[int, ConceptRecord]] = []
    seen_keys: set[tuple] = set()
    preferred_seen: set[str] = set()
    fname = path.name

    for line_no, fields in rows:
        if len(fields) == 1 and fields[0] == "":
            continue  # blank line
        if len(fields) != width:
            collector.reject(
                MalformedRow(
                    f"expected {width} fields, got {len(fields)}",
                    file=fname,
                    line=line_no,
                )
            )
            continue

        rec = ConceptRecord(code="", term="")
        bad = False
        for (name, ftype), value in zip(schema.columns, fields):
            if ftype is FieldType.CODE:
                problem = adapter.code_shape_problem(value)
                if problem:
                    collector.reject(
                        CodeWidthError(
                            f"code {value!r}: {problem}", file=fname, line=line_no
                        )
                    )
                    bad = True
                    break
                rec.code = value
            elif ftype is FieldType.TERM:
                rec.term = value
            elif ftype is FieldType.FLAG:
                if value not in ("0", "1"):
                    collector.reject(
                        MalformedRow(
                            f"{name} flag must be 0 or 1, got {value!r}",
                            file=fname,
                            line=line_no,
                        )
                    )
                    bad = True
                    break
                rec.synonym = value == "1"
            elif ftype is FieldType.STATUS:
                if value and value not in VALID_STATUSES:
                    collector.reject(
                        MalformedRow(
                            f"invalid status {value!r}; expected one of "
                            f"{'/'.join(VALID_STATUSES)}",
                            file=fname,
                            line=line_no,
                        )
                    )
                    bad = True
                    break
                rec.status = value or None
            elif ftype is FieldType.TERM_ID:
                rec.term_id = value or None
            else:
                if value:
                    rec.extras[name] = value
        if bad:
            continue

        if compose and rec.extras.get("description"):
            rec.term = compose_icd10_term(
                rec.extras.get("description", ""),
                rec.extras.get("modifier_4"),
                rec.extras.get("modifier_5"),
                rec.code,
            )
        if not rec.term:
            collector.reject(MalformedRow("empty term", file=fname, line=line_no))
            continue

        key = ("id", rec.code, rec.term_id) if rec.term_id else ("term", rec.code, rec.term)
        if key in seen_keys:
            which = f"term id {rec.term_id!r}" if rec.term_id else f"term {rec.term!r}"
            collector.reject(
                MalformedRow(
                    f"duplicate record for code {rec.code!r} ({which})",
                    file=fname,
                    line=line_no,
                )
            )
            continue
        seen_keys.add(key)

        if has_flag and not rec.synonym:
            if rec.code in preferred_seen:
                collector.reject(
                    MalformedRow(
                        f"second preferred (non-synonym) record for code {rec.code!r}",
                        file=fname,
                        line=line_no,
                    )
                )
                continue
            preferred_seen.add(rec.code)

        out.append((line_no, rec))

    if has_flag:
        out = _enforce_preferred(out, preferred_seen, fname, collector)
    return out


def _enforce_preferred(
    rows: list[tuple[int, ConceptRecord]],
    preferred_seen: set[str],
    fname: str,
    collector: _Collector,
) -> list[tuple[int, ConceptRecord]]:
    """Every code of a synonym-capable dictionary needs exactly one preferred record."""
    orphan_lines: dict[str, int] = {}
    for line_no, rec in rows:
        if rec.code not in preferred_seen and rec.code not in orphan_lines:
            orphan_lines[rec.code] = line_no
    if not orphan_lines:
        return rows
    if not collector.lenient:
        code, line_no = next(iter(orphan_lines.items()))
        raise MalformedRow(
            f"code {code!r} has no preferred (non-synonym) record",
            file=fname,
            line=line_no,
        )
    kept = []
    for line_no, rec in rows:
        if rec.code in orphan_lines:
            collector.rejects.append(
                RejectedRow(fname, line_no, f"code {rec.code!r} has no preferred record")
            )
        else:
            kept.append((line_no, rec))
    return kept


def _parse_parents(
    adapter: DictionaryAdapter,
    path: Path,
    known_codes: set[str],
    collector: _Collector,
) -> list[ParentLink]:
    header, rows = _read_rows(path)
    _check_header(path, header, PARENTS_HEADER)
    fname = path.name

    links: list[ParentLink] = []
    seen: set[ParentLink] = set()
    for line_no, fields in rows:
        if len(fields) == 1 and fields[0] == "":
            continue
        if len(fields) != 2:
            collector.reject(
                MalformedRow(f"expected 2 fields, got {len(fields)}", file=fname, line=line_no)
            )
            continue
        code, parent = fields
        bad = False
        for value in (code, parent):
            problem = adapter.code_shape_problem(value)
            if problem:
                collector.reject(
                    CodeWidthError(f"code {value!r}: {problem}", file=fname, line=line_no)
                )
                bad = True
                break
        if bad:
            continue
        dangling = next((c for c in (code, parent) if c not in known_codes), None)
        if dangling is not None:
            collector.reject(
                DanglingParent(
                    f"link references unknown code {dangling!r}", file=fname, line=line_no
                )
            )
            continue
        link = ParentLink(code=code, parent_code=parent)
        if link in seen:
            collector.reject(
                MalformedRow(
                    f"duplicate link {code!r} -> {parent!r}", file=fname, line=line_no
                )
            )
            continue
        seen.add(link)
        links.append(link)
    return links


def parse_source(
    adapter: DictionaryAdapter,
    bundle: SourceBundle,
    lenient: bool = False,
) -> ParseResult:
    """Parse a source bundle into records and links.

    Strict mode (the default) raises on the first defective row; lenient mode
    skips defective rows and returns them in ``rejects``.
    """
    collector = _Collector(lenient)
    rows = _parse_concepts(adapter, bundle.concepts_file, collector)
    records = [rec for _, rec in rows]
    links: list[ParentLink] = []
    if bundle.parents_file is not None:
        known = {rec.code for rec in records}
        links = _parse_parents(adapter, bundle.parents_file, known, collector)
    return ParseResult(records=records, links=links, rejects=collector.rejects)


def check_acyclic(links: list[ParentLink]) -> None:
    """Raise CycleDetected unless the link set forms a DAG."""
    out_edges: dict[str, list[str]] = defaultdict(list)
    indegree: dict[str, int] = defaultdict(int)
    nodes: set[str] = set()
    for link in links:
        if link.code == link.parent_code:
            raise CycleDetected(f"self-loop at code {link.code!r}")
        nodes.add(link.code)
        nodes.add(link.parent_code)
        out_edges[link.code].append(link.parent_code)
        indegree[link.parent_code] += 1

    queue = [n for n in nodes if indegree[n] == 0]
    processed = 0
    while queue:
        node = queue.pop()
        processed += 1
        for nxt in out_edges[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                queue.append(nxt)
    if processed != len(nodes):
        raise CycleDetected("parent links contain a directed cycle")


def build_concept_tables(
    store: StoreHandle,
    adapter: DictionaryAdapter,
    bundle: SourceBundle,
    overwrite: bool = False,
    lenient: bool = False,
) -> BuildReport:
    """Parse ``bundle`` and commit it to ``store`` in a single transaction.

    Raises AlreadyBuilt when the store already holds rows for this
    dictionary and overwrite is off. On any error the store is unchanged.
    """
    store._require_write()
    if store.schema_initialized(adapter) and not overwrite:
        count = store._conn.execute(
            f'SELECT COUNT(*) FROM "{adapter.concept_table}"'
        ).fetchone()[0]
        if count:
            raise AlreadyBuilt(
                f"{adapter.kind} is already built in {store.config.dbname}; "
                "pass overwrite to rebuild"
            )

    records, links, rejects = parse_source(adapter, bundle, lenient=lenient)
    check_acyclic(links)

    store.begin_exclusive()
    try:
        store._create_tables(adapter)
        for rec in records:
            store.insert_concept(adapter, rec)
        for link in links:
            store.insert_link(adapter, link)
        store.commit()
    except BaseException:
        store.rollback()
        raise
    return BuildReport(
        concepts=len(records),
        links=len(links),
        rejected=len(rejects),
        rejects=rejects,
    )


# --- serialization helpers (interchange format; also used for rows output) -----

def concepts_header(adapter: DictionaryAdapter) -> list[str]:
    return list(adapter_schema(adapter).names)


def record_to_row(adapter: DictionaryAdapter, rec: ConceptRecord) -> list[str]:
    """Serialize one record in interchange column order."""
    row = []
    for name, ftype in adapter_schema(adapter).columns:
        if ftype is FieldType.CODE:
            row.append(rec.code)
        elif ftype is FieldType.TERM:
            row.append(rec.term)
        elif ftype is FieldType.FLAG:
            row.append("1" if rec.synonym else "0")
        elif ftype is FieldType.STATUS:
            row.append(rec.status or "")
        elif ftype is FieldType.TERM_ID:
            row.append(rec.term_id or "")
        else:
            row.append(rec.extras.get(name, ""))
    return row
