"""Shared test helpers: ad-hoc source dirs, stores, and independent oracles.

The oracle evaluator here deliberately re-implements predicate semantics
over raw sqlite rows (wildcards via backtracking rather than regex) so that
search results can be checked against a path that shares no code with the
library's evaluator.
"""
from __future__ import annotations

import random
from pathlib import Path

import termforge as tf
from termforge import query


def write_tsv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(row) + "\n")


def readv3_row(code, term, term_id, synonym=False, status="C") -> list[str]:
    return [code, term, "", "", "", term_id, "1" if synonym else "0", status]


def make_source(root: Path, adapter, concept_rows, links=None) -> Path:
    """Write a source directory for ``adapter`` (links only for DAG kinds)."""
    root.mkdir(parents=True, exist_ok=True)
    write_tsv(root / "concepts.tsv", list(tf.adapter_schema(adapter).names), concept_rows)
    if adapter.parent_table:
        write_tsv(root / "parents.tsv", ["code", "parent_code"], [list(l) for l in (links or [])])
    return root


def open_rw(db_path) -> tf.StoreHandle:
    return tf.open_store(tf.StoreConfig(type="sqlite", dbname=str(db_path)), tf.StoreMode.READ_WRITE)


def open_ro(db_path) -> tf.StoreHandle:
    return tf.open_store(tf.StoreConfig(type="sqlite", dbname=str(db_path)))


def build_from(tmp_path: Path, kind: str, source_dir, db_name="store.sqlite", **kwargs):
    """Build a store from a source dir; returns (handle, adapter, report)."""
    adapter = tf.resolve_adapter(kind)
    handle = open_rw(tmp_path / db_name)
    bundle = tf.SourceBundle.from_dir(adapter, source_dir)
    report = tf.build_concept_tables(handle, adapter, bundle, **kwargs)
    return handle, adapter, report


def build_readv3_graph(tmp_path: Path, codes, edges, db_name="graph.sqlite"):
    """Build a ReadV3-shaped store from explicit (code, parent) edges."""
    adapter = tf.resolve_adapter(tf.READ_V3)
    rows = [readv3_row(c, f"Concept {c}", f"T{i:04d}") for i, c in enumerate(codes)]
    src = make_source(tmp_path / "src", adapter, rows, edges)
    handle = open_rw(tmp_path / db_name)
    report = tf.build_concept_tables(handle, adapter, tf.SourceBundle.from_dir(adapter, src))
    return handle, adapter, report


# --- random DAGs -------------------------------------------------------------

def random_dag(rng: random.Random, max_nodes=200, max_edges=600):
    """A random DAG as (codes, edges); edges point child -> parent."""
    n = rng.randrange(2, max_nodes + 1)
    codes = [f"N{i:04d}" for i in range(n)]
    order = codes[:]
    rng.shuffle(order)
    max_possible = n * (n - 1) // 2
    m = rng.randrange(1, min(max_edges, max_possible) + 1)
    edges = set()
    while len(edges) < m:
        i, j = rng.sample(range(n), 2)
        if i > j:
            i, j = j, i
        edges.add((order[i], order[j]))  # earlier node links to later: acyclic
    return codes, sorted(edges)


def reachability_fixpoint(edges) -> set[tuple[str, str]]:
    """All (source, reachable) pairs via iterated edge-relation join."""
    adj: dict[str, list[str]] = {}
    for u, v in edges:
        adj.setdefault(u, []).append(v)
    closure = set(edges)
    frontier = set(edges)
    while frontier:
        new = {(a, c) for (a, b) in frontier for c in adj.get(b, ())}
        new -= closure
        closure |= new
        frontier = new
    return closure


# --- predicate rendering and generation ------------------------------------------

def quote(s: str) -> str:
    escaped = (
        s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    )
    return f'"{escaped}"'


def render_predicate(p) -> str:
    if isinstance(p, query.Compare):
        return f"{p.field} {p.op.value} {quote(p.value)}"
    if isinstance(p, query.Like):
        return f"{p.field} like {quote(p.pattern)}"
    if isinstance(p, query.In):
        return f"{p.field} in [{', '.join(quote(v) for v in p.values)}]"
    if isinstance(p, query.And):
        return f"({render_predicate(p.left)} & {render_predicate(p.right)})"
    if isinstance(p, query.Or):
        return f"({render_predicate(p.left)} | {render_predicate(p.right)})"
    if isinstance(p, query.Not):
        return f"! ({render_predicate(p.child)})"
    raise TypeError(p)


def random_predicate(rng: random.Random, fields, value_pool, depth=0, negation=True):
    """Random AST over ``fields``; values mostly sampled from the live data.

    With ``negation`` off, neither Not nodes nor '!=' leaves are produced
    (the monotone fragment).
    """
    roll = rng.random()
    if depth >= 3 or roll < 0.55:
        field = rng.choice(fields)
        pool = value_pool.get(field) or [""]

        def pick() -> str:
            if rng.random() < 0.7:
                v = rng.choice(pool)
                r = rng.random()
                if r < 0.15:
                    v = v.upper()
                elif r < 0.3:
                    v = v.lower()
                return v
            length = rng.randrange(0, 8)
            return "".join(rng.choice("abcXYZ035. -") for _ in range(length))

        kinds = ("eq", "ne", "like", "in") if negation else ("eq", "like", "in")
        kind = rng.choice(kinds)
        if kind == "eq":
            return query.Compare(field, query.CompareOp.EQ, pick())
        if kind == "ne":
            return query.Compare(field, query.CompareOp.NE, pick())
        if kind == "like":
            v = pick()
            if v:
                i = rng.randrange(len(v))
                j = rng.randrange(i, len(v)) + 1
                core = v[i:j]
            else:
                core = ""
            pat = core
            if rng.random() < 0.9:
                pat = "%" + pat
            if rng.random() < 0.9:
                pat = pat + "%"
            if core and rng.random() < 0.2:
                pat = pat.replace(core[0], "_", 1)
            return query.Like(field, pat)
        count = rng.randrange(1, 4)
        return query.In(field, tuple(pick() for _ in range(count)))
    if roll < 0.75:
        return query.And(
            random_predicate(rng, fields, value_pool, depth + 1, negation),
            random_predicate(rng, fields, value_pool, depth + 1, negation),
        )
    if roll < 0.9 or not negation:
        return query.Or(
            random_predicate(rng, fields, value_pool, depth + 1, negation),
            random_predicate(rng, fields, value_pool, depth + 1, negation),
        )
    return query.Not(random_predicate(rng, fields, value_pool, depth + 1, negation))


# --- independent reference evaluator over raw sqlite rows --------------------------

def raw_rows(handle: tf.StoreHandle, adapter) -> list[dict]:
    """Concept rows straight from sqlite as dicts, bypassing the record layer."""
    names = tf.adapter_schema(adapter).names
    cols = ", ".join(f'"{n}"' for n in names)
    cursor = handle._conn.execute(f'SELECT {cols} FROM "{adapter.concept_table}"')
    return [dict(zip(names, row)) for row in cursor]


def like_match(pattern: str, value: str) -> bool:
    """Wildcard match by backtracking (no regex)."""
    def walk(i: int, j: int) -> bool:
        if i == len(pattern):
            return j == len(value)
        ch = pattern[i]
        if ch == "%":
            return walk(i + 1, j) or (j < len(value) and walk(i, j + 1))
        if ch == "_":
            return j < len(value) and walk(i + 1, j + 1)
        return j < len(value) and value[j] == ch and walk(i + 1, j + 1)

    return walk(0, 0)


def oracle_eval(p, row: dict, case_sensitive: bool) -> bool:
    def text(field: str) -> str:
        v = row.get(field)
        if v is None:
            return ""
        if isinstance(v, int):
            return str(v)
        return v

    def fold(s: str) -> str:
        return s if case_sensitive else s.lower()

    if isinstance(p, query.Compare):
        same = fold(text(p.field)) == fold(p.value)
        return same if p.op is query.CompareOp.EQ else not same
    if isinstance(p, query.Like):
        return like_match(fold(p.pattern), fold(text(p.field)))
    if isinstance(p, query.In):
        return any(fold(text(p.field)) == fold(v) for v in p.values)
    if isinstance(p, query.And):
        return oracle_eval(p.left, row, case_sensitive) and oracle_eval(p.right, row, case_sensitive)
    if isinstance(p, query.Or):
        return oracle_eval(p.left, row, case_sensitive) or oracle_eval(p.right, row, case_sensitive)
    if isinstance(p, query.Not):
        return not oracle_eval(p.child, row, case_sensitive)
    raise TypeError(p)


def oracle_search(handle, adapter, p, include_synonyms: bool, case_sensitive: bool):
    """Linear-scan reference: matching rows sorted by (code, term_id, term)."""
    schema = tf.adapter_schema(adapter)
    flag_col = next(
        (name for name, ftype in schema.columns if ftype is tf.FieldType.FLAG), None
    )
    id_col = next(
        (name for name, ftype in schema.columns if ftype is tf.FieldType.TERM_ID), None
    )
    rows = []
    for row in raw_rows(handle, adapter):
        if not include_synonyms and flag_col and row.get(flag_col):
            continue
        if oracle_eval(p, row, case_sensitive):
            rows.append(row)
    rows.sort(
        key=lambda r: (
            r[adapter.code_field],
            (r.get(id_col) or "") if id_col else "",
            r[adapter.term_field],
        )
    )
    return rows
