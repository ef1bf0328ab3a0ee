"""Ancestor/descendant queries.

Prefix-hierarchy dictionaries derive relationships from the code text
itself; DAG dictionaries walk the parent-link table level by level with a
visited set, so shared subtrees are expanded once. Results never include
the query code, contain no duplicates, and are sorted ascending.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import CycleDetected, UnknownCode
from .model import DictionaryAdapter, ParentLink, RelationStrategy
from .store import Direction, StoreHandle

NeighborFn = Callable[[str], Iterable[str]]


@dataclass(frozen=True)
class ClosureRequest:
    code: str
    direction: Direction
    immediate_only: bool = False


def dag_closure(neighbors: NeighborFn, start: str, immediate_only: bool = False) -> set[str]:
    """Codes reachable from ``start`` through ``neighbors``.

    ``neighbors`` maps a code to its one-step neighbors in the direction of
    travel (children or parents). Visited codes are never re-expanded; a
    traversal that reaches ``start`` again proves a cycle and raises
    CycleDetected (stores built through this package cannot contain one).
    """
    if immediate_only:
        return set(neighbors(start))

    visited: set[str] = set()
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for nxt in neighbors(node):
            if nxt == start:
                raise CycleDetected(f"cycle through code {start!r}")
            if nxt not in visited:
                visited.add(nxt)
                frontier.append(nxt)
    return visited


def edge_lookup(links: Iterable[ParentLink], direction: Direction) -> NeighborFn:
    """Index an edge list for dag_closure traversal in ``direction``."""
    index: dict[str, list[str]] = {}
    for link in links:
        if direction is Direction.DESCENDANTS:
            index.setdefault(link.parent_code, []).append(link.code)
        else:
            index.setdefault(link.code, []).append(link.parent_code)
    return lambda code: index.get(code, ())


def prefix_children(
    all_codes: Iterable[str],
    code: str,
    immediate_only: bool = False,
    pad_char: str = ".",
) -> set[str]:
    """Codes whose significant prefix strictly extends that of ``code``."""
    sig = code.rstrip(pad_char)
    out: set[str] = set()
    for candidate in all_codes:
        cand_sig = candidate.rstrip(pad_char)
        if len(cand_sig) <= len(sig) or not cand_sig.startswith(sig):
            continue
        if immediate_only and len(cand_sig) != len(sig) + 1:
            continue
        out.add(candidate)
    return out


def prefix_parent(
    code: str,
    immediate_only: bool = False,
    pad_char: str = ".",
    pad_to: int | None = None,
    min_significant: int = 1,
    root_code: str | None = None,
) -> set[str]:
    """Parents derived from the code text: shorter significant prefixes.

    With ``pad_to`` set, prefixes are re-padded to that width. Prefixes
    shorter than ``min_significant`` are skipped; the empty prefix maps to
    ``root_code`` when one is defined and is otherwise excluded.
    """
    sig = code.rstrip(pad_char) if pad_to is not None else code

    def emit(prefix: str) -> str:
        if pad_to is None:
            return prefix
        return prefix + pad_char * (pad_to - len(prefix))

    lengths: Iterable[int]
    if immediate_only:
        lengths = (len(sig) - 1,)
    else:
        lengths = range(len(sig) - 1, -1, -1)

    out: set[str] = set()
    for length in lengths:
        if length < 0:
            continue
        if length == 0:
            if root_code is not None:
                out.add(root_code)
            continue
        if length < min_significant:
            continue
        out.add(emit(sig[:length]))
    return out


def closure_codes(
    handle: StoreHandle, adapter: DictionaryAdapter, request: ClosureRequest
) -> list[str]:
    """Run one relationship query; sorted codes, query code excluded."""
    if not handle.code_exists(adapter, request.code):
        raise UnknownCode(f"code {request.code!r} not found in {adapter.kind}")

    if adapter.relation_strategy is RelationStrategy.DAG:
        neighbors: NeighborFn = lambda code: handle.link_neighbors(
            adapter, code, request.direction
        )
        result = dag_closure(neighbors, request.code, request.immediate_only)
    elif request.direction is Direction.DESCENDANTS:
        result = prefix_children(
            handle.all_codes(adapter),
            request.code,
            request.immediate_only,
            adapter.pad_char,
        )
    else:
        result = prefix_parent(
            request.code,
            request.immediate_only,
            adapter.pad_char,
            pad_to=adapter.code_length if adapter.pad_codes else None,
            min_significant=max(adapter.min_code_length, 1),
            root_code=adapter.root_code,
        )
    result.discard(request.code)
    return sorted(result)


def get_child_codes(
    handle: StoreHandle,
    adapter: DictionaryAdapter,
    code: str,
    immediate_only: bool = False,
) -> list[str]:
    """All descendants of ``code`` (or only immediate children)."""
    return closure_codes(
        handle, adapter, ClosureRequest(code, Direction.DESCENDANTS, immediate_only)
    )


def get_parent_codes(
    handle: StoreHandle,
    adapter: DictionaryAdapter,
    code: str,
    immediate_only: bool = False,
) -> list[str]:
    """All ancestors of ``code`` (or only immediate parents)."""
    return closure_codes(
        handle, adapter, ClosureRequest(code, Direction.ANCESTORS, immediate_only)
    )
