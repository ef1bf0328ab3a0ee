"""Command-line interface: build stores and query them.

Commands: ``build``, ``search``, ``children``, ``parents``. Store settings
come from a JSON config file (``--config`` / ``--config-home`` / the
TERMFORGE_CONFIG environment variable) or inline ``--db-type``/``--db-name``
flags. Every error class maps to a stable exit code; see EXIT_CODES and the
CLI reference in the README.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from . import ingest, query, relations
from .errors import (
    AlreadyBuilt,
    AlreadyExists,
    BadJson,
    CorruptStore,
    CycleDetected,
    DuplicateKind,
    InvalidAdapter,
    MissingColumn,
    MissingKey,
    NotFound,
    PermissionDenied,
    PredicateSyntaxError,
    SchemaMissing,
    SourceRowError,
    StoreBusy,
    TermforgeError,
    UnknownBackend,
    UnknownCode,
    UnknownField,
    UnknownKind,
)
from .model import DictionaryAdapter, resolve_adapter
from .store import StoreConfig, StoreHandle, StoreMode, open_store

CONFIG_ENV_VAR = "TERMFORGE_CONFIG"

# Exit-code table; frozen so scripts can rely on it.
EXIT_CODES: dict[type, int] = {
    NotFound: 2,
    AlreadyBuilt: 3,
    UnknownCode: 4,
    PredicateSyntaxError: 5,
    UnknownField: 5,
    SourceRowError: 6,   # MalformedRow, CodeWidthError, DanglingParent
    MissingColumn: 6,
    CycleDetected: 7,
    SchemaMissing: 8,
    StoreBusy: 9,
    PermissionDenied: 10,
    CorruptStore: 11,
    AlreadyExists: 12,
    UnknownKind: 13,
    DuplicateKind: 13,
    InvalidAdapter: 13,
    BadJson: 14,
    MissingKey: 14,
    UnknownBackend: 14,
}


class ConfigSource(Enum):
    INLINE_ARGS = "inline"
    FILE_PATH = "file"
    HOME_RELATIVE = "home"


@dataclass(frozen=True)
class CliConfig:
    dict_type: str
    store: StoreConfig


def _store_config_from_mapping(data: dict) -> StoreConfig:
    if not isinstance(data, dict):
        raise BadJson("config must be a JSON object")
    if not data.get("type"):
        raise MissingKey("type")
    if not data.get("dbname"):
        raise MissingKey("dbname")
    return StoreConfig(
        type=str(data["type"]),
        dbname=str(data["dbname"]),
        user=data.get("user"),
        password=data.get("pass"),
        host=data.get("host"),
        port=str(data["port"]) if "port" in data and data["port"] is not None else None,
    )


def _read_config_file(path: Path) -> dict:
    if not path.is_file():
        raise NotFound(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise BadJson(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return data


def load_config(source: ConfigSource, payload, dict_type: str) -> CliConfig:
    """Build a CliConfig from one of the three config sources.

    ``payload`` is a file path for FILE_PATH, a file name under the user's
    home directory for HOME_RELATIVE, or a mapping for INLINE_ARGS.
    The dictionary type is validated against the registry immediately.
    """
    resolve_adapter(dict_type)
    if source is ConfigSource.FILE_PATH:
        data = _read_config_file(Path(payload))
    elif source is ConfigSource.HOME_RELATIVE:
        data = _read_config_file(Path.home() / str(payload))
    elif source is ConfigSource.INLINE_ARGS:
        data = dict(payload)
    else:
        raise TypeError(f"not a config source: {source!r}")
    return CliConfig(dict_type=dict_type, store=_store_config_from_mapping(data))


def _config_from_args(args: argparse.Namespace) -> CliConfig:
    if args.config:
        return load_config(ConfigSource.FILE_PATH, args.config, args.dict_type)
    if args.config_home:
        return load_config(ConfigSource.HOME_RELATIVE, args.config_home, args.dict_type)
    if args.db_name or args.db_type:
        inline = {}
        if args.db_type:
            inline["type"] = args.db_type
        if args.db_name:
            inline["dbname"] = args.db_name
        return load_config(ConfigSource.INLINE_ARGS, inline, args.dict_type)
    env_path = os.environ.get(CONFIG_ENV_VAR)
    if env_path:
        return load_config(ConfigSource.FILE_PATH, env_path, args.dict_type)
    raise MissingKey(
        "dbname",
        detail="pass --config/--config-home/--db-name or set " + CONFIG_ENV_VAR,
    )


def _open(args: argparse.Namespace, mode: StoreMode) -> tuple[StoreHandle, DictionaryAdapter]:
    config = _config_from_args(args)
    adapter = resolve_adapter(config.dict_type)
    handle = open_store(config.store, mode)
    return handle, adapter


# --- command handlers ---------------------------------------------------------

def cmd_build(args: argparse.Namespace) -> int:
    handle, adapter = _open(args, StoreMode.READ_WRITE)
    with handle:
        bundle = ingest.SourceBundle.from_dir(adapter, args.source)
        report = ingest.build_concept_tables(
            handle, adapter, bundle, overwrite=args.overwrite, lenient=args.lenient
        )
    print(f"concepts\t{report.concepts}")
    print(f"links\t{report.links}")
    print(f"rejected\t{report.rejected}")
    for reject in report.rejects:
        print(f"# rejected {reject.file}:{reject.line}: {reject.reason}", file=sys.stderr)
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    handle, adapter = _open(args, StoreMode.READ_ONLY)
    with handle:
        if args.case_sensitive:
            handle.set_case_sensitivity(True)
        try:
            predicate = query.parse_predicate(args.where, adapter)
        except (PredicateSyntaxError, UnknownField) as exc:
            _echo_with_caret(args.where, exc)
            return exit_code_for(exc)
        output = query.OutputMode(args.output)
        result = query.search_concepts(
            handle,
            adapter,
            predicate,
            include_synonyms=args.include_synonyms,
            output=output,
        )
        if output is query.OutputMode.ROWS:
            print("\t".join(ingest.concepts_header(adapter)))
            for rec in result:
                print("\t".join(ingest.record_to_row(adapter, rec)))
        else:
            for value in result:
                print(value)
    return 0


def cmd_children(args: argparse.Namespace) -> int:
    handle, adapter = _open(args, StoreMode.READ_ONLY)
    with handle:
        for code in relations.get_child_codes(handle, adapter, args.code, args.immediate):
            print(code)
    return 0


def cmd_parents(args: argparse.Namespace) -> int:
    handle, adapter = _open(args, StoreMode.READ_ONLY)
    with handle:
        for code in relations.get_parent_codes(handle, adapter, args.code, args.immediate):
            print(code)
    return 0


# --- wiring ----------------------------------------------------------------------

def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--dict-type", required=True, help="dictionary type name (e.g. NHSReadV3)"
    )
    parser.add_argument("--config", help="path to a JSON store config file")
    parser.add_argument(
        "--config-home", help="name of a JSON store config file in the home directory"
    )
    parser.add_argument("--db-type", help="inline store backend name (sqlite)")
    parser.add_argument("--db-name", help="inline store file path")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="termforge",
        description="Build and query single-file clinical concept dictionaries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="build a dictionary store from a source directory")
    _add_common_options(p_build)
    p_build.add_argument("--source", required=True, help="source directory with concepts.tsv")
    p_build.add_argument("--overwrite", action="store_true", help="replace existing data")
    p_build.add_argument(
        "--lenient", action="store_true", help="skip and report defective rows"
    )
    p_build.set_defaults(func=cmd_build)

    p_search = sub.add_parser("search", help="search concepts with a predicate expression")
    _add_common_options(p_search)
    p_search.add_argument("--where", required=True, help="predicate expression")
    p_search.add_argument(
        "--output",
        choices=[m.value for m in query.OutputMode],
        default=query.OutputMode.ROWS.value,
    )
    p_search.add_argument("--include-synonyms", action="store_true")
    p_search.add_argument("--case-sensitive", action="store_true")
    p_search.set_defaults(func=cmd_search)

    p_children = sub.add_parser("children", help="list descendant codes")
    _add_common_options(p_children)
    p_children.add_argument("--code", required=True)
    p_children.add_argument("--immediate", action="store_true")
    p_children.set_defaults(func=cmd_children)

    p_parents = sub.add_parser("parents", help="list ancestor codes")
    _add_common_options(p_parents)
    p_parents.add_argument("--code", required=True)
    p_parents.add_argument("--immediate", action="store_true")
    p_parents.set_defaults(func=cmd_parents)

    return parser


def exit_code_for(exc: TermforgeError) -> int:
    for klass in type(exc).__mro__:
        if klass in EXIT_CODES:
            return EXIT_CODES[klass]
    return 1


def _echo_with_caret(text: str, exc: TermforgeError) -> None:
    pos = getattr(exc, "pos", None)
    print(text, file=sys.stderr)
    if pos is not None:
        print(" " * pos + "^", file=sys.stderr)
    print(f"{type(exc).__name__}: {exc}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TermforgeError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
