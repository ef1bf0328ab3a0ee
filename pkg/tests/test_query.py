"""Predicate DSL parsing, evaluation, and search semantics."""
from __future__ import annotations

import random

import pytest

import termforge as tf
from helpers import (
    oracle_search,
    random_predicate,
    raw_rows,
    render_predicate,
)
from termforge.errors import PredicateSyntaxError, SchemaMissing, UnknownField
from termforge.query import And, Compare, CompareOp, In, Like, Not, Or

V3 = tf.resolve_adapter(tf.READ_V3)

H3_SYNONYM_TERMS = [
    "Chronic obstructive lung disease",
    "COLD - Chronic obstructive lung disease",
    "Chronic obstructive pulmonary disease",
    "COPD - Chronic obstructive pulmonary disease",
    "Chronic obstructive airway disease",
    "COAD - Chronic obstructive airways disease",
    "Chronic obstructive bronchitis",
    "Chronic airway disease",
    "Chronic airway obstruction",
    "Chronic airflow limitation",
    "Chronic airflow obstruction",
    "Chronic irreversible airway obstruction",
    "Obstructive chronic bronchitis",
    "COB - Chronic obstructive bronchitis",
    "CAFL - Chronic airflow limitation",
    "CAL - Chronic airflow limitation",
    "CAO - Chronic airflow obstruction",
]


# --- parsing ----------------------------------------------------------------

def test_parse_and_with_negated_comparison():
    p = tf.parse_predicate(
        'term == "Asthma" & (! term == "Eosinophilic asthma")', V3
    )
    assert isinstance(p, And)
    assert p.left == Compare("term", CompareOp.EQ, "Asthma", tf.FieldType.TERM)
    assert isinstance(p.right, Not)
    assert p.right.child.value == "Eosinophilic asthma"


def test_parse_or_of_two_comparisons():
    p = tf.parse_predicate('read_code == "H3..." | read_code == "H31.."', V3)
    assert isinstance(p, Or)
    assert p.left.value == "H3..."
    assert p.right.value == "H31.."


def test_parse_precedence_not_over_and_over_or():
    p = tf.parse_predicate('term == "a" | term == "b" & ! term == "c"', V3)
    assert isinstance(p, Or)
    assert isinstance(p.right, And)
    assert isinstance(p.right.right, Not)


def test_parse_like_and_in():
    p = tf.parse_predicate('read_code like "H3%" & status in ["C", "R"]', V3)
    assert isinstance(p.left, Like)
    assert p.left.pattern == "H3%"
    assert isinstance(p.right, In)
    assert p.right.values == ("C", "R")


def test_parse_string_escapes():
    p = tf.parse_predicate('term == "say \\"hi\\"\\t\\\\"', V3)
    assert p.value == 'say "hi"\t\\'


def test_parse_unknown_field():
    with pytest.raises(UnknownField) as exc:
        tf.parse_predicate('bogus == "x"', tf.resolve_adapter(tf.READ_V2))
    assert exc.value.name == "bogus"
    assert "read_code" in exc.value.available


@pytest.mark.parametrize(
    "text",
    [
        'term == "unterminated',
        'term == "bad \\q escape"',
        'term = "single equals"',
        "term ==",
        'term == "a" term == "b"',
        '! ! term == "a"',
        'status in []',
        'status in ["a",]',
        '(term == "a"',
        "",
    ],
)
def test_parse_syntax_errors(text):
    with pytest.raises(PredicateSyntaxError) as exc:
        tf.parse_predicate(text, V3)
    assert exc.value.pos >= 0


def test_syntax_error_position_points_at_offender():
    with pytest.raises(PredicateSyntaxError) as exc:
        tf.parse_predicate('term == "a" ? term == "b"', V3)
    assert exc.value.pos == 12


# --- evaluation -----------------------------------------------------------------

def _rec(code, term, synonym=False, status=None, term_id=None, **extras):
    return tf.ConceptRecord(
        code=code, term=term, synonym=synonym, status=status, term_id=term_id,
        extras=extras,
    )


def test_eval_like_prefix():
    p = tf.parse_predicate('read_code like "H3%"', V3)
    assert tf.eval_predicate(p, _rec("H3122", "x"))
    assert not tf.eval_predicate(p, _rec("H4641", "x"))


def test_eval_like_single_char_wildcard():
    p = tf.parse_predicate('read_code like "H3_2."', V3)
    assert tf.eval_predicate(p, _rec("H3*2.", "x"))
    assert not tf.eval_predicate(p, _rec("H3**.", "x"))


def test_eval_like_matches_whole_value():
    p = tf.parse_predicate('term like "asthma"', V3)
    assert not tf.eval_predicate(p, _rec("AAAAA", "severe asthma"))
    assert tf.eval_predicate(p, _rec("AAAAA", "Asthma"))


def test_eval_eq_case_folding():
    p = tf.parse_predicate('read_code == "h3..."', V3)
    assert not tf.eval_predicate(p, _rec("H3...", "x"), case_sensitive=True)
    assert tf.eval_predicate(p, _rec("H3...", "x"), case_sensitive=False)


def test_eval_in_membership():
    p = tf.parse_predicate('read_code in ["H3...", "H31.."]', V3)
    assert tf.eval_predicate(p, _rec("H31..", "x"))
    assert not tf.eval_predicate(p, _rec("H32..", "x"))


def test_eval_absent_field_is_empty_string():
    p = tf.parse_predicate('status == ""', V3)
    assert tf.eval_predicate(p, _rec("AAAAA", "x", status=None))
    assert not tf.eval_predicate(p, _rec("AAAAA", "x", status="C"))


def test_eval_flag_field_reads_as_zero_or_one():
    p = tf.parse_predicate('synonym == "1"', V3)
    assert tf.eval_predicate(p, _rec("AAAAA", "x", synonym=True))
    assert not tf.eval_predicate(p, _rec("AAAAA", "x", synonym=False))


def test_eval_requires_validated_predicate():
    unvalidated = Compare("term", CompareOp.EQ, "x")
    with pytest.raises(TypeError):
        tf.eval_predicate(unvalidated, _rec("AAAAA", "x"))
    resolved = tf.validate_predicate(unvalidated, V3)
    assert tf.eval_predicate(resolved, _rec("AAAAA", "x"))


# --- search over the built sample -------------------------------------------------

def test_search_codes_projection(copd):
    handle, adapter = copd
    codes = tf.search_concepts(
        handle,
        adapter,
        'term like "%chronic obstructive airways disease%"',
        output=tf.OutputMode.CODES,
    )
    assert codes == ["H3122", "H3y..", "H3z..", "Xa35l", "XaIND"]


def test_search_terms_excludes_synonyms_by_default(copd):
    handle, adapter = copd
    terms = tf.search_concepts(
        handle, adapter, 'read_code == "H3..."', output=tf.OutputMode.TERMS
    )
    assert terms == ["Chronic obstructive lung disease"]


def test_search_terms_with_synonyms(copd):
    handle, adapter = copd
    terms = tf.search_concepts(
        handle,
        adapter,
        'read_code == "H3..."',
        include_synonyms=True,
        output=tf.OutputMode.TERMS,
    )
    assert terms == H3_SYNONYM_TERMS


def test_search_rows_returns_records_in_code_order(copd):
    handle, adapter = copd
    rows = tf.search_concepts(handle, adapter, 'term like "%bronchitis%"')
    assert all(isinstance(r, tf.ConceptRecord) for r in rows)
    codes = [r.code for r in rows]
    assert codes == sorted(codes)
    assert all("bronchitis" in r.term.lower() for r in rows)


def test_search_accepts_prebuilt_ast(copd):
    handle, adapter = copd
    p = In("read_code", ("H3...", "ZZZZZ", "H32.."))
    rows = tf.search_concepts(handle, adapter, p)
    assert {r.code for r in rows} == {"H3...", "H32.."}


def test_search_unknown_field_in_ast(copd):
    handle, adapter = copd
    with pytest.raises(UnknownField):
        tf.search_concepts(handle, adapter, Compare("nope", CompareOp.EQ, "x"))


def test_search_unbuilt_store_raises_schema_missing(tmp_path):
    from helpers import open_rw

    handle = open_rw(tmp_path / "empty.sqlite")
    with pytest.raises(SchemaMissing):
        tf.search_concepts(handle, V3, 'term == "x"')
    handle.close()


def test_case_sensitivity_on_handle(copd):
    handle, adapter = copd
    handle.set_case_sensitivity(True)
    assert tf.search_concepts(handle, adapter, 'read_code == "h3..."') == []
    handle.set_case_sensitivity(False)
    assert len(tf.search_concepts(handle, adapter, 'read_code == "h3..."')) == 1


# --- properties -------------------------------------------------------------------

def _value_pool(handle, adapter):
    pool: dict[str, list[str]] = {}
    for row in raw_rows(handle, adapter):
        for field, value in row.items():
            if value is None:
                value = ""
            pool.setdefault(field, []).append(str(value))
    return pool


def test_random_predicates_match_reference_evaluator(copd):
    handle, adapter = copd
    rng = random.Random(20260809)
    fields = list(tf.adapter_schema(adapter).names)
    pool = _value_pool(handle, adapter)
    for _ in range(60):
        p = random_predicate(rng, fields, pool)
        text = render_predicate(p)
        parsed = tf.parse_predicate(text, adapter)
        for include_synonyms in (False, True):
            for case_sensitive in (False, True):
                handle.set_case_sensitivity(case_sensitive)
                got = tf.search_concepts(
                    handle, adapter, parsed, include_synonyms=include_synonyms
                )
                want = oracle_search(handle, adapter, p, include_synonyms, case_sensitive)
                got_keys = [(r.code, r.term_id, r.term) for r in got]
                want_keys = [(r["read_code"], r["term_id"], r["term"]) for r in want]
                assert got_keys == want_keys, text
    handle.set_case_sensitivity(False)


def test_render_parse_roundtrip():
    rng = random.Random(7)
    fields = list(tf.adapter_schema(V3).names)
    pool = {f: ["H3...", "Some term", "C", "1"] for f in fields}
    for _ in range(120):
        p = random_predicate(rng, fields, pool)
        assert tf.parse_predicate(render_predicate(p), V3) == tf.validate_predicate(p, V3)


def test_codes_output_is_dedup_of_rows_projection(copd):
    handle, adapter = copd
    rng = random.Random(99)
    fields = list(tf.adapter_schema(adapter).names)
    pool = _value_pool(handle, adapter)
    for _ in range(25):
        p = random_predicate(rng, fields, pool)
        rows = tf.search_concepts(handle, adapter, p, include_synonyms=True)
        codes = tf.search_concepts(
            handle, adapter, p, include_synonyms=True, output=tf.OutputMode.CODES
        )
        seen, expected = set(), []
        for r in rows:
            if r.code not in seen:
                seen.add(r.code)
                expected.append(r.code)
        assert codes == expected
        assert len(set(codes)) == len(codes)


def test_synonym_inclusion_is_monotone(copd):
    handle, adapter = copd
    rng = random.Random(4242)
    fields = list(tf.adapter_schema(adapter).names)
    pool = _value_pool(handle, adapter)
    for _ in range(25):
        p = random_predicate(rng, fields, pool)
        without = tf.search_concepts(handle, adapter, p)
        with_syn = tf.search_concepts(handle, adapter, p, include_synonyms=True)
        keys = lambda rows: {(r.code, r.term_id) for r in rows}
        assert keys(without) <= keys(with_syn)


def test_de_morgan(copd):
    handle, adapter = copd
    rng = random.Random(31337)
    fields = list(tf.adapter_schema(adapter).names)
    pool = _value_pool(handle, adapter)
    for _ in range(25):
        a = random_predicate(rng, fields, pool, depth=2)
        b = random_predicate(rng, fields, pool, depth=2)
        lhs = tf.search_concepts(handle, adapter, Not(And(a, b)), include_synonyms=True)
        rhs = tf.search_concepts(
            handle, adapter, Or(Not(a), Not(b)), include_synonyms=True
        )
        assert [(r.code, r.term_id) for r in lhs] == [(r.code, r.term_id) for r in rhs]


def test_case_sensitive_results_subset_of_insensitive_without_not(copd):
    handle, adapter = copd
    rng = random.Random(550)
    fields = list(tf.adapter_schema(adapter).names)
    pool = _value_pool(handle, adapter)
    for _ in range(25):
        p = random_predicate(rng, fields, pool, negation=False)
        handle.set_case_sensitivity(True)
        strict = tf.search_concepts(handle, adapter, p, include_synonyms=True)
        handle.set_case_sensitivity(False)
        loose = tf.search_concepts(handle, adapter, p, include_synonyms=True)
        keys = lambda rows: {(r.code, r.term_id) for r in rows}
        assert keys(strict) <= keys(loose)
