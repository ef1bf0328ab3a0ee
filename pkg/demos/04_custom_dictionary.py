"""Register a custom dictionary kind and use the whole toolchain with it.

Any vocabulary with codes, terms, and (optionally) parent links can be
served by describing its tables in a DictionaryAdapter. Run from the
repository root:  python3 demos/04_custom_dictionary.py
"""
import tempfile
from pathlib import Path

import termforge as tf

adapter = tf.DictionaryAdapter(
    kind="TESTCONCEPT",
    concept_table="test_concept",
    code_field="concept_code",
    term_field="term",
    relation_strategy=tf.RelationStrategy.DAG,
    code_length=4,
    parent_table="test_concept_parents",
    ptable_code_field="concept_code",
    ptable_parent_field="parent_concept_code",
    pad_codes=False,
    min_code_length=1,
)
tf.register_adapter(adapter)
print("registered kinds:", tf.registered_kinds())

# Write a tiny source bundle in the interchange layout.
workdir = Path(tempfile.mkdtemp(prefix="termforge-demo-"))
source = workdir / "source"
source.mkdir()
(source / "concepts.tsv").write_text(
    "concept_code\tterm\n"
    "ROOT\tEverything\n"
    "A1\tAlpha\n"
    "A2\tBeta\n"
    "A2X\tBeta subtype\n",
    encoding="utf-8",
)
(source / "parents.tsv").write_text(
    "code\tparent_code\n"
    "A1\tROOT\n"
    "A2\tROOT\n"
    "A2X\tA2\n",
    encoding="utf-8",
)

config = tf.StoreConfig(type="sqlite", dbname=str(workdir / "custom.sqlite"))
with tf.open_store(config, tf.StoreMode.READ_WRITE) as store:
    report = tf.build_concept_tables(
        store, adapter, tf.SourceBundle.from_dir(adapter, source)
    )
    print(f"built custom store: {report.concepts} concepts, {report.links} links")

with tf.open_store(config) as store:
    print("terms containing 'beta':",
          tf.search_concepts(store, adapter, 'term like "%beta%"', output=tf.OutputMode.TERMS))
    print("descendants of ROOT:", tf.get_child_codes(store, adapter, "ROOT"))
    print("ancestors of A2X:  ", tf.get_parent_codes(store, adapter, "A2X"))
