"""Descendant and ancestor queries over both dictionary shapes.

Read v3 links concepts through an explicit parent table (a DAG: a concept
may have several parents); Read v2 derives the hierarchy from the code text
itself. Run from the repository root:  python3 demos/03_relationship_queries.py
"""
import tempfile
from pathlib import Path

import termforge as tf

ROOT = Path(__file__).resolve().parent.parent
workdir = Path(tempfile.mkdtemp(prefix="termforge-demo-"))

# --- DAG dictionary -----------------------------------------------------------
v3 = tf.resolve_adapter(tf.READ_V3)
v3_config = tf.StoreConfig(type="sqlite", dbname=str(workdir / "readv3.sqlite"))
with tf.open_store(v3_config, tf.StoreMode.READ_WRITE) as store:
    tf.build_concept_tables(
        store, v3, tf.SourceBundle.from_dir(v3, ROOT / "fixtures" / "readv3-copd-sample")
    )

store = tf.open_store(v3_config)
print("all descendants of H3...:")
print(" ", tf.get_child_codes(store, v3, "H3..."))
print("immediate children only:")
print(" ", tf.get_child_codes(store, v3, "H3...", immediate_only=True))

print("\nancestors of H32..:", tf.get_parent_codes(store, v3, "H32.."))
print("immediate parents: ", tf.get_parent_codes(store, v3, "H32..", immediate_only=True))

# Relationship output feeds straight back into a search.
ancestors = tf.get_parent_codes(store, v3, "H32..")
rows = tf.search_concepts(store, v3, tf.query.In("read_code", tuple(ancestors)))
print("ancestor terms:")
for rec in rows:
    print(f"  {rec.code}  {rec.term}")

# X101i has two parents inside the H3... subtree but is listed exactly once.
kids = tf.get_child_codes(store, v3, "H3...")
print("\nmulti-parent node X101i appears", kids.count("X101i"), "time in the closure")
store.close()

# --- prefix hierarchy -------------------------------------------------------------
v2 = tf.resolve_adapter(tf.READ_V2)
v2_config = tf.StoreConfig(type="sqlite", dbname=str(workdir / "readv2.sqlite"))
with tf.open_store(v2_config, tf.StoreMode.READ_WRITE) as store:
    tf.build_concept_tables(
        store, v2, tf.SourceBundle.from_dir(v2, ROOT / "fixtures" / "readv2-resp-sample")
    )

store = tf.open_store(v2_config)
print("\nprefix dictionary: children of H3... are the codes extending 'H3'")
print(" ", tf.get_child_codes(store, v2, "H3..."))
print("parents of H310. are its shorter prefixes")
print(" ", tf.get_parent_codes(store, v2, "H310."))
store.close()
