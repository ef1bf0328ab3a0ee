"""Term and code searches with the predicate expression language.

Run from the repository root:  python3 demos/02_search_concepts.py
"""
import tempfile
from pathlib import Path

import termforge as tf

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "readv3-copd-sample"

workdir = Path(tempfile.mkdtemp(prefix="termforge-demo-"))
config = tf.StoreConfig(type="sqlite", dbname=str(workdir / "readv3.sqlite"))
adapter = tf.resolve_adapter(tf.READ_V3)
with tf.open_store(config, tf.StoreMode.READ_WRITE) as store:
    tf.build_concept_tables(store, adapter, tf.SourceBundle.from_dir(adapter, FIXTURE))

store = tf.open_store(config)

# Wildcard search over terms; the codes output drops duplicate codes.
codes = tf.search_concepts(
    store, adapter,
    'term like "%chronic obstructive airways disease%"',
    output=tf.OutputMode.CODES,
)
print("codes whose preferred term mentions the phrase:", codes)

# By default synonyms are excluded...
terms = tf.search_concepts(
    store, adapter, 'read_code == "H3..."', output=tf.OutputMode.TERMS
)
print("\npreferred term for H3...:", terms)

# ...but include_synonyms surfaces every description of the concept.
expanded = tf.search_concepts(
    store, adapter, 'read_code == "H3..."',
    include_synonyms=True, output=tf.OutputMode.TERMS,
)
print(f"all {len(expanded)} terms for H3...:")
for term in expanded:
    print(f"  {term}")

# Expressions combine with & | ! and parentheses; 'in' matches a list.
rows = tf.search_concepts(
    store, adapter,
    'term like "%bronchitis%" & (! read_code == "H312z")',
)
print("\nbronchitis concepts except H312z:")
for rec in rows:
    print(f"  {rec.code}  {rec.term}")

# Comparisons fold case by default, mirroring common database collation.
print("\nmatches for lower-cased code with default collation:",
      tf.search_concepts(store, adapter, 'read_code == "h3..."', output=tf.OutputMode.CODES))
store.set_case_sensitivity(True)
print("matches once case sensitivity is enabled:",
      tf.search_concepts(store, adapter, 'read_code == "h3..."', output=tf.OutputMode.CODES))
store.close()
