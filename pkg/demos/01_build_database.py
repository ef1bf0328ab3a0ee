"""Build a dictionary store from the shipped Read v3 sample and look inside.

Run from the repository root:  python3 demos/01_build_database.py
"""
import tempfile
from pathlib import Path

import termforge as tf

FIXTURE = Path(__file__).resolve().parent.parent / "fixtures" / "readv3-copd-sample"

workdir = Path(tempfile.mkdtemp(prefix="termforge-demo-"))
config = tf.StoreConfig(type="sqlite", dbname=str(workdir / "readv3.sqlite"))

# A store opened read-write is created on demand; the build is atomic.
adapter = tf.resolve_adapter(tf.READ_V3)
with tf.open_store(config, tf.StoreMode.READ_WRITE) as store:
    bundle = tf.SourceBundle.from_dir(adapter, FIXTURE)
    report = tf.build_concept_tables(store, adapter, bundle)
    print(f"built {config.dbname}")
    print(f"  concepts: {report.concepts}")
    print(f"  links:    {report.links}")
    print(f"  rejected: {report.rejected}")

# Re-open read-only and peek at the first few records.
with tf.open_store(config) as store:
    print("\nfirst five records (code, term):")
    for rec in list(store.scan_concepts(adapter))[:5]:
        marker = " (synonym)" if rec.synonym else ""
        print(f"  {rec.code}  {rec.term}{marker}")

    print("\nfirst five parent links:")
    for link in list(store.scan_links(adapter))[:5]:
        print(f"  {link.code} -> {link.parent_code}")
