"""
Ingesting an archive: filter streams and engagement cleaning
============================================================

Parse an NDJSON tweet archive, select records with the four stream kinds
(keyword, account, mention, geo window), and drop zero-engagement records.
"""

import tempfile
from pathlib import Path

from echolens.ingest import (CorpusStats, StreamSpec, engagement_filter,
                             parse_corpus, select_streams)
from echolens.synth import write_fixture

workdir = Path(tempfile.mkdtemp(prefix="echolens_demo_"))
write_fixture(workdir, seed=7, n_tweets=800)

# Parsing never aborts: malformed lines come back as line-numbered errors.
tweets, errors = parse_corpus(workdir / "tweets.ndjson", schema="tweets")
users, _ = parse_corpus(workdir / "users.ndjson", schema="users")
print(f"parsed {len(tweets)} tweets ({len(errors)} rejected lines), {len(users)} users")

streams = [
    StreamSpec(kind="keyword", keywords=["climate", "teamseas"]),
    StreamSpec(kind="account", accounts=["h01", "h02", "h03"]),
    StreamSpec(kind="mention", accounts=["h01"]),
    StreamSpec(kind="geo_window", bounding_box=(-35.0, -130.0, 60.0, 100.0),
               window=(1_625_097_600, 1_625_097_600 + 90_000 * 60)),
]

stats = CorpusStats(records_read=len(tweets) + len(errors),
                    records_rejected=len(errors))
selected = select_streams(tweets, streams, {u.user_id: u for u in users}, stats)
cleaned = engagement_filter(selected)
stats.records_kept = len(cleaned)

print("per-stream hits:", stats.records_kept_per_stream)
print(f"selected {len(selected)}, kept {len(cleaned)} after engagement cleaning")
print(f"accounting: read = kept + rejected + filtered -> "
      f"{stats.records_read} = {stats.records_kept} + {stats.records_rejected}"
      f" + {stats.records_filtered} ({stats.reconciles()})")
