import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from echolens.graph import InteractionGraph
from echolens.ingest import TweetRecord, UserRecord


def make_tweet(tweet_id, author_id="u1", text="hello world", created_at=1_625_097_600,
               likes=1, retweets=0, replies=0, **kwargs):
    return TweetRecord(tweet_id=tweet_id, author_id=author_id, text=text,
                       created_at=created_at, likes=likes, retweets=retweets,
                       replies=replies, **kwargs)


def make_user(user_id, handle=None, display_name="Amina Diallo", **kwargs):
    return UserRecord(user_id=user_id, handle=handle or f"h_{user_id}",
                      display_name=display_name, **kwargs)


def clique_graph(*cliques, bridges=()):
    """Directed graph with every ordered pair inside each clique at weight 1,
    plus explicit bridge edges (src, dst)."""
    g = InteractionGraph()
    for members in cliques:
        for src in members:
            for dst in members:
                if src != dst:
                    g.add_interaction(src, dst, "retweet")
    for src, dst in bridges:
        g.add_interaction(src, dst, "retweet")
    return g


@pytest.fixture
def tmp_corpus(tmp_path):
    """Write NDJSON lines into tmp files on demand."""
    def _write(name: str, lines: list[str]) -> Path:
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path
    return _write
