"""PageRank influence scoring over the interaction graph.

Raw scores are the stationary distribution of a damped random walk whose
transition probabilities are proportional to edge weights; the walk teleports
uniformly with probability 1 - damping, and a dangling node redistributes its
whole mass uniformly (retweet graphs are full of sinks, so this matters).
Raw scores are then mapped linearly onto the 0..10 presentation scale.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import sparse

from .graph import InteractionGraph, weighted_in_degrees
from .ingest import TweetRecord, UserRecord

__all__ = [
    "PageRankResult",
    "RankTable",
    "pagerank",
    "scale_scores",
    "rank_tables",
    "write_rank_table_csv",
    "write_rank_table_json",
]


@dataclass
class PageRankResult:
    """Raw scores plus convergence diagnostics.

    converged is the warning flag: False means max_iter was hit before the
    L1 change dropped below tol, and the scores are best-effort.
    """

    scores: dict[str, float]
    iterations: int
    converged: bool


def pagerank(g: InteractionGraph, damping: float = 0.85, tol: float = 1e-9,
             max_iter: int = 100) -> PageRankResult:
    """Power iteration on the weighted directed graph with uniform teleport.

    x' = damping * (P x + dangling_mass / n) + (1 - damping) / n, iterated
    until the L1 change is below tol. Scores sum to 1 to within float error.
    """
    if len(g) == 0:
        raise ValueError("pagerank needs a nonempty graph")
    if not 0.0 < damping < 1.0:
        raise ValueError("damping must be in (0, 1)")
    if tol <= 0.0:
        raise ValueError("tol must be positive")

    nodes = g.sorted_nodes()
    n = len(nodes)
    index = {node: i for i, node in enumerate(nodes)}

    rows, cols, data = [], [], []
    out_weight = np.zeros(n)
    for src, dst, w, _, _ in g.edges():
        i, j = index[src], index[dst]
        rows.append(j)
        cols.append(i)
        data.append(float(w))
        out_weight[i] += w
    dangling = out_weight == 0.0
    safe_out = np.where(dangling, 1.0, out_weight)
    if data:
        data = np.asarray(data) / safe_out[np.asarray(cols)]
        transition = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    else:
        transition = sparse.csr_matrix((n, n))

    x = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        sink_mass = x[dangling].sum()
        x_next = damping * (transition.dot(x) + sink_mass / n) + teleport
        delta = np.abs(x_next - x).sum()
        x = x_next
        if delta < tol:
            converged = True
            break

    return PageRankResult(
        scores={node: float(x[index[node]]) for node in nodes},
        iterations=iterations,
        converged=converged,
    )


def scale_scores(raw: Mapping[str, float]) -> dict[str, float]:
    """Linear min-max map of raw scores onto [0, 10].

    The minimum raw score maps to 0 and the maximum to 10; a degenerate span
    (all scores equal, including a single node) maps everything to 10.
    """
    if not raw:
        raise ValueError("scale_scores needs at least one score")
    values = list(raw.values())
    lo, hi = min(values), max(values)
    span = hi - lo
    if span == 0.0:
        return {node: 10.0 for node in raw}
    # Divide before scaling: (score - lo) / span is bounded by 1.0 in IEEE
    # arithmetic, so results never stray above 10.
    return {node: 10.0 * ((score - lo) / span) for node, score in raw.items()}


@dataclass
class RankTable:
    """Ranked-account table: each column is sorted by its own metric.

    rows hold rendered labels; columns hold the underlying (user_id, value)
    rankings for programmatic use.
    """

    rows: list[tuple[int, str, str, str]] = field(default_factory=list)
    columns: dict[str, list[tuple[str, float]]] = field(default_factory=dict)


def _render(user_id: str, users: Mapping[str, UserRecord], privacy: bool) -> str:
    user = users.get(user_id)
    if user is None:
        return user_id
    if privacy and user.account_kind == "individual":
        return "Individual"
    return user.display_name or user.handle or user_id


def rank_tables(g: InteractionGraph, scaled_scores: Mapping[str, float],
                tweets: Sequence[TweetRecord], users: Mapping[str, UserRecord],
                k: int = 10, privacy: bool = True) -> RankTable:
    """Top-k accounts by times-retweeted, by scaled PageRank, and by authored
    tweet volume. With privacy on, individual accounts render as "Individual".
    """
    retweeted = weighted_in_degrees(g, kind="retweet")
    volume: dict[str, int] = {}
    for t in tweets:
        volume[t.author_id] = volume.get(t.author_id, 0) + 1

    def ranked(metric: Mapping[str, float | int]) -> list[tuple[str, float]]:
        order = sorted(metric.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(uid, float(v)) for uid, v in order[:k]]

    cols = {
        "retweeted": ranked(retweeted),
        "pagerank": ranked(dict(scaled_scores)),
        "tweet_volume": ranked(volume),
    }
    depth = max((len(c) for c in cols.values()), default=0)
    rows = []
    for i in range(min(k, depth)):
        rows.append((
            i + 1,
            _render(cols["retweeted"][i][0], users, privacy) if i < len(cols["retweeted"]) else "",
            _render(cols["pagerank"][i][0], users, privacy) if i < len(cols["pagerank"]) else "",
            _render(cols["tweet_volume"][i][0], users, privacy) if i < len(cols["tweet_volume"]) else "",
        ))
    return RankTable(rows=rows, columns=cols)


def write_rank_table_csv(table: RankTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "retweeted", "pagerank", "tweet_volume"])
        for row in table.rows:
            writer.writerow(row)


def write_rank_table_json(table: RankTable, path: str | Path) -> None:
    payload = [
        {"rank": rank, "retweeted": rt, "pagerank": pr, "tweet_volume": tv}
        for rank, rt, pr, tv in table.rows
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
