"""Stage orchestration with persisted intermediates.

Every stage reads only the config plus files written by earlier stages and
persists its own output under the run directory, so any stage can be re-run
in isolation and a chained stage-by-stage run is byte-identical to a full
pipeline run (the full run simply calls the same stage functions in order).
"""

from __future__ import annotations

import csv
import json
import math
import random
from pathlib import Path

from . import analysis, community, demographics, influence, ingest, topics
from .config import RunConfig, derive_seed
from .graph import (InteractionGraph, build_interaction_graph, read_edge_csv,
                    write_edge_csv, write_node_list)

__all__ = [
    "StageError",
    "MissingInputError",
    "STAGES",
    "run_pipeline",
    "run_stage",
    "review_sample",
]

STAGES = ("ingest", "graph", "communities", "influence", "demographics",
          "topics", "report")


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception | str):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage


class MissingInputError(Exception):
    def __init__(self, path: Path | str, produced_by: str | None = None):
        hint = f"; run the {produced_by} stage first" if produced_by else ""
        super().__init__(f"missing input {path}{hint}")
        self.path = str(path)
        self.produced_by = produced_by


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require(path: Path, produced_by: str | None = None) -> Path:
    if not path.exists():
        raise MissingInputError(path, produced_by)
    return path


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _read_json(path: Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# Stage implementations


def stage_ingest(cfg: RunConfig) -> None:
    out = _out(cfg)
    tweets_path = _require(Path(cfg.tweets))
    users_path = _require(Path(cfg.users))

    tweets, tweet_errors = ingest.parse_corpus(tweets_path, schema="tweets")
    users, user_errors = ingest.parse_corpus(users_path, schema="users")
    user_index = {u.user_id: u for u in users}

    stats = ingest.CorpusStats(records_read=len(tweets) + len(tweet_errors),
                               records_rejected=len(tweet_errors))
    selected = ingest.select_streams(tweets, cfg.streams, user_index, stats)
    cleaned = ingest.engagement_filter(selected)
    stats.records_kept = len(cleaned)
    assert stats.reconciles()

    with open(out / "tweet_index.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tweet_id", "author_id"])
        for t in tweets:
            writer.writerow([t.tweet_id, t.author_id])

    ingest.write_ndjson(out / "selected_tweets.ndjson", cleaned)
    ingest.write_ndjson(out / "users.ndjson", users)
    payload = stats.to_dict()
    payload.update({
        "engagement_removed": len(selected) - len(cleaned),
        "tweet_parse_errors": [str(e) for e in tweet_errors[:20]],
        "user_parse_errors": [str(e) for e in user_errors[:20]],
        "users_read": len(users) + len(user_errors),
        "users_kept": len(users),
    })
    _write_json(out / "ingest_stats.json", payload)


def _load_tweets(cfg: RunConfig) -> list[ingest.TweetRecord]:
    path = _require(_out(cfg) / "selected_tweets.ndjson", "ingest")
    records, errors = ingest.parse_corpus(path, schema="tweets")
    if errors:
        raise ValueError(f"corrupt intermediate {path}: {errors[0]}")
    return records


def _load_users(cfg: RunConfig) -> dict[str, ingest.UserRecord]:
    path = _require(_out(cfg) / "users.ndjson", "ingest")
    records, errors = ingest.parse_corpus(path, schema="users")
    if errors:
        raise ValueError(f"corrupt intermediate {path}: {errors[0]}")
    return {u.user_id: u for u in records}


def _load_tweet_index(cfg: RunConfig) -> dict[str, str]:
    path = _require(_out(cfg) / "tweet_index.csv", "ingest")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return {row["tweet_id"]: row["author_id"] for row in csv.DictReader(fh)}


def stage_graph(cfg: RunConfig) -> None:
    out = _out(cfg)
    tweets = _load_tweets(cfg)
    index = _load_tweet_index(cfg)
    g, stats = build_interaction_graph(tweets, index)
    write_edge_csv(g, out / "graph_edges.csv")
    write_node_list(g, out / "graph_nodes.txt")
    _write_json(out / "graph_stats.json", {
        "nodes": len(g),
        "edges": g.num_edges(),
        "total_weight": g.total_weight(),
        "resolved_retweets": stats.resolved_retweets,
        "resolved_replies": stats.resolved_replies,
        "unresolved_targets": stats.unresolved_targets,
        "self_interactions": stats.self_interactions,
    })


def _load_graph(cfg: RunConfig) -> InteractionGraph:
    out = _out(cfg)
    edges = _require(out / "graph_edges.csv", "graph")
    nodes = _require(out / "graph_nodes.txt", "graph")
    return read_edge_csv(edges, nodes)


def stage_communities(cfg: RunConfig) -> None:
    out = _out(cfg)
    g = _load_graph(cfg)
    users = _load_users(cfg)
    tweets = _load_tweets(cfg)

    importance = community.node_importance(
        g, mode=cfg.importance_mode, damping=cfg.damping,
        tol=cfg.pagerank_tol, max_iter=cfg.pagerank_max_iter,
    ) if cfg.importance_mode == "pagerank" else community.node_importance(g)
    assignment = community.label_propagation(
        g, importance, seed=derive_seed(cfg.seed, "communities"),
        max_rounds=cfg.lp_max_rounds)
    gated = community.gate_communities(assignment, cfg.min_community_size)

    keywords = cfg.effective_flag_keywords()
    flags = (community.flag_offtopic(gated, tweets, keywords, users)
             if keywords else [])
    community.write_review_flags(out / "review_flags.csv", gated, flags)

    with open(out / "community_labels.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["user_id", "community_id"])
        for user_id in sorted(gated.labels):
            writer.writerow([user_id, gated.labels[user_id]])
    with open(out / "communities.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["community_id", "size", "anchor"])
        for c in gated.communities:
            writer.writerow([c.community_id, c.size, c.anchor])
    _write_json(out / "community_stats.json", {
        "iterations_run": assignment.iterations_run,
        "converged": assignment.converged,
        "communities_pre_gate": len(assignment.communities),
        "communities_post_gate": len(gated.communities),
        "dropped_members": gated.dropped_members,
        "flagged": len(flags),
    })


def stage_influence(cfg: RunConfig) -> None:
    out = _out(cfg)
    g = _load_graph(cfg)
    result = influence.pagerank(g, damping=cfg.damping, tol=cfg.pagerank_tol,
                                max_iter=cfg.pagerank_max_iter)
    scaled = influence.scale_scores(result.scores) if result.scores else {}
    with open(out / "influence.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["user_id", "raw", "scaled"])
        for user_id in sorted(result.scores):
            writer.writerow([user_id, repr(result.scores[user_id]),
                             repr(scaled[user_id])])
    _write_json(out / "influence_stats.json", {
        "iterations": result.iterations,
        "converged": result.converged,
    })


def _load_influence(cfg: RunConfig) -> dict[str, tuple[float, float]]:
    path = _require(_out(cfg) / "influence.csv", "influence")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return {row["user_id"]: (float(row["raw"]), float(row["scaled"]))
                for row in csv.DictReader(fh)}


def stage_demographics(cfg: RunConfig) -> None:
    out = _out(cfg)
    users = _load_users(cfg)
    tweets = _load_tweets(cfg)
    gaz = demographics.load_gazetteer(_require(cfg.data_file("gazetteer")))
    names, labels = demographics.load_training_names(
        _require(cfg.data_file("classifier_names")))
    model = demographics.NameModel(
        census_lists=demographics.load_name_lists(_require(cfg.data_file("name_lists"))),
        classifier=demographics.NgramNameClassifier().fit(names, labels),
        tau=cfg.tau,
    )
    lexicon = demographics.ProperNounLexicon.from_files(
        _require(cfg.data_file("given_names")), _require(cfg.data_file("stopwords")))
    annotations = demographics.annotate_users(
        list(users.values()), tweets, gaz, model, lexicon)
    demographics.write_annotations(out / "annotations.ndjson", annotations)


def _load_community_members(cfg: RunConfig) -> set[str]:
    path = _require(_out(cfg) / "community_labels.csv", "communities")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return {row["user_id"] for row in csv.DictReader(fh)}


def stage_topics(cfg: RunConfig) -> None:
    out = _out(cfg)
    tweets = _load_tweets(cfg)
    members = _load_community_members(cfg)
    annotations = demographics.read_annotations(
        _require(out / "annotations.ndjson", "demographics"))

    studied = {uid for uid in members
               if uid in annotations and annotations[uid].eligible_youth}
    corpus = [t for t in tweets if t.author_id in studied]
    texts = [topics.normalize_text(t.text) for t in corpus]

    if cfg.embedding_source == "external":
        vectors = topics.load_external_vectors(
            _require(Path(cfg.vectors)), [t.tweet_id for t in corpus], cfg.dim)
    else:
        vectors, _ = topics.embed_corpus(texts, cfg.dim)

    result = topics.cluster(vectors, cfg.k, seed=derive_seed(cfg.seed, "topics"),
                            max_iter=cfg.kmeans_max_iter)

    idf = topics.word_idf(texts)
    clusters = []
    assignment_map: dict[str, int] = {}
    for cid in range(cfg.k):
        member_ids = [corpus[i].tweet_id for i in range(len(corpus))
                      if result.assignments[i] == cid]
        member_texts = [texts[i] for i in range(len(corpus))
                        if result.assignments[i] == cid]
        for tid in member_ids:
            assignment_map[tid] = cid
        clusters.append(topics.TopicCluster(
            cluster_id=cid,
            centroid=result.centroids[cid],
            member_tweet_ids=member_ids,
            top_terms=topics.top_terms(member_texts, idf) if member_texts else [],
            size=len(member_ids),
        ))

    topics.write_assignments(out / "topic_assignments.ndjson", assignment_map)
    topics.write_cluster_csv(clusters, out / "topic_clusters.csv")
    sil = (topics.silhouette(vectors, result.assignments)
           if 2 <= cfg.k < len(corpus) <= 4000 else None)
    _write_json(out / "topic_stats.json", {
        "clustered_tweets": len(corpus),
        "iterations": result.iterations,
        "converged": result.converged,
        "final_sse": result.sse_history[-1] if result.sse_history else 0.0,
        "silhouette": sil,
    })


def _load_clusters(cfg: RunConfig) -> list[tuple[int, int, str]]:
    path = _require(_out(cfg) / "topic_clusters.csv", "topics")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return [(int(row["cluster_id"]), int(row["size"]), row["top_terms"])
                for row in csv.DictReader(fh)]


def stage_report(cfg: RunConfig) -> None:
    out = _out(cfg)
    g = _load_graph(cfg)
    tweets = _load_tweets(cfg)
    users = _load_users(cfg)
    scores = _load_influence(cfg)
    annotations = demographics.read_annotations(
        _require(out / "annotations.ndjson", "demographics"))
    assignments = topics.read_assignments(
        _require(out / "topic_assignments.ndjson", "topics"))

    scaled = {uid: sc for uid, (_, sc) in scores.items()}
    table = influence.rank_tables(g, scaled, tweets, users,
                                  k=cfg.table_rows, privacy=cfg.privacy)

    by_id = {t.tweet_id: t for t in tweets}
    studied_users = sorted({by_id[tid].author_id for tid in assignments if tid in by_id})
    studied_annotations = {uid: annotations[uid] for uid in studied_users
                           if uid in annotations}
    continent_dist = (demographics.demographic_distribution(studied_annotations, "continent")
                      if studied_annotations else demographics.DistributionResult())
    ethnicity_dist = (demographics.demographic_distribution(studied_annotations, "race")
                      if studied_annotations else demographics.DistributionResult())

    rows: list[analysis.RepresentationRow] = []
    for axis in ("gender", "race", "continent"):
        engagements, corpus_counts = analysis.topic_engagement(
            assignments, tweets, annotations, axis,
            retweet_weighted=cfg.retweet_weighted)
        report = analysis.disproportionality_report(
            engagements, corpus_counts, axis, tau_hi=cfg.tau_hi, tau_lo=cfg.tau_lo)
        rows.extend(report.rows)
    rows.sort(key=lambda r: (-(abs(math.log(r.ratio)) if r.ratio > 0 else math.inf),
                             r.axis, r.cluster_id, r.bucket))
    merged = analysis.RepresentationReport(rows=rows, tau_hi=cfg.tau_hi,
                                           tau_lo=cfg.tau_lo)

    stage_counts: dict[str, int] = {}
    for stats_file, keys in (
        ("ingest_stats.json", ("records_read", "records_rejected", "records_kept")),
        ("graph_stats.json", ("nodes", "edges")),
        ("community_stats.json", ("communities_post_gate", "dropped_members")),
        ("topic_stats.json", ("clustered_tweets",)),
    ):
        payload = _read_json(_require(out / stats_file))
        for key in keys:
            stage_counts[key] = payload[key]

    fixtures = {}
    for name in ("gazetteer", "name_lists", "classifier_names", "given_names",
                 "stopwords"):
        path = cfg.data_file(name)
        fixtures[path.name] = analysis._sha256(path)

    bundle = analysis.ReportBundle(
        rank_table=table,
        continent_distribution=continent_dist,
        ethnicity_distribution=ethnicity_dist,
        representation=merged,
        config_hash=cfg.config_hash(),
        seed=cfg.seed,
        stage_counts=stage_counts,
        data_fixtures=fixtures,
    )
    analysis.emit_reports(bundle, out, formats=cfg.formats)


_STAGE_FUNCS = {
    "ingest": stage_ingest,
    "graph": stage_graph,
    "communities": stage_communities,
    "influence": stage_influence,
    "demographics": stage_demographics,
    "topics": stage_topics,
    "report": stage_report,
}


def run_stage(cfg: RunConfig, stage: str) -> None:
    """Run one stage; upstream artifacts must already be persisted."""
    try:
        _STAGE_FUNCS[stage](cfg)
    except MissingInputError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc


def run_pipeline(cfg: RunConfig) -> Path:
    """Run every stage in order; returns the manifest path."""
    for stage in STAGES:
        run_stage(cfg, stage)
    return _out(cfg) / "manifest.json"


def review_sample(cfg: RunConfig, n: int | None = None,
                  seed: int | None = None) -> Path:
    """Stratified random sample of topics for human validation.

    Clusters are split into small/medium/large size terciles and sampled
    proportionally with a seeded RNG; reruns with the same seed pick the
    same topics. Writes review_sample.csv and returns its path.
    """
    out = _out(cfg)
    clusters = [c for c in _load_clusters(cfg) if c[1] > 0]
    assignments = topics.read_assignments(
        _require(out / "topic_assignments.ndjson", "topics"))
    tweets = {t.tweet_id: t for t in _load_tweets(cfg)}

    n = n if n is not None else cfg.review_sample_size
    seed = seed if seed is not None else derive_seed(cfg.seed, "review-sample")
    rng = random.Random(seed)

    by_size = sorted(clusters, key=lambda c: (c[1], c[0]))
    strata: list[list[tuple[int, int, str]]] = [[], [], []]
    for i, item in enumerate(by_size):
        strata[min(2, i * 3 // max(1, len(by_size)))].append(item)
    names = ("small", "medium", "large")

    total = len(by_size)
    chosen: list[tuple[str, tuple[int, int, str]]] = []
    for name, stratum in zip(names, strata):
        if not stratum:
            continue
        quota = min(len(stratum), max(1, round(n * len(stratum) / total)))
        picks = rng.sample(stratum, quota)
        chosen.extend((name, pick) for pick in picks)
    chosen = chosen[:n]
    chosen.sort(key=lambda item: item[1][0])

    examples: dict[int, list[str]] = {}
    for tid in sorted(assignments):
        cid = assignments[tid]
        bucket = examples.setdefault(cid, [])
        if len(bucket) < 3:
            bucket.append(tid)

    path = out / "review_sample.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cluster_id", "size", "stratum", "top_terms",
                         "example_texts"])
        for stratum_name, (cid, size, terms) in chosen:
            snippets = [tweets[tid].text.replace("\n", " ")
                        for tid in examples.get(cid, []) if tid in tweets]
            writer.writerow([cid, size, stratum_name, terms, " | ".join(snippets)])
    return path
