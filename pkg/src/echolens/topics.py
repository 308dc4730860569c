"""Tweet text normalization, deterministic embedding, and topic clustering.

The embedder is a feature-hashed bag of word unigrams and character trigrams
with TF-IDF weighting, L2-normalized. It is a deterministic stand-in for a
pre-trained sentence encoder: identical token lists always map to identical
vectors, and precomputed external vectors can be plugged in through an NDJSON
file keyed by tweet id. Clustering is k-means with greedy farthest-point
initialization, which is fully reproducible for a given seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "NormalizedText",
    "EmbeddingVector",
    "TopicCluster",
    "KMeansResult",
    "BuiltinEmbedder",
    "normalize_text",
    "embed_corpus",
    "load_external_vectors",
    "cluster",
    "word_idf",
    "top_terms",
    "silhouette",
]

DEFAULT_DIM = 512
DEFAULT_K = 250

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#(\w+)")
_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_TRIM_RE = re.compile(r"^\W+|\W+$", re.UNICODE)


@dataclass
class NormalizedText:
    tokens: list[str]
    hashtag_expansions: list[str] = field(default_factory=list)
    mentions: list[str] = field(default_factory=list)
    urls: list[str] = field(default_factory=list)
    original: str = ""

    def joined(self) -> str:
        return " ".join(self.tokens)


def _split_hashtag(word: str) -> list[str]:
    parts: list[str] = []
    for chunk in re.split(r"[_\W]+", word):
        if chunk:
            parts.extend(p for p in _CAMEL_RE.split(chunk) if p)
    return parts


def normalize_text(raw: str) -> NormalizedText:
    """Structural normalization: NFC, lowercase, URLs and mentions stripped
    (but recorded), hashtags split on case boundaries and retained, tokens
    trimmed of surrounding punctuation. Idempotent on its own output."""
    text = unicodedata.normalize("NFC", raw)
    urls = _URL_RE.findall(text)
    text = _URL_RE.sub(" ", text)
    mentions = [m[1:] for m in _MENTION_RE.findall(text)]
    text = _MENTION_RE.sub(" ", text)

    tokens: list[str] = []
    expansions: list[str] = []
    for word in text.split():
        if word.startswith("#"):
            pieces = [p.lower() for p in _split_hashtag(word[1:])]
            expansions.extend(pieces)
            tokens.extend(pieces)
            continue
        token = _TRIM_RE.sub("", word).lower()
        if token:
            tokens.append(token)
    return NormalizedText(
        tokens=tokens,
        hashtag_expansions=expansions,
        mentions=mentions,
        urls=urls,
        original=raw,
    )


@dataclass
class EmbeddingVector:
    values: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


@dataclass
class TopicCluster:
    cluster_id: int
    centroid: np.ndarray
    member_tweet_ids: list[str]
    top_terms: list[str]
    size: int


def _features(text: NormalizedText) -> dict[str, int]:
    """Word unigrams plus character trigrams per token, with raw counts.
    Feature names are prefixed so the two spaces never collide."""
    counts: dict[str, int] = {}
    for token in text.tokens:
        key = "w:" + token
        counts[key] = counts.get(key, 0) + 1
        if len(token) >= 3:
            for i in range(len(token) - 2):
                key = "c:" + token[i:i + 3]
                counts[key] = counts.get(key, 0) + 1
    return counts


def _hash_feature(name: str) -> int:
    return int.from_bytes(
        hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest(), "big")


class BuiltinEmbedder:
    """Hashed TF-IDF embedding over a fixed corpus.

    tf is the raw in-document count; idf(t) = ln((1 + N) / (1 + df(t))) + 1,
    so terms absent from the corpus still get finite weight. Each feature is
    folded into the vector at hash(name) mod dim with a hash-derived sign,
    then the vector is L2-normalized.
    """

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = dim
        self.n_docs = 0
        self.df: dict[str, int] = {}

    def fit(self, texts: Sequence[NormalizedText]) -> "BuiltinEmbedder":
        self.n_docs = len(texts)
        self.df = {}
        for text in texts:
            for feature in _features(text):
                self.df[feature] = self.df.get(feature, 0) + 1
        return self

    def idf(self, feature: str) -> float:
        return math.log((1 + self.n_docs) / (1 + self.df.get(feature, 0))) + 1.0

    def weights(self, text: NormalizedText) -> dict[str, float]:
        """Pre-hash TF-IDF weights per feature (exposed for verification)."""
        return {f: tf * self.idf(f) for f, tf in _features(text).items()}

    def transform(self, text: NormalizedText) -> np.ndarray:
        vec = np.zeros(self.dim)
        for feature, weight in self.weights(text).items():
            h = _hash_feature(feature)
            sign = 1.0 if (h >> 60) & 1 == 0 else -1.0
            vec[h % self.dim] += sign * weight
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec

    def transform_many(self, texts: Sequence[NormalizedText]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for i, text in enumerate(texts):
            out[i] = self.transform(text)
        return out


def embed_corpus(texts: Sequence[NormalizedText], dim: int = DEFAULT_DIM):
    """Fit the builtin embedder on the corpus and return (matrix, embedder)."""
    embedder = BuiltinEmbedder(dim).fit(texts)
    return embedder.transform_many(texts), embedder


def load_external_vectors(path: str | Path, tweet_ids: Sequence[str],
                          dim: int = DEFAULT_DIM) -> np.ndarray:
    """Read precomputed vectors (NDJSON: tweet_id, vector) and L2-normalize.

    Every requested tweet id must be present; missing ids raise with the ids
    named so the caller can fix the vector file.
    """
    table: dict[str, list[float]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            table[obj["tweet_id"]] = obj["vector"]
    missing = [tid for tid in tweet_ids if tid not in table]
    if missing:
        raise ValueError(f"external vectors missing for tweet ids: {missing[:10]}")
    out = np.zeros((len(tweet_ids), dim))
    for i, tid in enumerate(tweet_ids):
        vec = np.asarray(table[tid], dtype=float)
        if vec.shape != (dim,):
            raise ValueError(f"vector for {tid} has length {vec.shape[0]}, expected {dim}")
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"vector for {tid} has non-finite entries")
        norm = np.linalg.norm(vec)
        out[i] = vec / norm if norm > 0 else vec
    return out


# ---------------------------------------------------------------------------
# k-means


@dataclass
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    sse_history: list[float]
    iterations: int
    converged: bool


def _sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2, clipped against float negatives
    d = (
        np.sum(points ** 2, axis=1)[:, None]
        - 2.0 * points @ centroids.T
        + np.sum(centroids ** 2, axis=1)[None, :]
    )
    return np.maximum(d, 0.0)


def _farthest_point_init(points: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Greedy farthest-point seeding: one random start, then repeatedly the
    point farthest from its nearest chosen centroid (ties: lowest index)."""
    import random as _random

    n = points.shape[0]
    first = _random.Random(seed).randrange(n)
    chosen = [first]
    dist = np.sum((points - points[first]) ** 2, axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.sum((points - points[nxt]) ** 2, axis=1))
    return points[chosen].copy()


def cluster(vectors: np.ndarray, k: int, seed: int = 0,
            max_iter: int = 100) -> KMeansResult:
    """Lloyd's k-means on L2-normalized vectors, deterministic given seed.

    Within-cluster SSE is checked to be non-increasing across iterations; an
    emptied cluster is re-seeded from the point currently farthest from its
    own centroid.
    """
    points = np.asarray(vectors, dtype=float)
    n = points.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds number of vectors ({n})")

    centroids = _farthest_point_init(points, k, seed)
    assignments = np.full(n, -1, dtype=int)
    sse_history: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        dists = _sq_dists(points, centroids)
        new_assignments = np.argmin(dists, axis=1)

        # Re-seed any emptied cluster from the current worst-fit point.
        present = np.bincount(new_assignments, minlength=k)
        empties = np.flatnonzero(present == 0)
        if empties.size:
            own = dists[np.arange(n), new_assignments].copy()
            for cid in empties:
                worst = int(np.argmax(own))
                new_assignments[worst] = cid
                centroids[cid] = points[worst]
                own[worst] = -1.0
            dists = _sq_dists(points, centroids)
            new_assignments = np.argmin(dists, axis=1)

        sse = float(dists[np.arange(n), new_assignments].sum())
        if sse_history and sse > sse_history[-1] + 1e-9 * max(1.0, sse_history[-1]):
            raise AssertionError(
                f"k-means SSE increased: {sse_history[-1]} -> {sse}")
        sse_history.append(sse)

        if np.array_equal(new_assignments, assignments):
            converged = True
            break
        assignments = new_assignments
        for cid in range(k):
            members = points[assignments == cid]
            if members.size:
                centroids[cid] = members.mean(axis=0)

    return KMeansResult(
        assignments=assignments,
        centroids=centroids,
        sse_history=sse_history,
        iterations=iterations,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Cluster labeling and diagnostics


def word_idf(texts: Sequence[NormalizedText]) -> dict[str, float]:
    """Corpus IDF over word tokens only (same formula as the embedder)."""
    n = len(texts)
    df: dict[str, int] = {}
    for text in texts:
        for token in set(text.tokens):
            df[token] = df.get(token, 0) + 1
    return {t: math.log((1 + n) / (1 + d)) + 1.0 for t, d in df.items()}


def top_terms(cluster_texts: Sequence[NormalizedText], idf: Mapping[str, float],
              n: int = 10) -> list[str]:
    """Top terms by within-cluster TF-IDF mass, descending; ties lexicographic."""
    if not cluster_texts:
        raise ValueError("top_terms needs a nonempty cluster")
    mass: dict[str, float] = {}
    for text in cluster_texts:
        for token in text.tokens:
            mass[token] = mass.get(token, 0.0) + idf.get(token, 1.0)
    ranked = sorted(mass.items(), key=lambda kv: (-kv[1], kv[0]))
    return [term for term, _ in ranked[:n]]


def silhouette(vectors: np.ndarray, assignments: np.ndarray) -> float:
    """Mean silhouette coefficient, O(n^2); intended for desk-scale runs."""
    points = np.asarray(vectors, dtype=float)
    labels = np.asarray(assignments)
    n = points.shape[0]
    unique = np.unique(labels)
    if unique.size < 2 or n < 3:
        return 0.0
    dists = np.sqrt(_sq_dists(points, points))
    scores = np.zeros(n)
    for i in range(n):
        same = labels == labels[i]
        n_same = same.sum()
        a = dists[i, same].sum() / (n_same - 1) if n_same > 1 else 0.0
        b = math.inf
        for lbl in unique:
            if lbl == labels[i]:
                continue
            mask = labels == lbl
            b = min(b, dists[i, mask].mean())
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0 else (b - a) / denom
    return float(scores.mean())


def write_cluster_csv(clusters: Sequence[TopicCluster], path: str | Path) -> None:
    """Cluster output CSV `cluster_id,size,top_terms` (terms space-joined)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["cluster_id", "size", "top_terms"])
        for c in sorted(clusters, key=lambda c: c.cluster_id):
            writer.writerow([c.cluster_id, c.size, " ".join(c.top_terms)])


def write_assignments(path: str | Path, assignment_map: Mapping[str, int]) -> None:
    """Assignment NDJSON `tweet_id,cluster_id`, one tweet per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tweet_id in sorted(assignment_map):
            fh.write(json.dumps({"tweet_id": tweet_id,
                                 "cluster_id": int(assignment_map[tweet_id])},
                                sort_keys=True))
            fh.write("\n")


def read_assignments(path: str | Path) -> dict[str, int]:
    out: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                out[obj["tweet_id"]] = int(obj["cluster_id"])
    return out
