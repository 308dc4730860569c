"""Archive ingestion: NDJSON parsing, stream selection, engagement cleaning.

Corpora are newline-delimited JSON, one record per line. Parsing never aborts
on a bad line; malformed records are collected as line-numbered errors so a
run can report exactly what was skipped.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, Mapping, Sequence

__all__ = [
    "TweetRecord",
    "UserRecord",
    "StreamSpec",
    "CorpusStats",
    "RecordError",
    "parse_corpus",
    "parse_tweet",
    "parse_user",
    "serialize_tweet",
    "serialize_user",
    "write_ndjson",
    "apply_stream",
    "engagement_filter",
    "match_text",
]

TWEET_FIELDS = (
    "tweet_id", "author_id", "text", "created_at", "likes", "retweets",
    "replies", "mentions", "reply_to", "retweet_of", "lat", "lon",
    "place_name",
)
USER_FIELDS = (
    "user_id", "handle", "display_name", "followers", "has_profile_photo",
    "face_count", "age_estimate", "gender_estimate", "account_kind",
)

GENDER_VALUES = ("female", "male", "unknown")
ACCOUNT_KINDS = ("individual", "organization", "unknown")
STREAM_KINDS = ("keyword", "account", "mention", "geo_window")


@dataclass
class TweetRecord:
    """One archived post with its engagement counts and interaction links."""

    tweet_id: str
    author_id: str
    text: str
    created_at: int
    likes: int = 0
    retweets: int = 0
    replies: int = 0
    mentions: list[str] = field(default_factory=list)
    reply_to: str | None = None
    retweet_of: str | None = None
    lat: float | None = None
    lon: float | None = None
    place_name: str | None = None

    @property
    def coordinates(self) -> tuple[float, float] | None:
        if self.lat is None or self.lon is None:
            return None
        return (self.lat, self.lon)

    @property
    def engagement(self) -> int:
        return self.likes + self.retweets + self.replies


@dataclass
class UserRecord:
    """One account profile, with optional ingested face annotations.

    Age and gender annotations are only accepted when exactly one face was
    found in the profile picture; anything else is a record error.
    """

    user_id: str
    handle: str
    display_name: str
    followers: int = 0
    has_profile_photo: bool = False
    face_count: int | None = None
    age_estimate: int | None = None
    gender_estimate: str | None = None
    account_kind: str = "unknown"


@dataclass
class RecordError:
    line: int
    message: str

    def __str__(self) -> str:  # pragma: no cover - convenience only
        return f"line {self.line}: {self.message}"


@dataclass
class StreamSpec:
    """One selection rule over the archive (emulated filter stream).

    kind: "keyword" | "account" | "mention" | "geo_window".
    bounding_box is (lat_min, lon_min, lat_max, lon_max); window is a pair of
    UTC epoch seconds (start, end), both ends inclusive.
    """

    kind: str
    keywords: list[str] = field(default_factory=list)
    accounts: list[str] = field(default_factory=list)
    bounding_box: tuple[float, float, float, float] | None = None
    window: tuple[int, int] | None = None

    def validate(self) -> None:
        if self.kind not in STREAM_KINDS:
            raise ValueError(f"unknown stream kind {self.kind!r}")
        if self.kind == "keyword" and not self.keywords:
            raise ValueError("keyword stream needs at least one keyword")
        if self.kind in ("account", "mention") and not self.accounts:
            raise ValueError(f"{self.kind} stream needs at least one account")
        if self.kind == "geo_window":
            if self.bounding_box is None or self.window is None:
                raise ValueError("geo_window stream needs bounding_box and window")
            start, end = self.window
            if not end > start:
                raise ValueError("geo_window end must be after start")

    def normalized_box(self) -> tuple[float, float, float, float]:
        lat_a, lon_a, lat_b, lon_b = self.bounding_box
        return (min(lat_a, lat_b), min(lon_a, lon_b),
                max(lat_a, lat_b), max(lon_a, lon_b))


@dataclass
class CorpusStats:
    """Per-run ingestion accounting; read = kept + rejected + filtered."""

    records_read: int = 0
    records_rejected: int = 0
    records_kept: int = 0
    records_kept_per_stream: dict[str, int] = field(default_factory=dict)

    @property
    def records_filtered(self) -> int:
        return self.records_read - self.records_rejected - self.records_kept

    def reconciles(self) -> bool:
        return (self.records_read ==
                self.records_kept + self.records_rejected + self.records_filtered)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["records_filtered"] = self.records_filtered
        return d


def _require_str(obj: Mapping, key: str) -> str:
    v = obj.get(key)
    if not isinstance(v, str) or (key.endswith("_id") and not v):
        raise ValueError(f"missing or invalid required field {key!r}")
    return v


def _opt_str(obj: Mapping, key: str) -> str | None:
    v = obj.get(key)
    if v is None:
        return None
    if not isinstance(v, str):
        raise ValueError(f"field {key!r} must be a string")
    return v


def _count(obj: Mapping, key: str, default: int = 0) -> int:
    v = obj.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ValueError(f"field {key!r} must be a non-negative integer")
    return v


def parse_tweet(obj: Mapping) -> TweetRecord:
    """Build a TweetRecord from one decoded NDJSON object.

    Raises ValueError on any schema violation; unknown keys are ignored.
    """
    tweet_id = _require_str(obj, "tweet_id")
    author_id = _require_str(obj, "author_id")
    text = obj.get("text")
    if not isinstance(text, str):
        raise ValueError("missing or invalid required field 'text'")
    created = obj.get("created_at")
    if isinstance(created, bool) or not isinstance(created, (int, float)):
        raise ValueError("missing or invalid required field 'created_at'")
    created = int(created) if float(created).is_integer() else created

    mentions = obj.get("mentions", [])
    if mentions is None:
        mentions = []
    if not isinstance(mentions, list) or not all(isinstance(m, str) for m in mentions):
        raise ValueError("field 'mentions' must be a list of user ids")

    reply_to = _opt_str(obj, "reply_to")
    retweet_of = _opt_str(obj, "retweet_of")
    if reply_to is not None and retweet_of is not None and reply_to == retweet_of:
        raise ValueError("record is both a retweet and a reply to the same target")

    lat, lon = obj.get("lat"), obj.get("lon")
    if (lat is None) != (lon is None):
        raise ValueError("lat and lon must be present together")
    if lat is not None:
        if not isinstance(lat, (int, float)) or not isinstance(lon, (int, float)):
            raise ValueError("lat and lon must be numbers")
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            raise ValueError("coordinates out of range")
        lat, lon = float(lat), float(lon)

    return TweetRecord(
        tweet_id=tweet_id,
        author_id=author_id,
        text=text,
        created_at=created,
        likes=_count(obj, "likes"),
        retweets=_count(obj, "retweets"),
        replies=_count(obj, "replies"),
        mentions=list(mentions),
        reply_to=reply_to,
        retweet_of=retweet_of,
        lat=lat,
        lon=lon,
        place_name=_opt_str(obj, "place_name"),
    )


def parse_user(obj: Mapping) -> UserRecord:
    user_id = _require_str(obj, "user_id")
    handle = _require_str(obj, "handle")
    display_name = obj.get("display_name")
    if not isinstance(display_name, str):
        raise ValueError("missing or invalid required field 'display_name'")

    has_photo = obj.get("has_profile_photo", False)
    if not isinstance(has_photo, bool):
        raise ValueError("field 'has_profile_photo' must be a boolean")

    face_count = obj.get("face_count")
    if face_count is not None and (isinstance(face_count, bool)
                                   or not isinstance(face_count, int) or face_count < 0):
        raise ValueError("field 'face_count' must be a non-negative integer")

    age = obj.get("age_estimate")
    if age is not None and (isinstance(age, bool) or not isinstance(age, (int, float)) or age < 0):
        raise ValueError("field 'age_estimate' must be a non-negative number")
    gender = _opt_str(obj, "gender_estimate")
    if gender is not None and gender not in GENDER_VALUES:
        raise ValueError(f"field 'gender_estimate' must be one of {GENDER_VALUES}")
    if (age is not None or gender is not None) and face_count != 1:
        raise ValueError("age/gender annotations require face_count = 1")

    kind = obj.get("account_kind", "unknown")
    if kind not in ACCOUNT_KINDS:
        raise ValueError(f"field 'account_kind' must be one of {ACCOUNT_KINDS}")

    return UserRecord(
        user_id=user_id,
        handle=handle,
        display_name=display_name,
        followers=_count(obj, "followers"),
        has_profile_photo=has_photo,
        face_count=face_count,
        age_estimate=int(age) if age is not None else None,
        gender_estimate=gender,
        account_kind=kind,
    )


def serialize_tweet(t: TweetRecord) -> dict:
    """Inverse of parse_tweet; emits every schema field, null for absent ones."""
    return {name: getattr(t, name) for name in TWEET_FIELDS}


def serialize_user(u: UserRecord) -> dict:
    return {name: getattr(u, name) for name in USER_FIELDS}


def write_ndjson(path: str | Path, records: Iterable[TweetRecord | UserRecord]) -> int:
    """Serialize records one JSON object per line; returns the line count."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            obj = serialize_tweet(rec) if isinstance(rec, TweetRecord) else serialize_user(rec)
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            n += 1
    return n


def parse_corpus(path: str | Path, schema: str = "tweets"):
    """Parse an NDJSON corpus file.

    schema is "tweets" or "users". Returns (records, errors) where errors are
    line-numbered RecordError entries for malformed lines and duplicate ids;
    the first occurrence of a duplicated id wins. An unreadable file raises.
    """
    if schema not in ("tweets", "users"):
        raise ValueError(f"unknown schema {schema!r}")
    parse_one = parse_tweet if schema == "tweets" else parse_user
    id_field = "tweet_id" if schema == "tweets" else "user_id"

    records = []
    errors: list[RecordError] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("line is not a JSON object")
                rec = parse_one(obj)
            except (json.JSONDecodeError, ValueError) as exc:
                errors.append(RecordError(line_no, str(exc)))
                continue
            rec_id = getattr(rec, id_field)
            if rec_id in seen:
                errors.append(RecordError(line_no, f"duplicate {id_field} {rec_id!r}"))
                continue
            seen.add(rec_id)
            records.append(rec)
    return records, errors


def match_text(text: str) -> str:
    """Canonical form used for keyword matching: NFC, casefolded, tokens
    joined by single spaces. A keyword matches when its canonical form is a
    substring of this string (token-level substring for single words)."""
    return " ".join(unicodedata.normalize("NFC", text).casefold().split())


def _resolve_accounts(accounts: Sequence[str],
                      users: Mapping[str, UserRecord] | None) -> set[str]:
    ids = set(accounts)
    if users:
        by_handle = {u.handle.casefold(): u.user_id for u in users.values()}
        for acct in accounts:
            hit = by_handle.get(acct.casefold())
            if hit is not None:
                ids.add(hit)
    return ids


def apply_stream(records: Sequence[TweetRecord], spec: StreamSpec,
                 users: Mapping[str, UserRecord] | None = None) -> list[TweetRecord]:
    """Select the records matched by one stream spec, preserving input order.

    The optional user index lets account/mention streams be configured with
    handles as well as user ids.
    """
    spec.validate()

    if spec.kind == "keyword":
        needles = [match_text(k) for k in spec.keywords if k.strip()]
        if not needles:
            raise ValueError("keyword stream needs at least one non-empty keyword")
        return [t for t in records
                if any(n in match_text(t.text) for n in needles)]

    if spec.kind == "account":
        ids = _resolve_accounts(spec.accounts, users)
        return [t for t in records if t.author_id in ids]

    if spec.kind == "mention":
        ids = _resolve_accounts(spec.accounts, users)
        return [t for t in records if ids.intersection(t.mentions)]

    # geo_window
    lat_min, lon_min, lat_max, lon_max = spec.normalized_box()
    start, end = spec.window
    kept = []
    for t in records:
        if t.lat is None:
            continue
        if (lat_min <= t.lat <= lat_max and lon_min <= t.lon <= lon_max
                and start <= t.created_at <= end):
            kept.append(t)
    return kept


def select_streams(records: Sequence[TweetRecord], specs: Sequence[StreamSpec],
                   users: Mapping[str, UserRecord] | None = None,
                   stats: CorpusStats | None = None) -> list[TweetRecord]:
    """Union of all stream selections, deduplicated, in original corpus order.

    With no specs configured the whole corpus is kept (selection disabled).
    """
    if not specs:
        if stats is not None:
            stats.records_kept = len(records)
        return list(records)
    kept_ids: set[str] = set()
    for i, spec in enumerate(specs):
        hits = apply_stream(records, spec, users)
        if stats is not None:
            stats.records_kept_per_stream[f"stream_{i + 1}_{spec.kind}"] = len(hits)
        kept_ids.update(t.tweet_id for t in hits)
    selected = [t for t in records if t.tweet_id in kept_ids]
    if stats is not None:
        stats.records_kept = len(selected)
    return selected


def engagement_filter(records: Sequence[TweetRecord]) -> list[TweetRecord]:
    """Drop records with zero total engagement (likes + retweets + replies).

    Order-preserving and idempotent.
    """
    return [t for t in records if t.engagement > 0]
