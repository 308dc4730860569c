"""Country geolocation, name-based race classification, and eligibility rules.

The race classifier is a two-tier lookup: an exact hit on a configured census
name list decides immediately (list order is the precedence order), otherwise
a character-n-gram conditional model trained on labeled names produces a
posterior over the four non-Inconclusive categories. Below the confidence
threshold, the answer is Inconclusive.

All demographic data files are user-supplied CSV; the files bundled under
data/ are small synthetic fixtures for tests and demos only.
"""

from __future__ import annotations

import csv
import json
import math
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .ingest import TweetRecord, UserRecord

__all__ = [
    "RACE_CATEGORIES",
    "Gazetteer",
    "NgramNameClassifier",
    "NameModel",
    "ProperNounLexicon",
    "DemographicAnnotation",
    "DistributionResult",
    "load_gazetteer",
    "load_name_lists",
    "load_training_names",
    "geolocate_country",
    "continent_of",
    "classify_race",
    "eligibility_filter",
    "annotate_users",
    "demographic_distribution",
    "write_annotations",
    "read_annotations",
]

RACE_CATEGORIES = ("Asian", "Hispanic", "African", "White", "Inconclusive")
CLASSIFIER_CATEGORIES = ("Asian", "Hispanic", "African", "White")

# Raw training/list labels fold into the four classifier categories.
LABEL_FOLD = {
    "asian": "Asian",
    "indian": "Asian",
    "japanese": "Asian",
    "east asian": "Asian",
    "east_asian": "Asian",
    "hispanic": "Hispanic",
    "latino": "Hispanic",
    "hispanic european": "Hispanic",
    "hispanic_european": "Hispanic",
    "african": "African",
    "black": "African",
    "greater african": "African",
    "greater_african": "African",
    "white": "White",
    "european": "White",
}

DATA_DIR = Path(__file__).parent / "data"


def fold_label(raw: str) -> str:
    key = raw.strip().casefold().replace("-", " ")
    try:
        return LABEL_FOLD[key]
    except KeyError:
        raise ValueError(f"unknown demographic label {raw!r}") from None


def normalize_name(name: str) -> str:
    """Casefolded, NFC, letters-and-spaces-only form used for all name data."""
    text = unicodedata.normalize("NFC", name).casefold()
    cleaned = "".join(ch if ch.isalpha() else " " for ch in text)
    return " ".join(cleaned.split())


# ---------------------------------------------------------------------------
# Geolocation


@dataclass
class Gazetteer:
    """Place-name and bounding-box lookups to ISO-3166 alpha-2 countries.

    Boxes are checked in file order; entries are matched case-insensitively.
    """

    entries: dict[str, str] = field(default_factory=dict)
    boxes: list[tuple[float, float, float, float, str]] = field(default_factory=list)

    def lookup_place(self, place: str) -> str | None:
        return self.entries.get(normalize_name(place))

    def lookup_coordinates(self, lat: float, lon: float) -> str | None:
        for lat_min, lon_min, lat_max, lon_max, country in self.boxes:
            if lat_min <= lat <= lat_max and lon_min <= lon <= lon_max:
                return country
        return None


def load_gazetteer(path: str | Path) -> Gazetteer:
    """Gazetteer CSV: `kind(place|box),name_or_coords,country`; box coords are
    four space-separated numbers lat_min lon_min lat_max lon_max."""
    gaz = Gazetteer()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            kind = row["kind"].strip()
            country = row["country"].strip().upper()
            if kind == "place":
                gaz.entries[normalize_name(row["name_or_coords"])] = country
            elif kind == "box":
                parts = [float(p) for p in row["name_or_coords"].split()]
                if len(parts) != 4:
                    raise ValueError(f"bad box row: {row}")
                lat_min, lon_min, lat_max, lon_max = parts
                if not (lat_min <= lat_max and lon_min <= lon_max):
                    raise ValueError(f"degenerate box: {row}")
                gaz.boxes.append((lat_min, lon_min, lat_max, lon_max, country))
            else:
                raise ValueError(f"unknown gazetteer kind {kind!r}")
    return gaz


def geolocate_country(t: TweetRecord, gaz: Gazetteer) -> str | None:
    """Coordinates win over place name; first matching box in file order."""
    if t.coordinates is not None:
        hit = gaz.lookup_coordinates(t.lat, t.lon)
        if hit is not None:
            return hit
    if t.place_name:
        return gaz.lookup_place(t.place_name)
    return None


def _load_continents() -> dict[str, str]:
    table = {}
    with open(DATA_DIR / "continents.csv", "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            table[row["country"].strip().upper()] = row["continent"].strip()
    return table


_CONTINENTS: dict[str, str] | None = None


def continent_of(country: str | None) -> str | None:
    global _CONTINENTS
    if country is None:
        return None
    if _CONTINENTS is None:
        _CONTINENTS = _load_continents()
    return _CONTINENTS.get(country.upper())


# ---------------------------------------------------------------------------
# Name classification


class NgramNameClassifier:
    """Character-n-gram conditional model over the four coarse categories.

    Each token of a normalized name is padded as ^token$ and sliced into
    n-grams. Training estimates, per category c with N_c total gram
    occurrences over a shared vocabulary V:

        P(g | c) = (count(g, c) + 1) / (N_c + |V|)        (Laplace)
        prior(c) = names_c / names_total

    The posterior for a name multiplies gram likelihoods under each category
    with nonzero prior and renormalizes; grams unseen in training still get
    their smoothed mass. Computed in log space.
    """

    def __init__(self, ngram: int = 3):
        if ngram < 2:
            raise ValueError("ngram must be >= 2")
        self.ngram = ngram
        self._gram_counts: dict[str, dict[str, int]] = {c: {} for c in CLASSIFIER_CATEGORIES}
        self._total_grams: dict[str, int] = {c: 0 for c in CLASSIFIER_CATEGORIES}
        self._name_counts: dict[str, int] = {c: 0 for c in CLASSIFIER_CATEGORIES}
        self._vocab: set[str] = set()

    def grams(self, name: str) -> list[str]:
        out = []
        for token in normalize_name(name).split():
            padded = f"^{token}$"
            if len(padded) <= self.ngram:
                out.append(padded)
            else:
                out.extend(padded[i:i + self.ngram]
                           for i in range(len(padded) - self.ngram + 1))
        return out

    def fit(self, names: Sequence[str], labels: Sequence[str]) -> "NgramNameClassifier":
        if len(names) != len(labels):
            raise ValueError("names and labels must align")
        if not names:
            raise ValueError("training set is empty")
        for name, raw_label in zip(names, labels):
            category = fold_label(raw_label)
            self._name_counts[category] += 1
            for gram in self.grams(name):
                counts = self._gram_counts[category]
                counts[gram] = counts.get(gram, 0) + 1
                self._total_grams[category] += 1
                self._vocab.add(gram)
        return self

    def posterior(self, name: str) -> dict[str, float]:
        """Posterior over the four categories; sums to 1 for any nonempty
        normalized name. Empty names give a uniform-zero posterior."""
        grams = self.grams(name)
        total_names = sum(self._name_counts.values())
        if not grams or total_names == 0:
            return {c: 0.0 for c in CLASSIFIER_CATEGORIES}
        vocab_size = len(self._vocab)
        log_post: dict[str, float] = {}
        for category in CLASSIFIER_CATEGORIES:
            n_names = self._name_counts[category]
            if n_names == 0:
                continue
            score = math.log(n_names / total_names)
            denom = self._total_grams[category] + vocab_size
            counts = self._gram_counts[category]
            for gram in grams:
                score += math.log((counts.get(gram, 0) + 1) / denom)
            log_post[category] = score
        peak = max(log_post.values())
        exp = {c: math.exp(s - peak) for c, s in log_post.items()}
        z = sum(exp.values())
        return {c: exp.get(c, 0.0) / z for c in CLASSIFIER_CATEGORIES}


@dataclass
class NameModel:
    """Census lists (ordered; earlier lists take precedence) plus the n-gram
    classifier and its confidence threshold."""

    census_lists: list[tuple[str, set[str]]] = field(default_factory=list)
    classifier: NgramNameClassifier | None = None
    tau: float = 0.6

    def list_lookup(self, display_name: str) -> str | None:
        tokens = normalize_name(display_name).split()
        for category, names in self.census_lists:
            for token in tokens:
                if token in names:
                    return category
        return None


def load_name_lists(path: str | Path) -> list[tuple[str, set[str]]]:
    """Name-list CSV `name,category`; categories keep first-appearance order,
    which is the precedence order for conflicting hits."""
    ordered: list[tuple[str, set[str]]] = []
    index: dict[str, set[str]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            category = fold_label(row["category"])
            if category not in index:
                names: set[str] = set()
                index[category] = names
                ordered.append((category, names))
            index[category].add(normalize_name(row["name"]))
    return ordered


def load_training_names(path: str | Path) -> tuple[list[str], list[str]]:
    names, labels = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            names.append(row["name"])
            labels.append(row["category"])
    return names, labels


def classify_race(display_name: str, model: NameModel) -> str:
    """Total function into the five categories.

    Precedence: census-list hit, then classifier posterior above tau, then
    Inconclusive. A posterior tie at the max resolves in fixed category order.
    """
    if not normalize_name(display_name):
        return "Inconclusive"
    hit = model.list_lookup(display_name)
    if hit is not None:
        return hit
    if model.classifier is None:
        return "Inconclusive"
    posterior = model.classifier.posterior(display_name)
    best = max(posterior.values())
    if best >= model.tau:
        for category in CLASSIFIER_CATEGORIES:
            if posterior[category] == best:
                return category
    return "Inconclusive"


# ---------------------------------------------------------------------------
# Eligibility and annotations


@dataclass
class ProperNounLexicon:
    """Given-name/surname dictionary plus a common-word stop list.

    A token counts as a proper noun when it has >= 2 characters, starts with
    an uppercase letter, and is either in the name dictionary or absent from
    the stop list.
    """

    names: set[str] = field(default_factory=set)
    stopwords: set[str] = field(default_factory=set)

    @classmethod
    def from_files(cls, names_path: str | Path, stopwords_path: str | Path):
        lex = cls()
        with open(names_path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                lex.names.add(normalize_name(row["name"]))
        with open(stopwords_path, "r", encoding="utf-8") as fh:
            for line in fh:
                word = line.strip()
                if word and not word.startswith("#"):
                    lex.stopwords.add(word.casefold())
        return lex

    def has_proper_noun(self, display_name: str) -> bool:
        for token in display_name.split():
            if len(token) < 2 or not token[0].isupper():
                continue
            folded = normalize_name(token)
            if not folded:
                continue
            if folded in self.names or folded not in self.stopwords:
                return True
        return False


YOUTH_AGE_MIN = 13
YOUTH_AGE_MAX = 25


def _youth_age_ok(age: int | None) -> bool:
    return age is None or YOUTH_AGE_MIN <= age <= YOUTH_AGE_MAX


def eligibility_filter(users: Sequence[UserRecord],
                       lexicon: ProperNounLexicon) -> list[str]:
    """User ids eligible for race/topic analyses, in input order.

    Excludes users older than the youth bound (or younger than 13) and users
    whose display name carries no proper-noun token. The profile-photo rules
    do not remove anyone here; they only gate age/gender fields downstream.
    """
    eligible = []
    for user in users:
        if not _youth_age_ok(user.age_estimate):
            continue
        if not lexicon.has_proper_noun(user.display_name):
            continue
        eligible.append(user.user_id)
    return eligible


@dataclass
class DemographicAnnotation:
    user_id: str
    country: str | None = None
    continent: str | None = None
    race: str = "Inconclusive"
    age: int | None = None
    gender: str | None = None
    eligible_youth: bool = False


def _user_country(tweets: Sequence[TweetRecord], gaz: Gazetteer) -> str | None:
    """Most frequent located country across the user's tweets; ties break to
    the lexicographically smallest ISO code."""
    counts: dict[str, int] = {}
    for t in tweets:
        country = geolocate_country(t, gaz)
        if country is not None:
            counts[country] = counts.get(country, 0) + 1
    if not counts:
        return None
    return min(counts, key=lambda c: (-counts[c], c))


def annotate_users(users: Sequence[UserRecord], tweets: Sequence[TweetRecord],
                   gaz: Gazetteer, model: NameModel,
                   lexicon: ProperNounLexicon) -> dict[str, DemographicAnnotation]:
    """Full demographic annotation for every user record.

    Age/gender carry over only for accounts with a usable single-face profile
    photo; race and country are computed for everyone.
    """
    by_author: dict[str, list[TweetRecord]] = {}
    for t in tweets:
        by_author.setdefault(t.author_id, []).append(t)
    eligible = set(eligibility_filter(users, lexicon))

    annotations: dict[str, DemographicAnnotation] = {}
    for user in users:
        face_ok = user.has_profile_photo and user.face_count == 1
        country = _user_country(by_author.get(user.user_id, ()), gaz)
        annotations[user.user_id] = DemographicAnnotation(
            user_id=user.user_id,
            country=country,
            continent=continent_of(country),
            race=classify_race(user.display_name, model),
            age=user.age_estimate if face_ok else None,
            gender=user.gender_estimate if face_ok else None,
            eligible_youth=user.user_id in eligible,
        )
    return annotations


@dataclass
class DistributionResult:
    buckets: dict[str, tuple[int, float]] = field(default_factory=dict)
    missing: int = 0


DISTRIBUTION_AXES = ("continent", "race", "gender")


def demographic_distribution(annotations: Mapping[str, DemographicAnnotation] | Sequence[DemographicAnnotation],
                             axis: str) -> DistributionResult:
    """Counts and shares per bucket along one axis; shares sum to 1 over the
    non-missing buckets, and missing values are counted separately."""
    if axis not in DISTRIBUTION_AXES:
        raise ValueError(f"unknown axis {axis!r}")
    items = list(annotations.values()) if isinstance(annotations, Mapping) else list(annotations)
    if not items:
        raise ValueError("demographic_distribution needs at least one annotation")
    counts: dict[str, int] = {}
    missing = 0
    for ann in items:
        value = getattr(ann, axis)
        if value is None or value == "unknown":
            missing += 1
        else:
            counts[value] = counts.get(value, 0) + 1
    total = sum(counts.values())
    buckets = {b: (c, c / total) for b, c in sorted(counts.items())}
    return DistributionResult(buckets=buckets, missing=missing)


ANNOTATION_FIELDS = ("user_id", "country", "continent", "race", "age", "gender",
                     "eligible_youth")


def write_annotations(path: str | Path,
                      annotations: Mapping[str, DemographicAnnotation]) -> None:
    """Annotation NDJSON with exactly the documented fields, one user per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for user_id in sorted(annotations):
            ann = annotations[user_id]
            obj = {name: getattr(ann, name) for name in ANNOTATION_FIELDS}
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_annotations(path: str | Path) -> dict[str, DemographicAnnotation]:
    out: dict[str, DemographicAnnotation] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            out[obj["user_id"]] = DemographicAnnotation(**{k: obj.get(k) for k in ANNOTATION_FIELDS})
    return out


def default_data_path(name: str) -> Path:
    return DATA_DIR / name
