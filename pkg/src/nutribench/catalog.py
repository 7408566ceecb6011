"""USDA FoodData Central ingestion and food-name resolution.

Builds an immutable nutrient catalog from FDC-style CSV exports (``food``,
``food_nutrient``, optional ``food_portion``) and resolves free-text food
mentions to records via exact normalized lookup or token-set Jaccard
matching.  The Jaccard scoring loop runs on a compiled kernel when the
extension is built, with a pure-Python fallback selected at import.
"""

from __future__ import annotations

import csv
import heapq
import json
import logging
import math
import re
from array import array
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

from ._native import score_many

logger = logging.getLogger(__name__)

# FDC nutrient ids for the five tracked quantities.
NUTRIENT_ENERGY_KCAL = 1008
NUTRIENT_PROTEIN = 1003
NUTRIENT_FAT = 1004
NUTRIENT_CARBOHYDRATE = 1005
NUTRIENT_SUGAR = 2000

# Token-set similarity at or above this confirms a match.
MATCH_THRESHOLD = 0.6

_STOP_TOKENS = frozenset({"a", "an", "the", "with", "of"})
_NON_ALNUM_RE = re.compile(r"[^a-z0-9]+")


class CatalogError(Exception):
    """Base class for catalog ingestion and lookup failures."""


class MissingColumnError(CatalogError):
    def __init__(self, file: str, column: str):
        super().__init__(f"{file}: missing required column {column!r}")
        self.file = file
        self.column = column


class DuplicateIdError(CatalogError):
    def __init__(self, food_id: str):
        super().__init__(f"duplicate food id {food_id!r}")
        self.food_id = food_id


class EmptyCatalogError(CatalogError):
    def __init__(self, message: str = "no usable records after ingestion"):
        super().__init__(message)


class InvalidPortionError(CatalogError):
    def __init__(self, message: str = "portion specifies neither grams nor count"):
        super().__init__(message)


def normalize(name: str) -> str:
    """Normalize a food name for matching.

    Lowercase, map punctuation/underscores to spaces, drop stop tokens, and
    strip any leading ``food`` tokens left over from ``Food_snake_case``
    profile keys.  Idempotent: normalize(normalize(s)) == normalize(s).
    """
    lowered = _NON_ALNUM_RE.sub(" ", name.lower())
    tokens = [t for t in lowered.split() if t not in _STOP_TOKENS]
    while len(tokens) > 1 and tokens[0] == "food":
        tokens.pop(0)
    return " ".join(tokens)


@dataclass(frozen=True)
class NutrientVector:
    """Per-serving quantities of the five tracked nutrients.

    Calories in kcal, the rest in grams.  Components must be finite and
    non-negative; addition and scalar scaling are componentwise.
    """

    calories: float
    protein: float = 0.0
    sugar: float = 0.0
    fat: float = 0.0
    carbohydrate: float = 0.0

    def __post_init__(self) -> None:
        for field in ("calories", "protein", "sugar", "fat", "carbohydrate"):
            value = getattr(self, field)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{field} must be finite and >= 0, got {value!r}")

    def __add__(self, other: "NutrientVector") -> "NutrientVector":
        return NutrientVector(
            calories=self.calories + other.calories,
            protein=self.protein + other.protein,
            sugar=self.sugar + other.sugar,
            fat=self.fat + other.fat,
            carbohydrate=self.carbohydrate + other.carbohydrate,
        )

    def scaled(self, factor: float) -> "NutrientVector":
        return NutrientVector(
            calories=self.calories * factor,
            protein=self.protein * factor,
            sugar=self.sugar * factor,
            fat=self.fat * factor,
            carbohydrate=self.carbohydrate * factor,
        )

    def as_dict(self) -> dict[str, float]:
        return {
            "calories": self.calories,
            "protein": self.protein,
            "sugar": self.sugar,
            "fat": self.fat,
            "carbohydrate": self.carbohydrate,
        }

    @classmethod
    def zero(cls) -> "NutrientVector":
        return cls(calories=0.0)


@dataclass(frozen=True)
class FoodRecord:
    """One catalog entry with nutrients per labeled serving."""

    id: str
    display_name: str
    normalized_tokens: frozenset[str]
    serving_desc: str
    serving_grams: float
    per_serving: NutrientVector
    incomplete: bool = False  # some macro fields defaulted to 0 at ingest

    def __post_init__(self) -> None:
        if not self.normalized_tokens:
            raise ValueError(f"record {self.id!r} has no usable name tokens")
        if self.serving_grams <= 0:
            raise ValueError(f"record {self.id!r} has serving_grams <= 0")


@dataclass(frozen=True)
class MatchResult:
    """Outcome of resolving a free-text food mention against the catalog."""

    query: str
    matched_id: str | None
    score: float
    method: str  # "exact" | "token_set" | "none"


class PortionLike:
    """Duck contract for scale_nutrients: has .grams and .count attributes."""

    grams: float | None
    count: float | None


def scale_nutrients(record: FoodRecord, portion: "PortionLike") -> NutrientVector:
    """Scale a record's per-serving nutrients by a parsed portion.

    Grams take precedence (scaled against the labeled serving weight);
    otherwise the portion count multiplies the serving directly.
    """
    grams = getattr(portion, "grams", None)
    count = getattr(portion, "count", None)
    if grams is not None and grams > 0:
        return record.per_serving.scaled(grams / record.serving_grams)
    if count is not None and count > 0:
        return record.per_serving.scaled(count)
    raise InvalidPortionError()


class Catalog:
    """Immutable food catalog; safe for unlimited concurrent readers."""

    def __init__(self, records: list[FoodRecord], dropped: int = 0):
        if not records:
            raise EmptyCatalogError()
        self._records: tuple[FoodRecord, ...] = tuple(
            sorted(records, key=lambda r: r.id)
        )
        self._dropped = dropped
        self._by_id: dict[str, FoodRecord] = {}
        for rec in self._records:
            if rec.id in self._by_id:
                raise DuplicateIdError(rec.id)
            self._by_id[rec.id] = rec
        # exact-lookup index; on normalized-name collisions the smallest id wins
        self._by_norm: dict[str, FoodRecord] = {}
        self._norm_names: list[str] = []
        for rec in self._records:
            norm = normalize(rec.display_name)
            self._norm_names.append(norm)
            self._by_norm.setdefault(norm, rec)
        self._build_token_index()

    def _build_token_index(self) -> None:
        vocab: dict[str, int] = {}
        for rec in self._records:
            for tok in sorted(rec.normalized_tokens):
                if tok not in vocab:
                    vocab[tok] = len(vocab)
        indptr = array("i", [0])
        token_ids = array("i")
        for rec in self._records:
            ids = sorted(vocab[t] for t in rec.normalized_tokens)
            token_ids.extend(ids)
            indptr.append(len(token_ids))
        self._vocab = vocab
        self._indptr = indptr
        self._token_ids = token_ids

    # -- queries ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[FoodRecord]:
        return iter(self._records)

    @property
    def dropped(self) -> int:
        """Rows discarded at ingest (no energy value or unusable fields)."""
        return self._dropped

    def get(self, food_id: str) -> FoodRecord | None:
        return self._by_id.get(food_id)

    def lookup_exact(self, name: str) -> FoodRecord | None:
        """Record whose normalized display name equals normalize(name)."""
        return self._by_norm.get(normalize(name))

    def match_fuzzy(self, name: str, k: int = 5) -> list[MatchResult]:
        """Top-k token-set Jaccard matches, best first.

        Ties break on lexicographic display name.  Results scoring below
        MATCH_THRESHOLD are returned with matched_id=None.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        query_norm = normalize(name)
        query_tokens = set(query_norm.split())
        known = sorted(self._vocab[t] for t in query_tokens if t in self._vocab)
        n_unknown = len(query_tokens) - len(known)
        scores = array("d", bytes(8 * len(self._records)))
        score_many(array("i", known), n_unknown, self._indptr, self._token_ids, scores)
        top = heapq.nsmallest(
            k,
            range(len(self._records)),
            key=lambda i: (-scores[i], self._records[i].display_name),
        )
        results = []
        for i in top:
            rec = self._records[i]
            score = scores[i]
            if score >= MATCH_THRESHOLD:
                method = "exact" if self._norm_names[i] == query_norm else "token_set"
                matched: str | None = rec.id
            else:
                method = "none"
                matched = None
            results.append(
                MatchResult(query=name, matched_id=matched, score=score, method=method)
            )
        return results

    # -- cache round-trip ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "dropped": self._dropped,
            "records": [
                {
                    "id": rec.id,
                    "display_name": rec.display_name,
                    "serving_desc": rec.serving_desc,
                    "serving_grams": rec.serving_grams,
                    "per_serving": rec.per_serving.as_dict(),
                    "incomplete": rec.incomplete,
                }
                for rec in self._records
            ],
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> "Catalog":
        records = [
            FoodRecord(
                id=row["id"],
                display_name=row["display_name"],
                normalized_tokens=frozenset(normalize(row["display_name"]).split()),
                serving_desc=row["serving_desc"],
                serving_grams=row["serving_grams"],
                per_serving=NutrientVector(**row["per_serving"]),
                incomplete=row.get("incomplete", False),
            )
            for row in payload["records"]
        ]
        return cls(records, dropped=payload.get("dropped", 0))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Catalog":
        return cls.from_json(json.loads(Path(path).read_text()))


def _read_rows(path: str | Path, required: list[str]) -> Iterator[dict]:
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise MissingColumnError(str(path), column)
        yield from reader


def _parse_amount(raw: str | None) -> float | None:
    if raw is None or raw.strip() == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        return None
    if not math.isfinite(value):
        return None
    return value


def load_catalog(
    food_table: str | Path,
    nutrient_table: str | Path,
    portion_table: str | Path | None = None,
) -> Catalog:
    """Ingest FDC-style CSV exports into an immutable catalog.

    ``food`` needs fdc_id/description, ``food_nutrient`` needs
    fdc_id/nutrient_id/amount (interpreted per 100 g), and the optional
    ``food_portion`` table (fdc_id/gram_weight/portion_description) supplies
    a labeled serving; otherwise the serving is the 100 g reference.
    Records without an energy value are dropped and counted; missing macro
    amounts default to 0 and set the record's ``incomplete`` flag.
    """
    names: dict[str, str] = {}
    for row in _read_rows(food_table, ["fdc_id", "description"]):
        fdc_id = row["fdc_id"].strip()
        if not fdc_id:
            continue
        if fdc_id in names:
            raise DuplicateIdError(fdc_id)
        names[fdc_id] = row["description"].strip()

    nutrients: dict[str, dict[int, float]] = {}
    for row in _read_rows(nutrient_table, ["fdc_id", "nutrient_id", "amount"]):
        fdc_id = row["fdc_id"].strip()
        if fdc_id not in names:
            continue
        try:
            nutrient_id = int(row["nutrient_id"])
        except ValueError:
            continue
        amount = _parse_amount(row.get("amount"))
        if amount is None:
            continue
        nutrients.setdefault(fdc_id, {})[nutrient_id] = amount

    portions: dict[str, tuple[float, str]] = {}
    if portion_table is not None:
        for row in _read_rows(portion_table, ["fdc_id", "gram_weight"]):
            fdc_id = row["fdc_id"].strip()
            if fdc_id in portions:
                continue  # first labeled portion wins
            grams = _parse_amount(row.get("gram_weight"))
            if grams is None or grams <= 0:
                continue
            desc = (row.get("portion_description") or "").strip() or f"{grams:g} g"
            portions[fdc_id] = (grams, desc)

    records: list[FoodRecord] = []
    dropped = 0
    for fdc_id, description in names.items():
        values = nutrients.get(fdc_id, {})
        kcal_per_100g = values.get(NUTRIENT_ENERGY_KCAL)
        tokens = frozenset(normalize(description).split())
        if kcal_per_100g is None or kcal_per_100g < 0 or not tokens:
            dropped += 1
            continue
        macros = {
            "protein": values.get(NUTRIENT_PROTEIN),
            "fat": values.get(NUTRIENT_FAT),
            "carbohydrate": values.get(NUTRIENT_CARBOHYDRATE),
            "sugar": values.get(NUTRIENT_SUGAR),
        }
        incomplete = any(v is None for v in macros.values())
        if any(v is not None and v < 0 for v in macros.values()):
            dropped += 1
            continue
        serving_grams, serving_desc = portions.get(fdc_id, (100.0, "100 g"))
        scale = serving_grams / 100.0
        per_serving = NutrientVector(
            calories=kcal_per_100g * scale,
            protein=(macros["protein"] or 0.0) * scale,
            sugar=(macros["sugar"] or 0.0) * scale,
            fat=(macros["fat"] or 0.0) * scale,
            carbohydrate=(macros["carbohydrate"] or 0.0) * scale,
        )
        records.append(
            FoodRecord(
                id=fdc_id,
                display_name=description,
                normalized_tokens=tokens,
                serving_desc=serving_desc,
                serving_grams=serving_grams,
                per_serving=per_serving,
                incomplete=incomplete,
            )
        )

    if not records:
        raise EmptyCatalogError()
    if dropped:
        logger.info("dropped %d records without usable energy values", dropped)
    return Catalog(records, dropped=dropped)
