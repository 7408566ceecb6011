"""Seeded synthesis of daily consumption profiles and nutrition targets.

Profiles simulate a user's recent intake: 5-10 foods drawn without
replacement from a sampled pool, quantities on a coarse grid, and a calorie
target in the 1500-3500 kcal range.  Everything is a pure function of
(catalog, seed), so runs are reproducible byte for byte.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .catalog import Catalog, FoodRecord, NutrientVector

QUANTITY_GRID = (0.5, 1.0, 1.5, 2.0)
ENTRY_COUNT_RANGE = (5, 10)
CALORIE_RANGE = (1500, 3500)
CALORIE_STEP = 50
DURATION_CHOICES = (7, 14, 30)

# grams of protein / sugar per target kcal, calibrated to the reference
# profile (54.0 g, 58.3 g at ~1573 kcal); kept as data so runs can vary them
PROTEIN_PER_KCAL = 0.03
SUGAR_PER_KCAL = 0.035


class ProfileError(Exception):
    """Base class for profile-generation failures."""


class InsufficientCatalogError(ProfileError):
    def __init__(self, needed: int, available: int):
        super().__init__(f"pool of {needed} requested but only {available} records")
        self.needed = needed
        self.available = available


class EmptyPoolError(ProfileError):
    pass


class UnresolvedFoodError(ProfileError):
    def __init__(self, food_id: str):
        super().__init__(f"profile entry {food_id!r} not present in catalog")
        self.food_id = food_id


@dataclass(frozen=True)
class NutritionTargets:
    total_calories: float
    target_protein: float
    target_sugar: float
    duration_days: int

    def __post_init__(self) -> None:
        for field in ("total_calories", "target_protein", "target_sugar", "duration_days"):
            if getattr(self, field) <= 0:
                raise ValueError(f"{field} must be > 0")

    def as_dict(self) -> dict:
        return {
            "total_calories": self.total_calories,
            "target_protein": self.target_protein,
            "target_sugar": self.target_sugar,
            "duration_days": self.duration_days,
        }


@dataclass(frozen=True)
class ProfileEntry:
    food_id: str
    name: str
    quantity: float


@dataclass(frozen=True)
class ConsumptionProfile:
    profile_id: str
    entries: tuple[ProfileEntry, ...]
    targets: NutritionTargets
    totals: NutrientVector

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("profile must have at least one entry")

    def as_dict(self) -> dict:
        return {
            "profile_id": self.profile_id,
            "entries": [
                {"food_id": e.food_id, "name": e.name, "quantity": e.quantity}
                for e in self.entries
            ],
            "targets": self.targets.as_dict(),
            "totals": self.totals.as_dict(),
        }


def sample_pool(catalog: Catalog, pool_size: int, seed: int) -> tuple[FoodRecord, ...]:
    """Sample ``pool_size`` distinct records; identical seed, identical pool."""
    if pool_size < 1:
        raise ValueError("pool_size must be >= 1")
    records = list(catalog)  # already sorted by id, load-order independent
    if pool_size > len(records):
        raise InsufficientCatalogError(pool_size, len(records))
    rng = random.Random(seed)
    return tuple(rng.sample(records, pool_size))


def _entry_totals(pairs: Sequence[tuple[FoodRecord, float]]) -> NutrientVector:
    total = NutrientVector.zero()
    for record, quantity in pairs:
        total = total + record.per_serving.scaled(quantity)
    return total


def generate_profiles(
    pool: Sequence[FoodRecord], count: int, seed: int
) -> list[ConsumptionProfile]:
    """Generate ``count`` intake profiles with targets, deterministically."""
    if count < 0:
        raise ValueError("count must be >= 0")
    if count == 0:
        return []
    if not pool:
        raise EmptyPoolError("cannot generate profiles from an empty pool")
    rng = random.Random(seed)
    profiles = []
    for index in range(count):
        n_entries = rng.randint(*ENTRY_COUNT_RANGE)
        n_entries = min(n_entries, len(pool))
        chosen = rng.sample(list(pool), n_entries)
        pairs = [(record, rng.choice(QUANTITY_GRID)) for record in chosen]
        calories = round(rng.uniform(*CALORIE_RANGE) / CALORIE_STEP) * CALORIE_STEP
        targets = NutritionTargets(
            total_calories=float(calories),
            target_protein=round(PROTEIN_PER_KCAL * calories, 1),
            target_sugar=round(SUGAR_PER_KCAL * calories, 1),
            duration_days=rng.choice(DURATION_CHOICES),
        )
        profiles.append(
            ConsumptionProfile(
                profile_id=f"input_{index + 1}",
                entries=tuple(
                    ProfileEntry(food_id=r.id, name=r.display_name, quantity=q)
                    for r, q in pairs
                ),
                targets=targets,
                totals=_entry_totals(pairs),
            )
        )
    return profiles


def compute_totals(profile: ConsumptionProfile, catalog: Catalog) -> NutrientVector:
    """Exact weighted sum of per-serving nutrients over the profile entries."""
    pairs = []
    for entry in profile.entries:
        record = catalog.get(entry.food_id)
        if record is None:
            raise UnresolvedFoodError(entry.food_id)
        pairs.append((record, entry.quantity))
    return _entry_totals(pairs)


# -- serialization (the contract between profile and prompt stages) ----------


def profiles_to_json(profiles: Sequence[ConsumptionProfile]) -> str:
    payload = {"profiles": [p.as_dict() for p in profiles]}
    return json.dumps(payload, indent=2) + "\n"


def profiles_from_json(text: str) -> list[ConsumptionProfile]:
    payload = json.loads(text)
    return [_profile_from_dict(item) for item in payload["profiles"]]


def _profile_from_dict(item: Mapping) -> ConsumptionProfile:
    return ConsumptionProfile(
        profile_id=item["profile_id"],
        entries=tuple(
            ProfileEntry(
                food_id=e["food_id"], name=e.get("name", e["food_id"]), quantity=e["quantity"]
            )
            for e in item["entries"]
        ),
        targets=NutritionTargets(**item["targets"]),
        totals=NutrientVector(**item["totals"]),
    )


def save_profiles(profiles: Sequence[ConsumptionProfile], path: str | Path) -> None:
    Path(path).write_text(profiles_to_json(profiles))


def load_profiles(path: str | Path) -> list[ConsumptionProfile]:
    return profiles_from_json(Path(path).read_text())
