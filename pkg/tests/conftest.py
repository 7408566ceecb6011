"""Shared fixtures: FDC-style CSV builders and reference catalogs."""

from __future__ import annotations

import csv
from pathlib import Path

import pytest

from nutribench.catalog import Catalog, load_catalog

# (id, name, kcal, protein, sugar, fat, carb) per 100 g.  The eight entries
# are chosen so the reference intake profile sums to exactly
# (1573.25 kcal, 54.0 g protein, 58.3 g sugar) with eggs benedict at 0.5.
SAMPLE_FOODS = [
    ("1001", "Barbequeue Lays", 160.0, 2.0, 2.0, 10.0, 15.0),
    ("1002", "Garden Pizza", 280.0, 12.0, 4.0, 9.0, 36.0),
    ("1003", "Milano double chocolate", 180.0, 2.0, 11.0, 10.0, 21.0),
    ("1004", "baked cheddar ruffles", 130.0, 2.0, 2.0, 6.0, 18.0),
    ("1005", "beef angus burger patty", 283.0, 19.0, 0.0, 23.0, 0.0),
    ("1006", "chocolate milkshake", 200.0, 8.0, 35.3, 5.0, 34.0),
    ("1007", "eggs benedict", 400.5, 14.0, 4.0, 28.0, 20.0),
    ("1008", "tortilla chips", 140.0, 2.0, 2.0, 7.0, 19.0),
]

NUTRIENT_IDS = {"kcal": 1008, "protein": 1003, "fat": 1004, "carb": 1005, "sugar": 2000}


def write_fdc_csvs(
    directory: Path,
    foods: list[tuple],
    portions: list[tuple[str, float, str]] | None = None,
) -> dict[str, Path]:
    """Write food/food_nutrient (and optionally food_portion) CSV fixtures."""
    food_csv = directory / "food.csv"
    nutrient_csv = directory / "food_nutrient.csv"
    with food_csv.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["fdc_id", "description"])
        for row in foods:
            writer.writerow([row[0], row[1]])
    with nutrient_csv.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["fdc_id", "nutrient_id", "amount"])
        for fdc_id, _, kcal, protein, sugar, fat, carb in foods:
            for nutrient_id, amount in [
                (NUTRIENT_IDS["kcal"], kcal),
                (NUTRIENT_IDS["protein"], protein),
                (NUTRIENT_IDS["sugar"], sugar),
                (NUTRIENT_IDS["fat"], fat),
                (NUTRIENT_IDS["carb"], carb),
            ]:
                if amount is not None:
                    writer.writerow([fdc_id, nutrient_id, amount])
    paths = {"food": food_csv, "nutrients": nutrient_csv}
    if portions is not None:
        portion_csv = directory / "food_portion.csv"
        with portion_csv.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["fdc_id", "gram_weight", "portion_description"])
            for fdc_id, grams, desc in portions:
                writer.writerow([fdc_id, grams, desc])
        paths["portions"] = portion_csv
    return paths


def synthetic_foods(count: int, start_id: int = 5000) -> list[tuple]:
    """Distinctly named filler foods for pool-sampling tests."""
    adjectives = ["roasted", "grilled", "baked", "steamed", "fried", "raw", "smoked"]
    bases = [
        "chicken", "salmon", "lentil", "quinoa", "spinach", "almond", "oat",
        "yogurt", "barley", "pepper", "tomato", "bean", "rice", "apple",
    ]
    foods = []
    for i in range(count):
        adjective = adjectives[i % len(adjectives)]
        base = bases[(i // len(adjectives)) % len(bases)]
        name = f"{adjective} {base} dish {i}"
        kcal = 80.0 + (i % 40) * 10.0
        foods.append(
            (str(start_id + i), name, kcal, 3.0 + i % 7, 1.0 + i % 5, 2.0 + i % 9, 10.0 + i % 20)
        )
    return foods


@pytest.fixture
def sample_catalog(tmp_path: Path) -> Catalog:
    """Catalog holding exactly the eight reference-profile foods."""
    paths = write_fdc_csvs(tmp_path, SAMPLE_FOODS)
    return load_catalog(paths["food"], paths["nutrients"])


@pytest.fixture
def big_catalog(tmp_path: Path) -> Catalog:
    """Catalog large enough for 200-food pool sampling."""
    foods = SAMPLE_FOODS + synthetic_foods(292)
    paths = write_fdc_csvs(tmp_path, foods)
    return load_catalog(paths["food"], paths["nutrients"])
