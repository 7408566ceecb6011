"""Tolerant parsing of free-text meal-plan responses.

Model output is messy: markdown decoration, missing headers, partial totals.
``parse_plans`` never raises; everything it cannot read becomes a warning and
zero plans is a legitimate result.  The module also owns the canonical plan
serialization (used for few-shot examples and stub fixtures) and structural
completeness grading.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

MEAL_NAMES = ("breakfast", "lunch", "dinner", "snacks")
MAX_PLANS = 10          # hard cap; parsing beyond this is discarded
EXPECTED_PLANS = 3      # more than this is kept but flagged
IMPLAUSIBLE_MEAL_KCAL = 10_000.0

DISCLAIMER_PHRASES = ("may vary", "approximate", "differ slightly")

_NUM = r"(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?"

_MD_PREFIX_RE = re.compile(r"^[\s>#*\-•]+|^\s*\d+[.)]\s+")
_MD_MARKS_RE = re.compile(r"[*_`]{1,3}")
_PLAN_HEADER_RE = re.compile(r"^(?:meal\s*plan|option)\s*#?\s*([0-9]+)", re.IGNORECASE)
_MEAL_HEADER_RE = re.compile(
    r"^(breakfast|lunch|dinner|snacks?)\b\s*[:\-–—]?\s*(.*)$", re.IGNORECASE
)
_KCAL_VALUE_RE = re.compile(rf"({_NUM})\s*(?:kcal|calories|cal)\b", re.IGNORECASE)
_PURE_HEADER_TAIL_RE = re.compile(
    rf"^(?:\(?\s*(?:approx(?:imately)?\.?|about|around|roughly|~|≈)?\s*"
    rf"{_NUM}\s*(?:kcal|calories|cal)\.?\s*\)?)?\s*[.:]?\s*$",
    re.IGNORECASE,
)
_TOTALS_LINE_RE = re.compile(r"^(?:daily\s+|grand\s+)?totals?\b", re.IGNORECASE)
_BULLET_RE = re.compile(r"^\s*[-*•]\s+")
_ENUM_RE = re.compile(r"^\s*\d+[.)]\s+")
_RECIPE_RE = re.compile(r"^recipe\s*[:\-]\s*(.+)$", re.IGNORECASE)
_KCAL_TAIL_RE = re.compile(
    rf"[\s—–\-:,(]*[~≈]?\s*({_NUM})\s*(?:kcal|calories|cal)\b\.?\)?\s*$", re.IGNORECASE
)
_PAREN_TAIL_RE = re.compile(r"^(.*?)\s*\(([^()]*)\)\s*$")
_COUNT_RE = re.compile(r"^\s*(\d+\s*/\s*\d+|\d+(?:\.\d+)?)(?=\s|$)")
_GRAMS_RE = re.compile(r"(\d+(?:\.\d+)?)\s*g(?:rams?)?\b", re.IGNORECASE)

_TOTAL_FIELD_RES = {
    "calories": re.compile(
        rf"(?:total(?:\s+calories)?|calories)\s*[:=]?\s*({_NUM})(?:\s*(?:kcal|calories|cal)\b)?",
        re.IGNORECASE,
    ),
    "fat": re.compile(rf"(?:total\s+)?fats?\s*[:=]?\s*({_NUM})", re.IGNORECASE),
    "protein": re.compile(rf"(?:total\s+)?protein\s*[:=]?\s*({_NUM})", re.IGNORECASE),
    "carbohydrate": re.compile(
        rf"(?:total\s+)?carb(?:ohydrate)?s?\s*[:=]?\s*({_NUM})", re.IGNORECASE
    ),
    "sugar": re.compile(rf"(?:total\s+)?sugars?\s*[:=]?\s*({_NUM})", re.IGNORECASE),
}
_MACRO_ONLY_RE = re.compile(
    rf"^(?:total\s+)?(calories|fats?|protein|carb(?:ohydrate)?s?|sugars?)\s*[:=]\s*({_NUM})",
    re.IGNORECASE,
)


def _to_float(raw: str) -> float:
    return float(raw.replace(",", ""))


@dataclass(frozen=True)
class ParseWarning:
    code: str
    message: str

    def __str__(self) -> str:  # readable in pytest diffs
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class PortionSpec:
    """Parsed portion; raw text is always preserved for audit."""

    raw: str
    grams: float | None = None
    count: float | None = None

    @property
    def is_parsed(self) -> bool:
        return self.grams is not None or self.count is not None


@dataclass
class MealItem:
    name: str
    portion: PortionSpec
    reported_kcal: float | None = None
    recipe: str | None = None


@dataclass
class MealSection:
    items: list[MealItem] = field(default_factory=list)
    reported_kcal: float | None = None

    @property
    def is_empty(self) -> bool:
        return not self.items and self.reported_kcal is None


@dataclass
class MealPlan:
    option_index: int
    meals: dict[str, MealSection] = field(
        default_factory=lambda: {name: MealSection() for name in MEAL_NAMES}
    )
    reported_totals: dict[str, float] = field(default_factory=dict)
    disclaimer_present: bool = False

    def all_items(self) -> list[MealItem]:
        return [item for name in MEAL_NAMES for item in self.meals[name].items]


@dataclass(frozen=True)
class CompletenessFlags:
    plans_found: int
    has_three_options: bool
    all_meals_present: bool
    per_meal_kcal_present: bool
    macros_present: bool
    recipes_present: bool
    disclaimer_present: bool

    def __post_init__(self) -> None:
        if self.has_three_options != (self.plans_found == 3):
            raise ValueError("has_three_options must mirror plans_found == 3")

    def as_dict(self) -> dict:
        return {
            "plans_found": self.plans_found,
            "has_three_options": self.has_three_options,
            "all_meals_present": self.all_meals_present,
            "per_meal_kcal_present": self.per_meal_kcal_present,
            "macros_present": self.macros_present,
            "recipes_present": self.recipes_present,
            "disclaimer_present": self.disclaimer_present,
        }


def extract_portion(text: str) -> PortionSpec:
    """Pull a count and/or gram weight out of portion-ish text.

    Recognizes leading counts ("2 pancakes", "1/2 cup") and gram annotations
    ("45g", "45 g") anywhere in the string.  Unrecognized text yields a
    raw-only spec; the caller decides whether that warrants a warning.
    """
    raw = text.strip()
    grams: float | None = None
    grams_match = _GRAMS_RE.search(raw)
    if grams_match and float(grams_match.group(1)) > 0:
        grams = float(grams_match.group(1))
    count: float | None = None
    match = _COUNT_RE.match(raw)
    if match and not (grams_match and grams_match.start(1) == match.start(1)):
        token = match.group(1)
        if "/" in token:
            numerator, denominator = token.split("/")
            if float(denominator) != 0:
                count = float(numerator) / float(denominator)
        else:
            count = float(token)
    if count is not None and count <= 0:
        count = None
    return PortionSpec(raw=raw, grams=grams, count=count)


def _strip_markdown(line: str) -> str:
    cleaned = _MD_MARKS_RE.sub("", line)
    previous = None
    while previous != cleaned:
        previous = cleaned
        cleaned = _MD_PREFIX_RE.sub("", cleaned)
    return cleaned.strip()


class _Parser:
    def __init__(self) -> None:
        self.plans: list[MealPlan] = []
        self.warnings: list[ParseWarning] = []
        self.current: MealPlan | None = None
        self.current_meal: str | None = None
        self.last_item: MealItem | None = None
        self.in_totals = False
        self.capped = False
        self.plan_lines: list[str] = []

    def warn(self, code: str, message: str) -> None:
        self.warnings.append(ParseWarning(code, message))

    # -- plan lifecycle -------------------------------------------------------

    def close_plan(self) -> None:
        if self.current is not None:
            text = "\n".join(self.plan_lines).lower()
            self.current.disclaimer_present = any(p in text for p in DISCLAIMER_PHRASES)
        self.current = None
        self.current_meal = None
        self.last_item = None
        self.in_totals = False
        self.plan_lines = []

    def start_plan(self, option_index: int, recovered: bool = False) -> None:
        self.close_plan()
        if len(self.plans) >= MAX_PLANS:
            if not self.capped:
                self.warn("PlanCapExceeded", f"ignoring plans beyond the first {MAX_PLANS}")
            self.capped = True
            return
        plan = MealPlan(option_index=option_index)
        self.plans.append(plan)
        self.current = plan
        if recovered:
            self.warn(
                "RecoveredHeader",
                f"plan {option_index} had no header and was recovered from a Breakfast line",
            )
        if len(self.plans) == EXPECTED_PLANS + 1:
            self.warn("TooManyPlans", f"more than {EXPECTED_PLANS} plans found")

    # -- line handlers ----------------------------------------------------------

    def handle_meal_header(self, meal_key: str, stripped: str) -> None:
        if self.current is None:
            if meal_key == "breakfast":
                self.start_plan(len(self.plans) + 1, recovered=True)
            else:
                self.warn("UnlabeledMeal", f"meal header {meal_key!r} outside any plan")
                return
        elif meal_key == "breakfast" and not self.current.meals["breakfast"].is_empty:
            # a fresh Breakfast inside a populated plan means the model
            # skipped the next option header
            self.start_plan(self.current.option_index + 1, recovered=True)
        if self.current is None:  # plan cap reached
            return
        section = self.current.meals[meal_key]
        kcal_match = _KCAL_VALUE_RE.search(stripped)
        if kcal_match:
            value = _to_float(kcal_match.group(1))
            if value > IMPLAUSIBLE_MEAL_KCAL:
                self.warn(
                    "ImplausibleMealKcal", f"{meal_key} reports {value:g} kcal (kept as-is)"
                )
            section.reported_kcal = value
        self.current_meal = meal_key
        self.last_item = None
        self.in_totals = False

    def handle_totals(self, stripped: str) -> None:
        if self.current is None:
            return
        for fieldname, pattern in _TOTAL_FIELD_RES.items():
            match = pattern.search(stripped)
            if match:
                self.current.reported_totals[fieldname] = _to_float(match.group(1))
        self.in_totals = True
        self.last_item = None

    def handle_item(self, text: str) -> None:
        if self.current is None:
            return  # bullet in the preamble, not plan content
        if self.current_meal is None:
            self.warn("UnlabeledMeal", f"item {text[:40]!r} appears before any meal header")
            return
        text = _MD_MARKS_RE.sub("", text).strip()
        kcal: float | None = None
        tail = _KCAL_TAIL_RE.search(text)
        body = text
        if tail:
            kcal = _to_float(tail.group(1))
            body = text[: tail.start()].rstrip()
        name = body
        portion = PortionSpec(raw="")
        paren = _PAREN_TAIL_RE.match(body)
        if paren and paren.group(2).strip():
            name = paren.group(1).strip()
            portion = extract_portion(paren.group(2))
        count_match = _COUNT_RE.match(name)
        if count_match and portion.count is None:
            leading = extract_portion(name)
            if leading.count is not None:
                portion = PortionSpec(
                    raw=portion.raw or name, grams=portion.grams, count=leading.count
                )
                name = name[count_match.end():].strip()
        if not name:
            self.warn("UnnamedItem", f"discarded item line {text[:40]!r}")
            return
        if not portion.is_parsed:
            self.warn("UnparsedPortion", f"no portion recognized for {name!r}")
        if kcal is None:
            self.warn("ItemMissingKcal", f"item {name!r} has no calorie value")
        item = MealItem(name=name, portion=portion, reported_kcal=kcal)
        self.current.meals[self.current_meal].items.append(item)
        self.last_item = item
        self.in_totals = False

    def handle_recipe(self, text: str) -> None:
        if self.last_item is not None and self.last_item.recipe is None:
            self.last_item.recipe = text.strip()

    # -- main loop ---------------------------------------------------------------

    def feed(self, line: str) -> None:
        if self.current is not None:
            self.plan_lines.append(line)
        stripped = _strip_markdown(line)
        if not stripped:
            return
        plan_match = _PLAN_HEADER_RE.match(stripped)
        if plan_match:
            self.start_plan(int(plan_match.group(1)))
            return
        if self.current is None and self.capped:
            return
        recipe_match = _RECIPE_RE.match(stripped)
        if recipe_match:
            self.handle_recipe(recipe_match.group(1))
            return
        bullet = _BULLET_RE.match(line)
        meal_match = _MEAL_HEADER_RE.match(stripped)
        if meal_match:
            # bullets carrying more than a kcal note are items, not headers
            # ("- Dinner roll (1 piece) — 90 kcal" must not open Dinner)
            if not bullet or _PURE_HEADER_TAIL_RE.match(meal_match.group(2)):
                key = meal_match.group(1).lower()
                key = "snacks" if key.startswith("snack") else key
                self.handle_meal_header(key, stripped)
                return
        if _TOTALS_LINE_RE.match(stripped):
            self.handle_totals(stripped)
            return
        if self.in_totals and _MACRO_ONLY_RE.match(stripped):
            self.handle_totals(stripped)
            return
        if bullet:
            self.handle_item(line[bullet.end():].strip())
            return
        enum = _ENUM_RE.match(line)
        if enum and self.current is not None and self.current_meal is not None:
            self.handle_item(line[enum.end():].strip())

    def finish(self) -> tuple[list[MealPlan], list[ParseWarning]]:
        self.close_plan()
        for plan in self.plans:
            missing = [
                key for key in ("fat", "protein", "carbohydrate")
                if key not in plan.reported_totals
            ]
            if missing:
                self.warn(
                    "MissingMacroTotals",
                    f"plan {plan.option_index} totals lack {', '.join(missing)}",
                )
            for meal_name in MEAL_NAMES:
                section = plan.meals[meal_name]
                if section.items and section.reported_kcal is None:
                    self.warn(
                        "MissingMealKcal",
                        f"plan {plan.option_index} {meal_name} has no calorie line",
                    )
        if not self.plans:
            self.warn("NoPlansFound", "no meal plan structure recognized")
        return self.plans, self.warnings


def parse_plans(raw: str) -> tuple[list[MealPlan], list[ParseWarning]]:
    """Parse arbitrary response text into structured meal plans.

    Never raises; all irregularities are reported as warnings and zero plans
    is a valid outcome (a failed generation).
    """
    parser = _Parser()
    for line in (raw or "").splitlines():
        parser.feed(line)
    return parser.finish()


def grade_completeness(
    plans: list[MealPlan], warnings: list[ParseWarning], raw: str
) -> CompletenessFlags:
    """Structural grading of one response, per the flag definitions."""
    plans_found = len(plans)
    if plans_found == 0:
        return CompletenessFlags(
            plans_found=0,
            has_three_options=False,
            all_meals_present=False,
            per_meal_kcal_present=False,
            macros_present=False,
            recipes_present=False,
            disclaimer_present=False,
        )
    all_meals = all(
        not plan.meals[name].is_empty for plan in plans for name in MEAL_NAMES
    )
    nonempty = [
        section for plan in plans for section in plan.meals.values() if not section.is_empty
    ]
    per_meal_kcal = bool(nonempty) and all(
        section.reported_kcal is not None for section in nonempty
    )
    macros = all(
        all(key in plan.reported_totals for key in ("fat", "protein", "carbohydrate"))
        for plan in plans
    )
    items = [item for plan in plans for item in plan.all_items()]
    recipes = bool(items) and all(item.recipe for item in items)
    lowered = (raw or "").lower()
    disclaimer = any(phrase in lowered for phrase in DISCLAIMER_PHRASES)
    return CompletenessFlags(
        plans_found=plans_found,
        has_three_options=plans_found == 3,
        all_meals_present=all_meals,
        per_meal_kcal_present=per_meal_kcal,
        macros_present=macros,
        recipes_present=recipes,
        disclaimer_present=disclaimer,
    )


# -- canonical serialization ----------------------------------------------------


def _fmt_num(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return str(value)


_TOTALS_LABELS = (
    ("calories", "Total", "kcal"),
    ("fat", "Fat", "g"),
    ("protein", "Protein", "g"),
    ("carbohydrate", "Carbohydrate", "g"),
    ("sugar", "Sugar", "g"),
)


def render_plan(plan: MealPlan) -> str:
    """Serialize one plan in the canonical sectioned format.

    This is the few-shot example format; parsing the output of render_plan
    reproduces the plan (complete plans round-trip with zero warnings).
    """
    lines = [f"Meal Plan {plan.option_index}:"]
    for meal_name in MEAL_NAMES:
        section = plan.meals[meal_name]
        if section.is_empty:
            continue
        header = meal_name.capitalize()
        if section.reported_kcal is not None:
            lines.append(f"{header}: {_fmt_num(section.reported_kcal)} kcal")
        else:
            lines.append(f"{header}:")
        for item in section.items:
            piece = f"- {item.name}"
            if item.portion.raw:
                piece += f" ({item.portion.raw})"
            if item.reported_kcal is not None:
                piece += f" — {_fmt_num(item.reported_kcal)} kcal"
            lines.append(piece)
            if item.recipe:
                lines.append(f"  Recipe: {item.recipe}")
    totals_parts = [
        f"{label}: {_fmt_num(plan.reported_totals[key])} {unit}"
        for key, label, unit in _TOTALS_LABELS
        if key in plan.reported_totals
    ]
    if totals_parts:
        lines.append(", ".join(totals_parts))
    return "\n".join(lines)


def render_plans(plans: list[MealPlan], disclaimer: str | None = None) -> str:
    blocks = [render_plan(plan) for plan in plans]
    text = "\n\n".join(blocks)
    if disclaimer:
        text += "\n\n" + disclaimer
    return text + "\n"
