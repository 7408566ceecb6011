"""Structured prompt assembly: intake profile, task, examples, output contract.

A prompt is kept structured until the last moment so section order is
guaranteed by construction: intake header, task instructions, optional
worked examples, output-format contract, optional inlined reference
nutrition.  Templates are plain text with ``{placeholder}`` slots and a
``===`` line separating the task section from the output section.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from .catalog import Catalog
from .profiles import ConsumptionProfile

EXAMPLE_FENCE = "--- EXAMPLE ---"
ALLOWED_PLACEHOLDERS = frozenset(
    {"total_calories", "target_protein", "target_sugar", "menu_input"}
)

# phrase anchors for the instructions every prompt must carry
MANDATORY_CLAUSES = {
    "three_options": "three different meal plan options",
    "meal_coverage": "breakfast, lunch, dinner, and snacks",
    "per_meal_kcal": "calorie count for each meal",
    "plan_totals": "total calories, total fat, total protein, and total carbohydrate",
    "portion_sizes": "portion sizes",
    "recipes": "short recipe",
    "familiar_dishes": "familiar dishes",
    "menu_input": "available items",
}

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


class PromptError(Exception):
    """Base class for prompt construction failures."""


class UnboundPlaceholderError(PromptError):
    def __init__(self, name: str):
        super().__init__(f"template references unsupported placeholder {{{name}}}")
        self.name = name


class MissingClauseError(PromptError):
    def __init__(self, clause: str):
        super().__init__(f"rendered prompt is missing the mandatory clause {clause!r}")
        self.clause = clause


class MalformedExampleError(PromptError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"few-shot example {index} does not parse cleanly: {reason}")
        self.index = index


@dataclass(frozen=True)
class PromptTemplate:
    """Task text and output-format text, each with {placeholder} slots."""

    task_text: str
    output_text: str

    @classmethod
    def from_text(cls, text: str) -> "PromptTemplate":
        lines = text.splitlines()
        if "===" in lines:
            cut = lines.index("===")
            task = "\n".join(lines[:cut]).strip("\n")
            output = "\n".join(lines[cut + 1:]).strip("\n")
        else:
            task, output = text.strip("\n"), ""
        return cls(task_text=task, output_text=output)

    @classmethod
    def from_file(cls, path: str | Path) -> "PromptTemplate":
        return cls.from_text(Path(path).read_text())

    @classmethod
    def default(cls) -> "PromptTemplate":
        text = (
            resources.files("nutribench").joinpath("data/default_template.txt").read_text()
        )
        return cls.from_text(text)


@dataclass(frozen=True)
class PromptText:
    """A rendered prompt, kept sectioned until serialization."""

    i_current: str
    t_task: str
    o_output: str
    few_shot: tuple[str, ...] = ()
    reference: str = ""
    menu_input: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        parts = [self.i_current, self.t_task]
        for example in self.few_shot:
            parts.append(f"{EXAMPLE_FENCE}\n{example.strip()}\n{EXAMPLE_FENCE}")
        if self.o_output:
            parts.append(self.o_output)
        if self.reference:
            parts.append(self.reference)
        return "\n\n".join(part for part in parts if part) + "\n"

    def __str__(self) -> str:
        return self.text


def _fmt_quantity(value: float) -> str:
    return str(int(value)) if value == int(value) else str(value)


def _substitute(text: str, context: dict[str, str]) -> str:
    for name in _PLACEHOLDER_RE.findall(text):
        if name not in ALLOWED_PLACEHOLDERS:
            raise UnboundPlaceholderError(name)

    def repl(match: re.Match) -> str:
        return context[match.group(1)]

    return _PLACEHOLDER_RE.sub(repl, text)


def render_prompt(profile: ConsumptionProfile, template: PromptTemplate) -> PromptText:
    """Render the structured prompt for one profile.

    Targets are embedded verbatim (str of the stored floats) and the
    mandatory task clauses are verified on the substituted text.
    """
    menu = tuple(entry.name for entry in profile.entries)
    if not menu:
        raise MissingClauseError("menu_input")
    intake_lines = ["User's recent intake:"]
    for entry in profile.entries:
        intake_lines.append(f"- {entry.name} x {_fmt_quantity(entry.quantity)}")
    intake_lines.append(f"Plan duration: {profile.targets.duration_days} days.")
    i_current = "\n".join(intake_lines)

    context = {
        "total_calories": str(profile.targets.total_calories),
        "target_protein": str(profile.targets.target_protein),
        "target_sugar": str(profile.targets.target_sugar),
        "menu_input": ", ".join(menu),
    }
    t_task = _substitute(template.task_text, context)
    o_output = _substitute(template.output_text, context)

    rendered = "\n\n".join(filter(None, [i_current, t_task, o_output])).lower()
    for clause, phrase in MANDATORY_CLAUSES.items():
        if phrase not in rendered:
            raise MissingClauseError(clause)
    if _PLACEHOLDER_RE.search(rendered):
        leftover = _PLACEHOLDER_RE.search(rendered).group(1)  # type: ignore[union-attr]
        raise UnboundPlaceholderError(leftover)
    return PromptText(
        i_current=i_current, t_task=t_task, o_output=o_output, menu_input=menu
    )


def attach_few_shot(prompt: PromptText, examples: list[str]) -> PromptText:
    """Insert worked example plans between the task and output sections.

    Each example must itself parse cleanly as a meal plan; it is there to
    exemplify the output grammar.
    """
    from .parsing import parse_plans

    if not examples:
        return prompt
    for index, example in enumerate(examples):
        plans, warnings = parse_plans(example)
        if not plans:
            raise MalformedExampleError(index, "no plan recognized")
        if warnings:
            raise MalformedExampleError(index, str(warnings[0]))
    return replace(prompt, few_shot=prompt.few_shot + tuple(examples))


def default_few_shot_examples() -> list[str]:
    data = resources.files("nutribench").joinpath("data/few_shot")
    return [
        data.joinpath(name).read_text()
        for name in ("example_1.txt", "example_2.txt")
    ]


def _fmt_amount(value: float) -> str:
    return str(int(value)) if value == int(value) else f"{value:g}"


def augment_with_retrieval(
    prompt: PromptText, profile: ConsumptionProfile, catalog: Catalog
) -> PromptText:
    """Inline per-serving catalog values for every menu item.

    Items that cannot be resolved degrade to an UNVERIFIED ITEMS list.
    Reapplying replaces the previous reference section, so the operation is
    idempotent in effect.
    """
    reference_lines = ["REFERENCE NUTRITION (USDA)"]
    unverified = []
    for entry in profile.entries:
        record = catalog.get(entry.food_id) or catalog.lookup_exact(entry.name)
        if record is None:
            unverified.append(f"- {entry.name}")
            continue
        per = record.per_serving
        reference_lines.append(
            f"- {entry.name}: {_fmt_amount(per.calories)} kcal, "
            f"{_fmt_amount(per.protein)} g protein, "
            f"{_fmt_amount(per.sugar)} g sugar (per serving of {record.serving_desc})"
        )
    if unverified:
        reference_lines.append("UNVERIFIED ITEMS")
        reference_lines.extend(unverified)
    return replace(prompt, reference="\n".join(reference_lines))
