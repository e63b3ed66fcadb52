"""Exploratory statistics over translated pairs.

For each English reference form we tally how often its translations were
tagged masculine versus feminine.  Tallies run over every translated pair,
not just exported ones; the group argument selects the flagged (divergent)
or unflagged (agreeing) population by risk label.  Neuter and unknown tags
never tally.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from enum import Enum
from pathlib import Path
from typing import Iterable

from .records import ExampleRecord, FormRatio, Gender, Risk, Side


class RatioGroup(str, Enum):
    POSITIVE = "POSITIVE"
    NEGATIVE = "NEGATIVE"


_GROUP_RISK = {RatioGroup.POSITIVE: Risk.AT_RISK, RatioGroup.NEGATIVE: Risk.NOT_AT_RISK}


def compute_ratios(
    records: Iterable[ExampleRecord],
    group: RatioGroup,
    language: str | None = None,
) -> list[FormRatio]:
    """One FormRatio per (form, language), sorted by total descending.

    Ties are broken by language then form so output order is deterministic.
    """
    wanted = _GROUP_RISK[group]
    counts: dict[tuple[str, str], list[int]] = defaultdict(lambda: [0, 0])
    for record in records:
        for lang, label in record.risk.items():
            if language is not None and lang != language:
                continue
            if label.value is not wanted:
                continue
            sides = record.outcomes.get(lang, {})
            for side, form in (
                (Side.ORIGINAL, record.original_surface),
                (Side.SUBSTITUTED, record.substitute_surface),
            ):
                outcome = sides.get(side)
                if outcome is None or outcome.gender is None:
                    continue
                if outcome.gender.value is Gender.MASCULINE:
                    counts[(form, lang)][0] += 1
                elif outcome.gender.value is Gender.FEMININE:
                    counts[(form, lang)][1] += 1
    ratios = [
        FormRatio(form, lang, m, f) for (form, lang), (m, f) in counts.items()
    ]
    ratios.sort(key=lambda r: (-r.total, r.language, r.form))
    return ratios


def top_forms(
    ratios: list[FormRatio], k: int = 5, language: str | None = None
) -> list[FormRatio]:
    if language is None:
        return ratios[:k]
    return [r for r in ratios if r.language == language][:k]


def write_ratios_tsv(ratios: list[FormRatio], path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(["form", "language", "masculine", "feminine", "ratio"])
        for ratio in ratios:
            writer.writerow(
                [
                    ratio.form,
                    ratio.language,
                    ratio.masculine_count,
                    ratio.feminine_count,
                    ratio.ratio_display,
                ]
            )


def render_figures(
    positives: list[FormRatio],
    negatives: list[FormRatio],
    out_dir: Path,
    top_k: int = 5,
) -> list[Path]:
    """One PNG per language: top-k forms for each group as paired bars."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    languages = sorted(
        {r.language for r in positives} | {r.language for r in negatives}
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for lang in languages:
        panels = [
            ("flagged", top_forms(positives, top_k, lang)),
            ("unflagged", top_forms(negatives, top_k, lang)),
        ]
        fig, axes = plt.subplots(1, 2, figsize=(10, 4))
        for axis, (title, rows) in zip(axes, panels):
            labels = [r.form for r in rows]
            y = range(len(rows))
            axis.barh(
                [v - 0.2 for v in y],
                [r.masculine_count for r in rows],
                height=0.4,
                label="masculine",
                color="#4878a8",
            )
            axis.barh(
                [v + 0.2 for v in y],
                [r.feminine_count for r in rows],
                height=0.4,
                label="feminine",
                color="#c46a4a",
                hatch="//",
            )
            axis.set_yticks(list(y))
            axis.set_yticklabels(labels)
            axis.invert_yaxis()
            axis.set_title(f"{lang} {title}")
            axis.set_xlabel("translations")
        if any(rows for _, rows in panels):
            axes[0].legend(loc="lower right")
        fig.tight_layout()
        path = out_dir / f"ratios_{lang}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
