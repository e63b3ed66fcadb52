"""Brute-force recount of masculine/feminine tallies from raw artifacts.

Independent check on the stats module: reads the per-stage artifact files
directly (pairs, outcomes, risk labels) with nothing but the standard
library and recounts every tally from scratch.  Prints the same delimited
shape the stats command writes so outputs can be diffed.

Usage: python3 scripts/recount_ratios.py <artifacts_dir> <positive|negative> [language]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

GROUP_LABEL = {"positive": "AT_RISK", "negative": "NOT_AT_RISK"}


def read_rows(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def recount(
    artifacts: Path, group: str, language: str | None = None
) -> list[tuple[str, str, int, int]]:
    wanted = GROUP_LABEL[group]
    forms = {
        row["pair_id"]: (row["original"], row["substitute"])
        for row in read_rows(artifacts / "03_pairs.jsonl")
    }
    genders: dict[tuple[str, str, str], str | None] = {}
    for row in read_rows(artifacts / "06_outcomes.jsonl"):
        genders[(row["pair_id"], row["lang"], row["side"])] = row["gender"]

    tallies: dict[tuple[str, str], list[int]] = {}
    for row in read_rows(artifacts / "07_risk.jsonl"):
        if row["label"] != wanted:
            continue
        lang = row["language"]
        if language is not None and lang != language:
            continue
        original_form, substitute_form = forms[row["pair_id"]]
        for side, form in (
            ("ORIGINAL", original_form),
            ("SUBSTITUTED", substitute_form),
        ):
            gender = genders.get((row["pair_id"], lang, side))
            if gender == "MASCULINE":
                tallies.setdefault((form, lang), [0, 0])[0] += 1
            elif gender == "FEMININE":
                tallies.setdefault((form, lang), [0, 0])[1] += 1

    rows = [
        (form, lang, m, f)
        for (form, lang), (m, f) in tallies.items()
    ]
    rows.sort(key=lambda r: (-(r[2] + r[3]), r[1], r[0]))
    return rows


def main(argv: list[str]) -> int:
    if len(argv) < 2 or argv[1] not in GROUP_LABEL:
        print(__doc__, file=sys.stderr)
        return 2
    artifacts = Path(argv[0])
    language = argv[2] if len(argv) > 2 else None
    print("form\tlanguage\tmasculine\tfeminine\tratio")
    for form, lang, m, f in recount(artifacts, argv[1], language):
        print(f"{form}\t{lang}\t{m}\t{f}\t{m}:{f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
