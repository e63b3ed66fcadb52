"""Reparameterized IBM-Model-2 word aligner with a diagonal prior.

The generative direction is target-given-source: each target position i
(1-based, sentence length m) links to a source position j in 1..n or to
NULL (j = 0).  The link prior is

    p(a_i = j | i, m, n) = p0                              if j = 0
                         = (1 - p0) * exp(-lam * d) / Z    otherwise,

with d = |i/m - j/n| and Z normalizing over j = 1..n.  Only the lexical
table t(f|e) is learned (EM, uniform init); lam and p0 stay fixed.  Decode
substitutes a 1e-9 floor for absent lexical entries without renormalizing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .records import ProjectedFocus

DEFAULT_LAMBDA = 4.0
DEFAULT_NULL_PROB = 0.08
DEFAULT_ITERATIONS = 5
LEXICAL_FLOOR = 1e-9

# Serialized stand-in for the NULL source word.
NULL_TOKEN = "<eps>"

Bitext = Sequence[tuple[Sequence[str], Sequence[str]]]


def diagonal_prior(i: int, m: int, n: int, lam: float, p0: float) -> list[float]:
    """Prior over j = 0..n for target position i (1-based)."""
    if n == 0:
        return [1.0]
    weights = [math.exp(-lam * abs(i / m - j / n)) for j in range(1, n + 1)]
    z = sum(weights)
    return [p0] + [(1.0 - p0) * w / z for w in weights]


@dataclass
class AlignmentModel:
    lam: float
    p0: float
    iterations: int
    # table[e][f] = t(f|e); key None is the NULL source word
    table: dict[str | None, dict[str, float]]
    log_likelihoods: list[float] = field(default_factory=list)
    skipped_pairs: int = 0

    def lookup(self, e: str | None, f: str) -> float:
        row = self.table.get(e)
        if row is None:
            return LEXICAL_FLOOR
        return row.get(f, LEXICAL_FLOOR)

    def save(self, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [
            f"# lambda={self.lam!r} p0={self.p0!r} iterations={self.iterations}"
        ]
        flat = []
        for e, row in self.table.items():
            e_key = NULL_TOKEN if e is None else e
            for f, prob in row.items():
                flat.append((e_key, f, prob))
        for e_key, f, prob in sorted(flat):
            lines.append(f"{e_key}\t{f}\t{math.log(prob)!r}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Path | str) -> "AlignmentModel":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        header = lines[0].lstrip("# ").split()
        params = dict(item.split("=", 1) for item in header)
        model = cls(
            lam=float(params["lambda"]),
            p0=float(params["p0"]),
            iterations=int(params["iterations"]),
            table={},
        )
        for line in lines[1:]:
            if not line.strip():
                continue
            e_key, f, log_prob = line.split("\t")
            e = None if e_key == NULL_TOKEN else e_key
            model.table.setdefault(e, {})[f] = math.exp(float(log_prob))
        return model


def em_train(
    bitext: Bitext,
    iterations: int = DEFAULT_ITERATIONS,
    lam: float = DEFAULT_LAMBDA,
    p0: float = DEFAULT_NULL_PROB,
) -> AlignmentModel:
    """Train the lexical table by EM with fixed prior parameters.

    Deterministic: uniform initialization over the target vocabulary and a
    fixed summation order (pairs in input order, positions ascending).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    pairs = []
    skipped = 0
    for src, tgt in bitext:
        if not src or not tgt:
            skipped += 1
            continue
        pairs.append((list(src), list(tgt)))
    if not pairs:
        raise ValueError("empty bitext")

    target_vocab = sorted({f for _, tgt in pairs for f in tgt})
    uniform = 1.0 / len(target_vocab)

    model = AlignmentModel(lam=lam, p0=p0, iterations=iterations, table={})
    model.skipped_pairs = skipped

    def t_lookup(e: str | None, f: str) -> float:
        row = model.table.get(e)
        if row is None:
            return uniform  # first iteration: implicit uniform table
        return row.get(f, 0.0)

    for _ in range(iterations):
        counts: dict[str | None, dict[str, float]] = {}
        ll = 0.0
        for src, tgt in pairs:
            n, m = len(src), len(tgt)
            for i, f in enumerate(tgt, start=1):
                priors = diagonal_prior(i, m, n, lam, p0)
                terms = [priors[0] * t_lookup(None, f)]
                for j, e in enumerate(src, start=1):
                    terms.append(priors[j] * t_lookup(e, f))
                total = sum(terms)
                ll += math.log(total)
                for j in range(n + 1):
                    e = None if j == 0 else src[j - 1]
                    gamma = terms[j] / total
                    row = counts.setdefault(e, {})
                    row[f] = row.get(f, 0.0) + gamma
        model.log_likelihoods.append(ll)
        new_table: dict[str | None, dict[str, float]] = {}
        for e, row in counts.items():
            row_total = sum(row.values())
            new_table[e] = {f: c / row_total for f, c in row.items()}
        model.table = new_table
    return model


def link_posteriors(
    model: AlignmentModel, src: Sequence[str], tgt: Sequence[str], i: int
) -> list[float]:
    """Normalized posterior over j = 0..n for target position i (0-based)."""
    n, m = len(src), len(tgt)
    priors = diagonal_prior(i + 1, m, n, model.lam, model.p0)
    f = tgt[i]
    terms = [priors[0] * model.lookup(None, f)]
    for j, e in enumerate(src, start=1):
        terms.append(priors[j] * model.lookup(e, f))
    total = sum(terms)
    return [term / total for term in terms]


def viterbi_align(
    model: AlignmentModel, src: Sequence[str], tgt: Sequence[str]
) -> list[int | None]:
    """Per target position, the argmax source link (None = NULL).

    Ties break toward smaller j, NULL counting as the smallest.
    """
    n, m = len(src), len(tgt)
    links: list[int | None] = []
    for i, f in enumerate(tgt, start=1):
        priors = diagonal_prior(i, m, n, model.lam, model.p0)
        best_j = 0
        best_term = priors[0] * model.lookup(None, f)
        for j, e in enumerate(src, start=1):
            term = priors[j] * model.lookup(e, f)
            if term > best_term:
                best_term = term
                best_j = j
        links.append(best_j - 1 if best_j > 0 else None)
    return links


def project_focus(
    model: AlignmentModel,
    src: Sequence[str],
    focus_index: int,
    tgt: Sequence[str],
) -> ProjectedFocus:
    """Target position realizing the source focus, by Viterbi then posterior.

    Among target positions Viterbi-aligned to the focus, the one with the
    highest link posterior wins; equal posteriors go to the smaller index.
    """
    if not 0 <= focus_index < len(src):
        raise ValueError(f"focus index {focus_index} out of range")
    links = viterbi_align(model, src, tgt)
    best: tuple[int, float] | None = None
    for i, j in enumerate(links):
        if j != focus_index:
            continue
        posterior = link_posteriors(model, src, tgt, i)[focus_index + 1]
        if best is None or posterior > best[1]:
            best = (i, posterior)
    if best is None:
        return ProjectedFocus(None, None)
    return ProjectedFocus(best[0], best[1])


def pharaoh(links: Iterable[int | None]) -> str:
    """Render links as source-target `j-i` pairs, NULL links omitted."""
    out = []
    for i, j in enumerate(links):
        if j is not None:
            out.append(f"{j}-{i}")
    return " ".join(out)
