"""Scoring: precision/recall/F1 over relation labels and end-to-end
extraction scores over (entity pair, label) sets, plus plain-text and
machine-readable reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .corpus import RelationInstance, RelationLabel


@dataclass(frozen=True)
class ClassScore:
    precision: float
    recall: float
    f1: float
    gold_count: int
    predicted_count: int
    correct: int


@dataclass(frozen=True)
class Scores:
    """Classification metrics.

    ``macro_*`` average the per-class numbers over classes that occur in
    the gold labels; classes that are only ever predicted contribute
    their false positives to the micro scores but are not averaged.
    """

    per_class: dict[str, ClassScore]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float
    accuracy: float
    n_examples: int


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def _f1(p: float, r: float) -> float:
    return _ratio(2 * p * r, p + r)


def prf(
    gold: Sequence[int],
    predicted: Sequence[int],
    class_names: Sequence[str],
) -> Scores:
    """Per-class, macro, and micro precision/recall/F1.

    Zero denominators (a class never predicted, or never in gold) give
    0.0 for the affected metric rather than an error.
    """
    gold = list(gold)
    predicted = list(predicted)
    if len(gold) != len(predicted):
        raise ValueError(
            f"{len(gold)} gold labels but {len(predicted)} predictions"
        )
    if len(gold) == 0:
        raise ValueError("cannot score an empty label set")
    n = len(class_names)
    for name, labels in (("gold", gold), ("predicted", predicted)):
        for y in labels:
            if not 0 <= y < n:
                raise ValueError(
                    f"{name} label {y} out of range for {n} classes"
                )

    per_class: dict[str, ClassScore] = {}
    gold_classes = []
    for c, cname in enumerate(class_names):
        gold_count = sum(1 for y in gold if y == c)
        pred_count = sum(1 for y in predicted if y == c)
        correct = sum(1 for g, p in zip(gold, predicted) if g == p == c)
        p = _ratio(correct, pred_count)
        r = _ratio(correct, gold_count)
        per_class[cname] = ClassScore(p, r, _f1(p, r), gold_count, pred_count, correct)
        if gold_count > 0:
            gold_classes.append(cname)

    macro_p = float(np.mean([per_class[c].precision for c in gold_classes]))
    macro_r = float(np.mean([per_class[c].recall for c in gold_classes]))
    macro_f = float(np.mean([per_class[c].f1 for c in gold_classes]))

    total_correct = sum(1 for g, p in zip(gold, predicted) if g == p)
    total = len(gold)
    micro_p = _ratio(total_correct, total)
    # with exactly one prediction per instance, micro precision = recall
    micro_r = micro_p
    return Scores(
        per_class=per_class,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f,
        micro_precision=micro_p,
        micro_recall=micro_r,
        micro_f1=_f1(micro_p, micro_r),
        accuracy=_ratio(total_correct, total),
        n_examples=total,
    )


@dataclass(frozen=True)
class ExtractionScores:
    """Set-level scores for predicted relation instances.

    ``extraction`` credits any predicted entity pair that is gold-related,
    regardless of label or direction; ``combined`` additionally requires
    the kind and direction to match.
    """

    extraction_precision: float
    extraction_recall: float
    extraction_f1: float
    combined_precision: float
    combined_recall: float
    combined_f1: float
    n_gold: int
    n_predicted: int


def _pair_key(inst: RelationInstance) -> frozenset[str]:
    return frozenset((inst.e1, inst.e2))


def _full_key(inst: RelationInstance):
    # direction folds into argument order: (e1, e2, kind) with reverse
    # already normalized means swapping arguments instead of flagging.
    if inst.label is None:
        raise ValueError(f"unlabeled instance {inst.e1} / {inst.e2}")
    if inst.label.reverse:
        return (inst.e2, inst.e1, inst.label.kind.value)
    return (inst.e1, inst.e2, inst.label.kind.value)


def extraction_score(
    gold: Sequence[RelationInstance],
    predicted: Sequence[RelationInstance],
) -> ExtractionScores:
    gold_pairs = {_pair_key(i) for i in gold}
    pred_pairs = {_pair_key(i) for i in predicted}
    pair_hits = len(gold_pairs & pred_pairs)
    ext_p = _ratio(pair_hits, len(pred_pairs))
    ext_r = _ratio(pair_hits, len(gold_pairs))

    gold_full = {_full_key(i) for i in gold}
    pred_full = {_full_key(i) for i in predicted}
    full_hits = len(gold_full & pred_full)
    com_p = _ratio(full_hits, len(pred_full))
    com_r = _ratio(full_hits, len(gold_full))

    return ExtractionScores(
        extraction_precision=ext_p,
        extraction_recall=ext_r,
        extraction_f1=_f1(ext_p, ext_r),
        combined_precision=com_p,
        combined_recall=com_r,
        combined_f1=_f1(com_p, com_r),
        n_gold=len(gold),
        n_predicted=len(predicted),
    )


# -- reports -----------------------------------------------------------------


def format_report(scores: Scores, title: str = "Results") -> str:
    """Human-readable table: one row per class, then macro/micro lines."""
    name_width = max(len("class"), *(len(c) for c in scores.per_class))
    lines = [title, "=" * len(title), ""]
    header = (
        f"{'class':<{name_width}}  {'P':>7}  {'R':>7}  {'F1':>7}  "
        f"{'gold':>5}  {'pred':>5}"
    )
    lines.append(header)
    lines.append("-" * len(header))
    for cname, cs in scores.per_class.items():
        lines.append(
            f"{cname:<{name_width}}  {cs.precision:>7.4f}  {cs.recall:>7.4f}  "
            f"{cs.f1:>7.4f}  {cs.gold_count:>5d}  {cs.predicted_count:>5d}"
        )
    lines.append("-" * len(header))
    lines.append(
        f"{'macro':<{name_width}}  {scores.macro_precision:>7.4f}  "
        f"{scores.macro_recall:>7.4f}  {scores.macro_f1:>7.4f}"
    )
    lines.append(
        f"{'micro':<{name_width}}  {scores.micro_precision:>7.4f}  "
        f"{scores.micro_recall:>7.4f}  {scores.micro_f1:>7.4f}"
    )
    lines.append("")
    lines.append(f"accuracy: {scores.accuracy:.4f} on {scores.n_examples} instances")
    return "\n".join(lines)


def machine_lines(scores: Scores, prefix: str = "") -> list[str]:
    """``key<TAB>value`` lines for downstream tooling."""
    pre = f"{prefix}." if prefix else ""
    lines = []
    for cname, cs in scores.per_class.items():
        for metric, value in (
            ("precision", cs.precision),
            ("recall", cs.recall),
            ("f1", cs.f1),
        ):
            lines.append(f"{pre}class.{cname}.{metric}\t{value:.6f}")
    for metric, value in (
        ("macro.precision", scores.macro_precision),
        ("macro.recall", scores.macro_recall),
        ("macro.f1", scores.macro_f1),
        ("micro.precision", scores.micro_precision),
        ("micro.recall", scores.micro_recall),
        ("micro.f1", scores.micro_f1),
        ("accuracy", scores.accuracy),
    ):
        lines.append(f"{pre}{metric}\t{value:.6f}")
    lines.append(f"{pre}n_examples\t{scores.n_examples}")
    return lines


def extraction_machine_lines(
    scores: ExtractionScores, prefix: str = ""
) -> list[str]:
    pre = f"{prefix}." if prefix else ""
    return [
        f"{pre}extraction.precision\t{scores.extraction_precision:.6f}",
        f"{pre}extraction.recall\t{scores.extraction_recall:.6f}",
        f"{pre}extraction.f1\t{scores.extraction_f1:.6f}",
        f"{pre}combined.precision\t{scores.combined_precision:.6f}",
        f"{pre}combined.recall\t{scores.combined_recall:.6f}",
        f"{pre}combined.f1\t{scores.combined_f1:.6f}",
        f"{pre}n_gold\t{scores.n_gold}",
        f"{pre}n_predicted\t{scores.n_predicted}",
    ]


def format_extraction_report(
    scores: ExtractionScores, title: str = "Extraction results"
) -> str:
    lines = [title, "=" * len(title), ""]
    header = f"{'mode':<12}  {'P':>7}  {'R':>7}  {'F1':>7}"
    lines.append(header)
    lines.append("-" * len(header))
    lines.append(
        f"{'extraction':<12}  {scores.extraction_precision:>7.4f}  "
        f"{scores.extraction_recall:>7.4f}  {scores.extraction_f1:>7.4f}"
    )
    lines.append(
        f"{'combined':<12}  {scores.combined_precision:>7.4f}  "
        f"{scores.combined_recall:>7.4f}  {scores.combined_f1:>7.4f}"
    )
    lines.append("")
    lines.append(
        f"gold relations: {scores.n_gold}, predicted: {scores.n_predicted}"
    )
    return "\n".join(lines)
