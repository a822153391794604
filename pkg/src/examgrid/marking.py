"""Marking: auto-mark MCQs against the design key, queue structured
answers for manual scores, keep totals recomputable from the rows."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .vqp import Kind, QuestionPaper, Variant, WrongVariant


class MarkingError(Exception):
    pass


class PaperMismatch(MarkingError):
    pass


class NotManual(MarkingError):
    def __init__(self, number: int):
        self.number = number
        super().__init__(f"question {number} is auto-marked")


class ScoreOutOfRange(MarkingError):
    pass


@dataclass(frozen=True)
class MarkRow:
    number: int
    kind: Kind
    awarded: float | None  # None = pending manual mark
    max_mark: float
    response: str | None


@dataclass(frozen=True)
class MarkReport:
    paper_id: str
    rows: tuple[MarkRow, ...]

    @property
    def auto_subtotal(self) -> float:
        return sum(r.awarded or 0.0 for r in self.rows if r.kind is Kind.MCQ)

    @property
    def manual_subtotal(self) -> float:
        return sum(r.awarded or 0.0 for r in self.rows if r.kind is Kind.STRUCT)

    @property
    def pending_count(self) -> int:
        return sum(1 for r in self.rows if r.awarded is None)

    @property
    def total(self) -> float:
        return self.auto_subtotal + self.manual_subtotal

    @property
    def max_total(self) -> float:
        return sum(r.max_mark for r in self.rows)


def auto_mark(design: QuestionPaper, answered: QuestionPaper) -> MarkReport:
    """One mark per question: MCQ scores 1 when the response matches the
    design key (blank scores 0); STRUCT rows start pending."""
    if design.variant is not Variant.DESIGN:
        raise WrongVariant(Variant.DESIGN, design.variant)
    if answered.variant is not Variant.ANSWERED:
        raise WrongVariant(Variant.ANSWERED, answered.variant)
    if design.id != answered.id:
        raise PaperMismatch(f"paper ids differ: {design.id!r} vs {answered.id!r}")
    if len(design.questions) != len(answered.questions):
        raise PaperMismatch(
            f"question counts differ: {len(design.questions)} vs {len(answered.questions)}")
    rows = []
    for dq, aq in zip(design.questions, answered.questions):
        if dq.kind is Kind.MCQ:
            awarded = 1.0 if (aq.response is not None and aq.response == dq.key) else 0.0
        else:
            awarded = None
        rows.append(MarkRow(dq.number, dq.kind, awarded, 1.0, aq.response))
    return MarkReport(paper_id=design.id, rows=tuple(rows))


def apply_manual(report: MarkReport, number: int, score: float) -> MarkReport:
    """Set (or overwrite) the manual score of a STRUCT row."""
    for i, row in enumerate(report.rows):
        if row.number == number:
            if row.kind is not Kind.STRUCT:
                raise NotManual(number)
            if not 0.0 <= score <= row.max_mark:
                raise ScoreOutOfRange(f"score {score} outside [0, {row.max_mark}]")
            rows = report.rows[:i] + (replace(row, awarded=score),) + report.rows[i + 1:]
            return replace(report, rows=rows)
    raise MarkingError(f"no question numbered {number}")


def summarize(report: MarkReport) -> str:
    """Human-readable totals plus a per-question table."""
    lines = [f"paper {report.paper_id}"]
    for r in report.rows:
        awarded = "PENDING" if r.awarded is None else f"{r.awarded:.1f}"
        response = r.response if r.response is not None else "-"
        if r.kind is Kind.STRUCT and r.response is not None:
            response = r.response.replace("\n", " / ")
        lines.append(f"q {r.number} {r.kind.value} awarded={awarded} max={r.max_mark:.1f} response={response}")
    lines.append(f"auto={report.auto_subtotal:.1f} manual={report.manual_subtotal:.1f} pending={report.pending_count}")
    lines.append(f"total {report.total:.1f}/{report.max_total:.1f}")
    if report.pending_count:
        lines.append(f"INCOMPLETE: {report.pending_count} pending")
    return "\n".join(lines) + "\n"


def render_rows(report: MarkReport) -> str:
    """Machine-readable key=value export of the same report."""
    lines = [f"paper={report.paper_id}"]
    for r in report.rows:
        awarded = "PENDING" if r.awarded is None else f"{r.awarded:.1f}"
        lines.append(f"q.{r.number}.kind={r.kind.value}")
        lines.append(f"q.{r.number}.awarded={awarded}")
        lines.append(f"q.{r.number}.max={r.max_mark:.1f}")
    lines.append(f"total.auto={report.auto_subtotal:.1f}")
    lines.append(f"total.manual={report.manual_subtotal:.1f}")
    lines.append(f"total.pending={report.pending_count}")
    lines.append(f"total.max={report.max_total:.1f}")
    return "\n".join(lines) + "\n"
