"""Virtual question paper (VQP) documents.

A VQP is a line-oriented UTF-8 text file carrying an exam through its
lifecycle: DESIGN (authored, with keys and model answers), EXAM (distributed,
keys stripped) and ANSWERED (returned, with student responses). This module
owns the grammar, the canonical serializer and the lifecycle transforms.

Canonical form: LF line endings, a single space after each field colon,
options in label order, one blank line before each question block.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, replace
from typing import Mapping


class Variant(enum.Enum):
    DESIGN = "DESIGN"
    EXAM = "EXAM"
    ANSWERED = "ANSWERED"


class Kind(enum.Enum):
    MCQ = "MCQ"
    STRUCT = "STRUCT"


class VqpError(Exception):
    """Base class for VQP failures."""


class VqpSyntaxError(VqpError):
    """A line the grammar does not accept."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class VqpConstraintError(VqpError):
    """A well-formed line that violates a paper invariant."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class WrongVariant(VqpError):
    def __init__(self, expected: Variant, got: Variant):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected.value} paper, got {got.value}")


class UnknownQuestion(VqpError):
    def __init__(self, number: int):
        self.number = number
        super().__init__(f"no question numbered {number}")


class InvalidOption(VqpError):
    def __init__(self, number: int, label: str):
        self.number = number
        self.label = label
        super().__init__(f"question {number} has no option {label!r}")


@dataclass(frozen=True)
class Question:
    number: int
    kind: Kind
    stem: str
    options: tuple[tuple[str, str], ...] = ()  # MCQ only: (label, text)
    key: str | None = None          # MCQ, DESIGN papers only
    answer_lines: int | None = None  # STRUCT only
    model: str | None = None        # STRUCT, DESIGN papers only
    response: str | None = None     # ANSWERED papers only


@dataclass(frozen=True)
class QuestionPaper:
    id: str
    title: str
    duration_minutes: int
    variant: Variant
    author: str
    questions: tuple[Question, ...] = ()


@dataclass(frozen=True)
class Violation:
    rule: str
    question: int | None
    message: str


_HEADER_FIELDS = ("id", "title", "duration", "variant", "author")
_QHEAD_RE = re.compile(r"^#Q\s+(\d+)\s+(MCQ|STRUCT)\s*$")
_OPTION_RE = re.compile(r"^([A-Z])\)(.*)$")


def _field_text(rest: str) -> str:
    """Everything after the colon, minus the single canonical separator space."""
    return rest[1:] if rest.startswith(" ") else rest


class _Block:
    """Mutable accumulator for one question block during parsing."""

    def __init__(self, line: int, number: int, kind: Kind):
        self.line = line
        self.number = number
        self.kind = kind
        self.stem: list[str] | None = None
        self.options: list[tuple[str, str]] = []
        self.key: str | None = None
        self.answer_lines: int | None = None
        self.model: list[str] | None = None
        self.response: str | list[str] | None = None
        self.open_text: list[str] | None = None  # target of `+:` lines


def parse_vqp(source: str) -> QuestionPaper:
    """Parse VQP text into a QuestionPaper, enforcing all paper invariants.

    Raises VqpSyntaxError for lines outside the grammar and
    VqpConstraintError for grammar-legal lines violating an invariant
    (key in an EXAM paper, non-dense numbering, ...). Both carry the
    offending line number.
    """
    lines = source.split("\n")
    headers: dict[str, str] = {}
    variant: Variant | None = None
    blocks: list[_Block] = []
    block: _Block | None = None
    seen_version = False
    seen_numbers: set[int] = set()

    def finish_block(b: _Block) -> None:
        if b.stem is None:
            raise VqpSyntaxError(b.line, f"question {b.number} has no stem line")
        if b.kind is Kind.MCQ:
            if len(b.options) < 2:
                raise VqpConstraintError(b.line, f"question {b.number}: MCQ needs at least 2 options")
        else:
            if b.answer_lines is None:
                raise VqpSyntaxError(b.line, f"question {b.number}: STRUCT needs a 'lines:' field")

    for idx, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if not seen_version:
            if line.rstrip() != "%VQP 1":
                raise VqpSyntaxError(idx, "document must start with '%VQP 1'")
            seen_version = True
            continue

        if line.startswith("@"):
            if block is not None or blocks:
                raise VqpSyntaxError(idx, "header line after question section")
            m = re.match(r"^@([a-z]+):(.*)$", line)
            if not m or m.group(1) not in _HEADER_FIELDS:
                raise VqpSyntaxError(idx, f"unknown header line {line.split(':')[0]!r}")
            name, value = m.group(1), _field_text(m.group(2))
            if name in headers:
                raise VqpSyntaxError(idx, f"duplicate header '@{name}'")
            if name == "duration":
                if not value.strip().isdigit() or int(value) <= 0:
                    raise VqpSyntaxError(idx, "duration must be a positive integer")
            if name == "variant":
                try:
                    variant = Variant(value.strip())
                except ValueError:
                    raise VqpSyntaxError(idx, f"unknown variant {value.strip()!r}") from None
            headers[name] = value
            continue

        if line.startswith("#"):
            m = _QHEAD_RE.match(line)
            if not m:
                raise VqpSyntaxError(idx, "'#' at column 1 only introduces questions (#Q <n> MCQ|STRUCT)")
            missing = [f for f in _HEADER_FIELDS if f not in headers]
            if missing:
                raise VqpSyntaxError(idx, f"question before complete header (missing @{missing[0]})")
            if block is not None:
                finish_block(block)
                blocks.append(block)
            number = int(m.group(1))
            if number in seen_numbers:
                raise VqpConstraintError(idx, f"duplicate question number {number}")
            if number != len(blocks) + 1:
                raise VqpConstraintError(idx, f"question numbers must be dense 1..N (expected {len(blocks) + 1}, got {number})")
            seen_numbers.add(number)
            block = _Block(idx, number, Kind(m.group(2)))
            continue

        if block is None:
            raise VqpSyntaxError(idx, "content line outside any question block")

        if line.startswith("?:"):
            if block.stem is not None:
                raise VqpSyntaxError(idx, "duplicate stem line")
            block.stem = [_field_text(line[2:])]
            block.open_text = block.stem
            continue
        if line.startswith("+:"):
            if block.open_text is None:
                raise VqpSyntaxError(idx, "continuation with nothing to continue")
            block.open_text.append(_field_text(line[2:]))
            continue
        if line.startswith("!key:"):
            if block.kind is not Kind.MCQ:
                raise VqpSyntaxError(idx, "'!key' only valid on MCQ questions")
            if variant is not Variant.DESIGN:
                raise VqpConstraintError(idx, f"'!key' not allowed in {variant.value} paper")
            if block.key is not None:
                raise VqpSyntaxError(idx, "duplicate '!key' line")
            value = _field_text(line[5:]).strip()
            labels = [lab for lab, _ in block.options]
            if value not in labels:
                raise VqpConstraintError(idx, f"key {value!r} is not an option label")
            block.key = value
            block.open_text = None
            continue
        if line.startswith("!model:"):
            if block.kind is not Kind.STRUCT:
                raise VqpSyntaxError(idx, "'!model' only valid on STRUCT questions")
            if variant is not Variant.DESIGN:
                raise VqpConstraintError(idx, f"'!model' not allowed in {variant.value} paper")
            if block.model is not None:
                raise VqpSyntaxError(idx, "duplicate '!model' line")
            block.model = [_field_text(line[7:])]
            block.open_text = block.model
            continue
        if line.startswith("=ans:"):
            if variant is not Variant.ANSWERED:
                raise VqpConstraintError(idx, f"'=ans' not allowed in {variant.value} paper")
            if block.response is not None:
                raise VqpSyntaxError(idx, "duplicate '=ans' line")
            value = _field_text(line[5:])
            if block.kind is Kind.MCQ:
                value = value.strip()
                labels = [lab for lab, _ in block.options]
                if value not in labels:
                    raise VqpConstraintError(idx, f"response {value!r} is not an option label")
                block.response = value
                block.open_text = None
            else:
                block.response = [value]
                block.open_text = block.response
            continue
        if line.startswith("lines:"):
            if block.kind is not Kind.STRUCT:
                raise VqpSyntaxError(idx, "'lines' only valid on STRUCT questions")
            value = _field_text(line[6:]).strip()
            if not value.isdigit() or int(value) <= 0:
                raise VqpSyntaxError(idx, "'lines' must be a positive integer")
            block.answer_lines = int(value)
            block.open_text = None
            continue
        m = _OPTION_RE.match(line)
        if m:
            if block.kind is not Kind.MCQ:
                raise VqpSyntaxError(idx, "options only valid on MCQ questions")
            label = m.group(1)
            expected = chr(ord("A") + len(block.options))
            if label != expected:
                raise VqpConstraintError(idx, f"option labels must run consecutively from 'A' (expected {expected}, got {label})")
            if len(block.options) >= 10:
                raise VqpConstraintError(idx, "MCQ allows at most 10 options")
            block.options.append((label, _field_text(m.group(2))))
            block.open_text = None
            continue
        raise VqpSyntaxError(idx, f"unrecognized line {line[:30]!r}")

    if not seen_version:
        raise VqpSyntaxError(1, "document must start with '%VQP 1'")
    missing = [f for f in _HEADER_FIELDS if f not in headers]
    if missing:
        raise VqpSyntaxError(len(lines), f"missing header '@{missing[0]}'")
    if block is not None:
        finish_block(block)
        blocks.append(block)

    questions = tuple(
        Question(
            number=b.number,
            kind=b.kind,
            stem="\n".join(b.stem or [""]),
            options=tuple(b.options),
            key=b.key,
            answer_lines=b.answer_lines,
            model="\n".join(b.model) if b.model is not None else None,
            response=("\n".join(b.response) if isinstance(b.response, list) else b.response),
        )
        for b in blocks
    )
    return QuestionPaper(
        id=headers["id"],
        title=headers["title"],
        duration_minutes=int(headers["duration"]),
        variant=variant,  # type: ignore[arg-type]
        author=headers["author"],
        questions=questions,
    )


def _emit_text(out: list[str], marker: str, text: str) -> None:
    parts = text.split("\n")
    out.append(f"{marker} {parts[0]}" if parts[0] else marker)
    for part in parts[1:]:
        out.append(f"+: {part}" if part else "+:")


def serialize_vqp(paper: QuestionPaper) -> str:
    """Emit the canonical text form. serialize∘parse∘serialize == serialize."""
    out = [
        "%VQP 1",
        f"@id: {paper.id}" if paper.id else "@id:",
        f"@title: {paper.title}" if paper.title else "@title:",
        f"@duration: {paper.duration_minutes}",
        f"@variant: {paper.variant.value}",
        f"@author: {paper.author}" if paper.author else "@author:",
    ]
    for q in paper.questions:
        out.append("")
        out.append(f"#Q {q.number} {q.kind.value}")
        _emit_text(out, "?:", q.stem)
        if q.kind is Kind.MCQ:
            for label, text in q.options:
                out.append(f"{label}) {text}" if text else f"{label})")
            if q.key is not None:
                out.append(f"!key: {q.key}")
            if q.response is not None:
                out.append(f"=ans: {q.response}")
        else:
            out.append(f"lines: {q.answer_lines}")
            if q.model is not None:
                _emit_text(out, "!model:", q.model)
            if q.response is not None:
                _emit_text(out, "=ans:", q.response)
    return "\n".join(out) + "\n"


def to_exam(paper: QuestionPaper) -> QuestionPaper:
    """DESIGN -> EXAM: strip keys and model answers, leave everything else."""
    if paper.variant is not Variant.DESIGN:
        raise WrongVariant(Variant.DESIGN, paper.variant)
    questions = tuple(replace(q, key=None, model=None) for q in paper.questions)
    return replace(paper, variant=Variant.EXAM, questions=questions)


def merge_answers(exam: QuestionPaper, responses: Mapping[int, str]) -> QuestionPaper:
    """EXAM -> ANSWERED: attach student responses; unanswered questions stay blank."""
    if exam.variant is not Variant.EXAM:
        raise WrongVariant(Variant.EXAM, exam.variant)
    by_number = {q.number: q for q in exam.questions}
    for number, response in responses.items():
        q = by_number.get(number)
        if q is None:
            raise UnknownQuestion(number)
        if q.kind is Kind.MCQ and response not in [lab for lab, _ in q.options]:
            raise InvalidOption(number, response)
    questions = tuple(
        replace(q, response=responses[q.number]) if q.number in responses else q
        for q in exam.questions
    )
    return replace(exam, variant=Variant.ANSWERED, questions=questions)


def validate(paper: QuestionPaper) -> list[Violation]:
    """Check every type invariant; empty list iff the paper is well formed."""
    out: list[Violation] = []

    def bad(rule: str, question: int | None, message: str) -> None:
        out.append(Violation(rule, question, message))

    if paper.duration_minutes <= 0:
        bad("BadDuration", None, "duration must be positive")
    seen: set[int] = set()
    for pos, q in enumerate(paper.questions, start=1):
        if q.number in seen:
            bad("DuplicateNumber", q.number, f"question number {q.number} repeats")
        elif q.number != pos:
            bad("NonDenseNumbers", q.number, f"expected number {pos}, got {q.number}")
        seen.add(q.number)

        if q.kind is Kind.MCQ:
            labels = [lab for lab, _ in q.options]
            if len(labels) < 2:
                bad("TooFewOptions", q.number, "MCQ needs at least 2 options")
            elif len(labels) > 10:
                bad("TooManyOptions", q.number, "MCQ allows at most 10 options")
            if labels != [chr(ord("A") + i) for i in range(len(labels))]:
                bad("BadOptionLabels", q.number, "labels must run consecutively from 'A'")
            if q.key is not None:
                if paper.variant is not Variant.DESIGN:
                    bad("KeyNotAllowed", q.number, f"key present in {paper.variant.value} paper")
                if q.key not in labels:
                    bad("BadKeyLetter", q.number, f"key {q.key!r} is not an option label")
            if q.response is not None and q.response not in labels:
                bad("BadResponseLetter", q.number, f"response {q.response!r} is not an option label")
            if q.answer_lines is not None:
                bad("BadAnswerLines", q.number, "MCQ does not take answer lines")
            if q.model is not None:
                bad("ModelNotAllowed", q.number, "MCQ does not take a model answer")
        else:
            if q.options:
                bad("OptionsOnStruct", q.number, "STRUCT does not take options")
            if q.answer_lines is None or q.answer_lines <= 0:
                bad("BadAnswerLines", q.number, "STRUCT needs a positive answer line count")
            if q.key is not None:
                bad("KeyNotAllowed", q.number, "STRUCT does not take a key")
            if q.model is not None and paper.variant is not Variant.DESIGN:
                bad("ModelNotAllowed", q.number, f"model answer present in {paper.variant.value} paper")
        if q.response is not None and paper.variant is not Variant.ANSWERED:
            bad("ResponseNotAllowed", q.number, f"response present in {paper.variant.value} paper")
    return out
