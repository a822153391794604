"""Shared generators and helpers for the test suite."""

import random
import string

import pytest

from examgrid import vqp

WORDS = [
    "ohm", "flux", "delta", "prism", "vector", "torque", "lattice", "quanta",
    "entropy", "signal", "matrix", "filter", "kernel", "phase", "drift",
]
TRICKY = ["x: y", "a + b", "  leading", "trailing  ", "unicode éß中", "A) not an option"]


def rand_text(rng: random.Random, allow_empty: bool = False) -> str:
    if allow_empty and rng.random() < 0.1:
        return ""
    if rng.random() < 0.15:
        return rng.choice(TRICKY)
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 5)))


def rand_multiline(rng: random.Random) -> str:
    return "\n".join(rand_text(rng, allow_empty=True) for _ in range(rng.randint(1, 4)))


def rand_token(rng: random.Random) -> str:
    return "".join(rng.choice(string.ascii_lowercase + string.digits) for _ in range(rng.randint(3, 10)))


def make_question(rng: random.Random, number: int, variant: vqp.Variant) -> vqp.Question:
    if rng.random() < 0.6:
        n_opt = rng.randint(2, 6)
        labels = [chr(ord("A") + i) for i in range(n_opt)]
        options = tuple((lab, rand_text(rng, allow_empty=True)) for lab in labels)
        key = rng.choice(labels) if variant is vqp.Variant.DESIGN and rng.random() < 0.8 else None
        response = rng.choice(labels) if variant is vqp.Variant.ANSWERED and rng.random() < 0.7 else None
        return vqp.Question(
            number=number, kind=vqp.Kind.MCQ, stem=rand_multiline(rng),
            options=options, key=key, response=response,
        )
    model = rand_multiline(rng) if variant is vqp.Variant.DESIGN and rng.random() < 0.7 else None
    response = rand_multiline(rng) if variant is vqp.Variant.ANSWERED and rng.random() < 0.6 else None
    return vqp.Question(
        number=number, kind=vqp.Kind.STRUCT, stem=rand_multiline(rng),
        answer_lines=rng.randint(1, 12), model=model, response=response,
    )


def make_paper(rng: random.Random, variant: vqp.Variant | None = None) -> vqp.QuestionPaper:
    if variant is None:
        variant = rng.choice(list(vqp.Variant))
    n = rng.randint(0, 8)
    return vqp.QuestionPaper(
        id=rand_token(rng),
        title=rand_text(rng, allow_empty=True),
        duration_minutes=rng.randint(1, 240),
        variant=variant,
        author=rand_text(rng),
        questions=tuple(make_question(rng, i + 1, variant) for i in range(n)),
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xE6A)


DESIGN_DOC = """%VQP 1
@id: phys101
@title: Fields midterm
@duration: 45
@variant: DESIGN
@author: m.curie

#Q 1 MCQ
?: Which unit measures resistance?
A) Volt
B) Ohm
C) Ampere
!key: B

#Q 2 MCQ
?: A body in free fall experiences
+: (ignore air resistance)
A) constant velocity
B) zero net force
C) constant acceleration
D) increasing mass
!key: C

#Q 3 STRUCT
?: State and briefly justify the superposition principle.
lines: 4
!model: Fields add vectorially; the governing equations are linear.
+: Any linear combination of solutions is a solution.
"""


@pytest.fixture
def design_paper() -> vqp.QuestionPaper:
    return vqp.parse_vqp(DESIGN_DOC)
