"""Faithfulness questionnaire for generated two-car street scenes.

Nine templated multiple-choice questions per scene: two object-presence
checks, two road checks, four color checks, one activity check.  The
score is the fraction answered as expected.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..scene import COLORS

ROAD_CHOICES = ["trail", "grass", "sand", "asphalted road", "dirt", "snow",
                "mountain", "river", "sea", "forest"]


@dataclass(frozen=True)
class Question:
    caption: str
    element: str
    question: str
    choices: tuple[str, ...]
    answer: str
    element_type: str


def tifa_questions(car_type_1: str, car_type_2: str,
                   car_color_1: str, car_color_2: str,
                   common_colors=COLORS) -> list[Question]:
    caption = (f"{car_color_1} {car_type_1} and {car_color_2} {car_type_2} "
               f"are driving on a road.")
    yes_no = ("yes", "no")
    return [
        Question(caption, car_type_1, f"is there a {car_type_1}?",
                 yes_no, "yes", "object"),
        Question(caption, car_type_2, f"is there a {car_type_2}?",
                 yes_no, "yes", "object"),
        Question(caption, "road", "is there an asphalted road?",
                 yes_no, "yes", "location"),
        Question(caption, "road", "what type of path is this?",
                 tuple(ROAD_CHOICES), "asphalted road", "location"),
        Question(caption, car_color_1, f"is the {car_type_1} {car_color_1}?",
                 yes_no, "yes", "color"),
        Question(caption, car_color_1, f"what color is the {car_type_1}?",
                 tuple(common_colors), car_color_1, "color"),
        Question(caption, car_color_2, f"is the {car_type_2} {car_color_2}?",
                 yes_no, "yes", "color"),
        Question(caption, car_color_2, f"what color is the {car_type_2}?",
                 tuple(common_colors), car_color_2, "color"),
        Question(caption, "driving",
                 f"are the {car_type_1} and {car_type_2} driving?",
                 yes_no, "yes", "activity"),
    ]


def tifa_score(answers: list[str], questions: list[Question]) -> float:
    """Fraction of answers matching the expected ones."""
    if len(answers) != len(questions):
        raise ValueError(f"{len(answers)} answers for {len(questions)} questions")
    if not questions:
        raise ValueError("no questions to score")
    hits = sum(a == q.answer for a, q in zip(answers, questions))
    return hits / len(questions)
