import math

from toyaudit import ToyAuditError


class NonPositiveInput(ToyAuditError):
    pass


def compute_hydration_goal(age_years, weight_kg, height_cm) -> int:
    """Daily water goal in ml.

    The real product's formula is not public. This one is made up for the
    testbed: 35 ml per kg, clamped to [400, 4000], rounded to the nearest
    10 ml (halves round up). Age and height are validated but unused.
    """
    for name, value in (("age_years", age_years), ("weight_kg", weight_kg), ("height_cm", height_cm)):
        if value is None or value <= 0:
            raise NonPositiveInput(f"{name} must be positive, got {value!r}")
    goal = min(max(weight_kg * 35, 400), 4000)
    return int(math.floor(goal / 10 + 0.5)) * 10
