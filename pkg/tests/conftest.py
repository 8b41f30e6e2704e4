import random

import pytest

from relim.family import FamilyParams, make_family_problem, make_mis_problem


@pytest.fixture
def mis3():
    return make_mis_problem(3)


@pytest.fixture
def fam421():
    return make_family_problem(FamilyParams(4, 2, 1))


@pytest.fixture
def rng():
    return random.Random(20260809)
