import pytest

from padiclab import (
    CycloTower,
    HondaData,
    PrimeContext,
    TateParameter,
    build_points,
    solve_h90,
)
from padiclab.honda import default_truncation


@pytest.fixture(scope="session")
def ctx3():
    return PrimeContext(3, 14)


@pytest.fixture(scope="session")
def ctx5():
    return PrimeContext(5, 12)


@pytest.fixture(scope="session")
def tower3(ctx3):
    return CycloTower(ctx3, 1)


@pytest.fixture(scope="session")
def tower5(ctx5):
    return CycloTower(ctx5, 1)


@pytest.fixture(scope="session")
def honda3(ctx3):
    return HondaData.build(ctx3, default_truncation(ctx3, 1))


@pytest.fixture(scope="session")
def honda5(ctx5):
    return HondaData.build(ctx5, default_truncation(ctx5, 1))


@pytest.fixture(scope="session")
def fam3(honda3, tower3):
    return build_points(honda3, tower3, 1)


@pytest.fixture(scope="session")
def fam5(honda5, tower5):
    return build_points(honda5, tower5, 1)


@pytest.fixture(scope="session")
def sol3(fam3):
    return solve_h90(fam3, 1)


@pytest.fixture(scope="session")
def sol5(fam5):
    return solve_h90(fam5, 1)


@pytest.fixture(scope="session")
def q3(ctx3):
    return TateParameter.make(ctx3, 1, 4)


@pytest.fixture(scope="session")
def q5(ctx5):
    return TateParameter.make(ctx5, 1, 6)


# deeper tower at reduced precision for the level-2 identities
@pytest.fixture(scope="session")
def ctx3n2():
    return PrimeContext(3, 12)


@pytest.fixture(scope="session")
def tower3n2(ctx3n2):
    return CycloTower(ctx3n2, 2)


@pytest.fixture(scope="session")
def fam3n2(ctx3n2, tower3n2):
    honda = HondaData.build(ctx3n2, default_truncation(ctx3n2, 2))
    return build_points(honda, tower3n2, 2)


@pytest.fixture(scope="session")
def sol3n2(fam3n2):
    return solve_h90(fam3n2, 2)
