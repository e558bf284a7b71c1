import pytest

from bautin.families import bautin, sibirsky
from bautin.liapunov import align_to_reference, focal_values, reference_values


@pytest.fixture(scope="session")
def quad_values():
    return focal_values(bautin(), 4)


@pytest.fixture(scope="session")
def cubic_values():
    return focal_values(sibirsky(), 6)


@pytest.fixture(scope="session")
def quad_aligned(quad_values):
    return align_to_reference(quad_values, reference_values(quad_values.family))


@pytest.fixture(scope="session")
def cubic_aligned(cubic_values):
    return align_to_reference(cubic_values, reference_values(cubic_values.family))
