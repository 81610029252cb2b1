import pytest
from hypothesis import settings

from idips.domain import social_domain
from idips.evaluator import WorldState

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")

_DEFAULTS = {
    "p_g": (8.0, 0.0),
    "p_l": (4.0, 0.0),
    "p_d": (6.0, 0.5),
    "s_d": 0.0,
    "p_h": (1000.0, 0.0),
    "v_h": (0.0, 0.0),
    "p_hl": (1000.0, 0.0),
    "v_hl": (0.0, 0.0),
    "p_hr": (1000.0, 0.0),
    "v_hr": (0.0, 0.0),
}


def mkworld(**over) -> WorldState:
    """A full social-domain world state with humans absent by default."""
    values = dict(_DEFAULTS)
    values.update(over)
    return WorldState(values)


@pytest.fixture(scope="session")
def dom():
    return social_domain()
