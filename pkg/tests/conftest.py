import warnings

import pytest

from kramers_sep.errors import EvaluationWarning


@pytest.fixture(autouse=True)
def _quiet_clamping():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EvaluationWarning)
        yield
