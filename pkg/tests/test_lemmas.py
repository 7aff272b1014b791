import pytest

from lemmas import CHECKS


@pytest.mark.parametrize("name", list(CHECKS))
def test_lemma_has_no_violations(name):
    assert CHECKS[name]() == []
