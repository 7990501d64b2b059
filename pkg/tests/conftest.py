from __future__ import annotations

import pytest

from fixtures import write_aligned_fixtures, write_lexicons


@pytest.fixture()
def aligned10(tmp_path):
    return write_aligned_fixtures(tmp_path / "data", 10, seed=3)


@pytest.fixture()
def lexicon_paths(tmp_path):
    return write_lexicons(tmp_path / "lex")
