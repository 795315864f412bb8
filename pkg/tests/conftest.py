import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

CORPUS = Path(__file__).resolve().parents[1] / "src" / "fsmforge" / "corpus"


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS
