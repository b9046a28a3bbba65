import pytest

from gridocr.datasets import export_digits_corpus
from gridocr.model_io import read_index, split_entries


@pytest.fixture(scope="session")
def corpus_index(tmp_path_factory):
    """Index of the bundled digit corpus, exported once per test session."""
    dest = tmp_path_factory.mktemp("corpus")
    return export_digits_corpus(dest, scale=8)


@pytest.fixture(scope="session")
def corpus_split(corpus_index):
    """(train entries, test entries): 50 test images per class, seed 0."""
    entries = read_index(corpus_index)
    return split_entries(entries, test_per_class=50, seed=0)
