import numpy as np
import pytest
from hypothesis import settings

from reddpipe.corpus import PageRecord

settings.register_profile("ci", derandomize=True, max_examples=50, deadline=None)
settings.load_profile("ci")


def page(
    page_id,
    domain="site.example",
    language="en",
    reduced=None,
    full=None,
    categories=(),
    label=None,
    split=None,
    text="",
):
    """Terse PageRecord builder for tests."""
    return PageRecord(
        page_id=page_id,
        domain=domain,
        language=language,
        text=text,
        embedding_full=full,
        embedding_reduced=reduced,
        categories=frozenset(categories),
        label=label,
        split=split,
    )


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
