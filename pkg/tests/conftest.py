"""Shared fixtures and synthetic-corpus builders for the test suite."""

import numpy as np
import pytest

from hopchain import kernels
from hopchain.corpus import Corpus, Fact

# Small word pool for randomized corpora; none of these are stopwords.
WORDS = [
    "wind", "solar", "heat", "current", "turbine", "panel", "cloud", "rain",
    "river", "dam", "coal", "steam", "magnet", "copper", "light", "plant",
    "sugar", "cell", "oxygen", "carbon", "water", "soil", "rock", "sand",
    "glass", "metal", "motor", "wire", "charge", "field", "wave", "sound",
    "energy", "force", "speed", "mass", "orbit", "moon", "tide", "storm",
]


def random_corpus(rng: np.random.Generator, n_facts: int, words_per_fact=(3, 8)) -> Corpus:
    lo, hi = words_per_fact
    facts = []
    for i in range(n_facts):
        length = int(rng.integers(lo, hi + 1))
        tokens = [WORDS[int(w)] for w in rng.integers(0, len(WORDS), size=length)]
        facts.append(Fact(id=f"f{i:04d}", text=" ".join(tokens)))
    return Corpus(facts=facts)


def random_query_tokens(rng: np.random.Generator, max_terms=4) -> frozenset:
    count = int(rng.integers(1, max_terms + 1))
    return frozenset(WORDS[int(w)] for w in rng.integers(0, len(WORDS), size=count))


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timed tests measure work, not JIT."""
    kernels.warmup()
