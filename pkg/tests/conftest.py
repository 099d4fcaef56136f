import pytest

from fibcheck.models import (builtin_fibration, chain_doctrine,
                             random_fibration, s0, sub_finset, sum_free, triv)


@pytest.fixture(scope="session")
def fib_s0():
    return s0()


@pytest.fixture(scope="session")
def sub2():
    return sub_finset(2)


def corpus_random(n=50):
    """The random half of the acceptance corpus: bases up to 3 objects,
    fibres up to 4 objects, a sprinkle of non-thin fibres."""
    out = []
    for seed in range(n):
        base_size = 1 + seed % 3
        fibre_size = 1 + seed % 4
        out.append(random_fibration(seed, base_size, fibre_size,
                                    allow_nonthin=(seed % 7 == 3)))
    return out


def corpus_builtins():
    return [triv("one"), triv("c2"), s0(), chain_doctrine([1, 2, 2]),
            sum_free("c2", [1, 2]), sub_finset(2)]
