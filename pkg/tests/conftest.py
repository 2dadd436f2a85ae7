import warnings

import pytest

from inverse_source.harness.problems import example1, example2


@pytest.fixture(scope="session")
def ex1_literal():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return example1()


@pytest.fixture(scope="session")
def ex1_consistent():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return example1(variant="consistent")


@pytest.fixture(scope="session")
def ex2_stated():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return example2()


@pytest.fixture(scope="session")
def ex2_weighted():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return example2(variant="affine-weight")
