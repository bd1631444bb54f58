import math

import numpy as np
import pytest

import qfibounds as q


@pytest.fixture
def single_qubit_beta1():
    H, O = q.single_qubit_model(0.0)
    return O, q.prepared_gibbs(H, O, 1.0)


@pytest.fixture
def tfim3():
    model = q.ModelSpec(3, 0.4, 0.05)
    H, O = q.build_tfim(model)
    return model, O, q.prepared_gibbs(H, O, 1.5)


def random_instance(dim, beta, seed):
    H = q.random_hermitian(dim, seed)
    O = q.random_hermitian(dim, seed + 10_000)
    return H, O, q.prepared_gibbs(H, O, beta)


def rel_close(a, b, rel=1e-9, abs_=1e-12):
    return math.isclose(a, b, rel_tol=rel, abs_tol=abs_)
