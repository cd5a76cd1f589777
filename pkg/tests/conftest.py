from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

from emforms.exterior_algebra import Parity
from emforms.flows import Motion
from emforms.form_fields import add, contract_field, exterior_derivative, random_polynomial_form, time_derivative
from emforms.induction import EMState, electric_field_from_potentials
from emforms.polynomials import Polynomial

settings.register_profile("emforms", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("emforms")


def var(nvars: int, i: int) -> Polynomial:
    return Polynomial.variable(nvars, i)


def const(nvars: int, c: float) -> Polynomial:
    return Polynomial.constant(nvars, c)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def xyz():
    """x, y, z, t as polynomials over R^3 x time."""
    return tuple(var(4, i) for i in range(4))


def faraday_state(rng, m: Motion) -> EMState:
    """E built from a random potential pair, so both Faraday forms hold by construction."""
    F = random_polynomial_form(rng, 3, 1, 2, time_dependent=True)
    V = random_polynomial_form(rng, 3, 0, 2, time_dependent=True)
    B = exterior_derivative(F)
    return EMState(E=electric_field_from_potentials(F, V, m, B), B=B)


def ampere_state(rng, m: Motion) -> EMState:
    """Random H, D; rho = dD and J closes the Ampere law for the motion."""
    H = random_polynomial_form(rng, 3, 1, 2, Parity.ODD, time_dependent=True)
    D = random_polynomial_form(rng, 3, 2, 2, Parity.ODD, time_dependent=True)
    rho = exterior_derivative(D)
    v = m.velocity_field()
    rate = add(add(time_derivative(D), exterior_derivative(contract_field(D, v))), contract_field(rho, v))
    return EMState(H=H, D=D, rho=rho, J=add(exterior_derivative(H), -rate))
