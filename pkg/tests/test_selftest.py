from __future__ import annotations

import json

import numpy as np

from emforms.flows import Motion
from emforms.form_fields import unit_cube_lattice
from emforms.induction import charge_balance_pointwise
from emforms.selftest import SEED, Check, charge_states, magnetic_states, run_selftest, selftest_json


def test_suite_passes_and_is_complete():
    report = run_selftest()
    assert report["pass"] is True
    assert report["seed"] == SEED
    names = {c["name"].split(":")[0] for c in report["checks"]}
    assert {"stokes", "convective", "poincare", "galilei", "spacetime", "orientation", "wellposedness"} <= names
    assert all(c["pass"] for c in report["checks"])


def test_deterministic():
    assert selftest_json() == selftest_json()
    json.loads(selftest_json(7))


def test_check_threshold_inclusive():
    assert Check("a", 1e-5, 1e-5).passed
    assert not Check("a", 2e-5, 1e-5).passed
    assert Check("zero", 0.0, 0.0).passed


def test_state_builders():
    rng = np.random.default_rng(1)
    mags = magnetic_states(rng, 3, 1)
    assert len(mags) == 3
    m = Motion.rotation(0.7)
    states = charge_states(rng, m, 3, 1)
    pts = unit_cube_lattice(3, 3)
    balanced = [charge_balance_pointwise(s.rho, s.J, m, 0.0, pts) for s in states]
    assert len(states) == 3
    assert max(balanced[:2]) <= 1e-4 and balanced[2] > 0.5
