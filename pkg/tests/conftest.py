"""Shared fixtures: the worked example systems and their reductions."""

from pathlib import Path

import pytest
import sympy as sp

from src.core import kernel
from src.core.parser import load_system
from src.services.hamreduce import run_hamiltonian
from src.services.lagreduce import run_lagrangian
from src.services.phasespace import build_model

SYSTEMS_DIR = Path(__file__).resolve().parent.parent / "systems"
EXAMPLES = ("ex1", "ex2", "ex3", "ex4", "ex5a", "ex5b")

q1, q2, q3 = kernel.q(1), kernel.q(2), kernel.q(3)
v1, v2, v3 = kernel.v(1), kernel.v(2), kernel.v(3)
p1, p2, p3 = kernel.p(1), kernel.p(2), kernel.p(3)
vdot1, vdot2, vdot3 = kernel.multiplier(1), kernel.multiplier(2), kernel.multiplier(3)
beta = sp.Symbol("beta")
U = sp.Function("U")


def system_path(name: str) -> str:
    return str(SYSTEMS_DIR / f"{name}.lag")


def same_up_to_sign(a, b) -> bool:
    return kernel.is_zero(a - b) or kernel.is_zero(a + b)


def model_for(name: str):
    return build_model(load_system(system_path(name)))


@pytest.fixture(scope="session")
def models():
    return {name: model_for(name) for name in EXAMPLES}


@pytest.fixture(scope="session")
def lagrangian_reductions(models):
    return {name: run_lagrangian(model) for name, model in models.items()}


@pytest.fixture(scope="session")
def hamiltonian_reductions(models):
    return {name: run_hamiltonian(model) for name, model in models.items()}
