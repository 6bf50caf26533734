from __future__ import annotations

import sys
from pathlib import Path

import pytest

from discocheck.checker import merge_model
from discocheck.dsl import load_workspace, parse_source, resolve
from discocheck.metamodel import declare_metamodel

SAMPLES = Path(__file__).resolve().parent.parent / "samples"
CIRCULATION = SAMPLES / "circulation.disco"
DOUBLE_OWNER = SAMPLES / "double_owner.disco"

sys.path.insert(0, str(Path(__file__).resolve().parent))


def workspace_of(text: str):
    return resolve(parse_source(text))


def merged(text: str, model: str = "M"):
    ws = workspace_of(text)
    return merge_model(ws.models[model], ws)


@pytest.fixture(scope="session")
def catalog():
    return declare_metamodel()


@pytest.fixture(scope="session")
def circulation_ws():
    return load_workspace([CIRCULATION])


@pytest.fixture(scope="session")
def circulation(circulation_ws):
    return merge_model(circulation_ws.models["CirculationModel"], circulation_ws)


@pytest.fixture(scope="session")
def double_owner_ws():
    return load_workspace([DOUBLE_OWNER])
