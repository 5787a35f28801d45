from __future__ import annotations

from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


import pathlib

import pytest


@pytest.fixture(scope="session")
def configs_dir() -> pathlib.Path:
    return pathlib.Path(__file__).resolve().parents[1] / "configs"
