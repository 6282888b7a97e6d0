from importlib import resources

import pytest

from ksba.curveconfig import load_config

DATA = resources.files("ksba") / "data"
CONFIGS = ("s31", "s32", "s33", "s41", "s42", "s43")


@pytest.fixture(scope="session")
def configs():
    return {name: load_config(DATA / f"{name}.json") for name in CONFIGS}
