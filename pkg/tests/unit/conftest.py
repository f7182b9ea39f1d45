"""
pytest fixtures to be used by unit tests
"""

import pytest

from fakemix_toolkit.manifest import MANIFEST_NAME, Manifest
from fakemix_toolkit.synth import SynthConfig, write_dataset


@pytest.fixture(name="synth_manifest")
def synth_manifest_fixture(tmp_path) -> Manifest:
    """
    A small synthetic dataset written to a temporary directory, returned as
    its loaded manifest
    """
    root = tmp_path / "data"
    write_dataset(root, SynthConfig(count=4, size=16, seed=3))
    return Manifest.load(root / MANIFEST_NAME)
