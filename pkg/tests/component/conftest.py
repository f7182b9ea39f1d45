import pytest

from fakemix_toolkit.app import main
from fakemix_toolkit.manifest import MANIFEST_NAME


@pytest.fixture(name="dataset")
def dataset_fixture(tmp_path):
    """
    A synthetic dataset written through the synth command, returned as the
    path of its manifest
    """
    out = tmp_path / "data"
    args = ["synth", "--count", "6", "--size", "32", "--seed", "1"]
    assert main(args + ["--out", str(out)]) == 0
    return out / MANIFEST_NAME
