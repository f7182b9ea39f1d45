import pytest
from pydantic import ValidationError

from fakemix_toolkit.common.error_handling import BadInputError, NotFoundError
from fakemix_toolkit.neuralref import SeparableConv
from fakemix_toolkit.neuralref.aspp import AsppConfig
from fakemix_toolkit.neuralref.fixtures import (
    AsppFixture,
    ConvFixture,
    TensorFixture,
    default_fixture,
)
from tests.unit.util import SMALL_ASPP_FIXTURE_JSON, assert_json_is_equal


def test_fixture_file_loads(tmp_path):
    path = tmp_path / "fixture.json"
    path.write_text(SMALL_ASPP_FIXTURE_JSON, encoding="utf-8")

    fixture = AsppFixture.load(path)

    assert fixture.config.dilation_rates == [1, 2]
    assert fixture.to_params().branches[1].dilation == 2


def test_saved_fixture_keeps_every_weight(tmp_path):
    fixture = default_fixture(seed=5, height=4, width=4)
    path = tmp_path / "fixture.json"

    fixture.save(path)

    assert_json_is_equal(
        path.read_text(encoding="utf-8"), fixture.model_dump_json()
    )


def test_default_fixture_is_reproducible():
    assert default_fixture(seed=6).model_dump() == default_fixture(seed=6).model_dump()
    assert default_fixture(seed=6).model_dump() != default_fixture(seed=7).model_dump()


def test_separable_fixture_builds_separable_branches():
    cfg = AsppConfig(branch_count=2, dilation_rates=[1, 3], separable=True)

    params = default_fixture(cfg=cfg, height=4, width=4).to_params()

    assert all(isinstance(branch, SeparableConv) for branch in params.branches)


def test_missing_fixture_is_not_found(tmp_path):
    with pytest.raises(NotFoundError):
        AsppFixture.load(tmp_path / "missing.json")


def test_conv_fixture_checks_weight_count():
    with pytest.raises(ValidationError):
        ConvFixture(
            in_channels=1, out_channels=1, kernel_size=3, weight=[0.0], bias=[0.0]
        )


def test_tensor_fixture_checks_data_length():
    fixture = TensorFixture(height=2, width=2, channels=1, data=[0.0, 1.0])

    with pytest.raises(BadInputError):
        fixture.to_tensor()
