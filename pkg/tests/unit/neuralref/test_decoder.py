import numpy as np
import pytest

from fakemix_toolkit.common.error_handling import ShapeMismatchError
from fakemix_toolkit.imagecore import ImageTensor, SeededRng, upsample_bilinear
from fakemix_toolkit.neuralref import (
    ConvParams,
    DecoderState,
    decoder_forward,
    decoder_fuse_bnd,
    decoder_fuse_seg,
    visualize_features,
)

CHANNELS = 2


def _features(seed: int, sizes=(16, 8, 4, 2)) -> list[ImageTensor]:
    generator = SeededRng(seed=seed).generator
    return [ImageTensor(generator.normal(size=(s, s, CHANNELS))) for s in sizes]


def test_segmentation_fusion_attends_to_boundaries():
    z_s, z_b = _features(1, (4,))[0], _features(2, (4,))[0]

    out = decoder_fuse_seg(z_s, z_b, None, ConvParams.identity(CHANNELS))

    np.testing.assert_allclose(out.data, z_s.data + z_s.data * z_b.data)


def test_fusion_adds_the_upsampled_stage_above():
    z_s, z_b = _features(1, (8,))[0], _features(2, (8,))[0]
    above = _features(3, (4,))[0]

    out = decoder_fuse_seg(z_s, z_b, above, ConvParams.identity(CHANNELS))

    expected = z_s.data + z_s.data * z_b.data + upsample_bilinear(above, 8, 8).data
    np.testing.assert_allclose(out.data, expected)


def test_boundary_fusion_ignores_segmentation():
    z_b = _features(2, (4,))[0]

    out = decoder_fuse_bnd(z_b, None, ConvParams.identity(CHANNELS))

    assert out.same_as(z_b)


def test_forward_runs_coarsest_to_finest():
    z_seg, z_bnd = _features(1), _features(2)
    identity = [ConvParams.identity(CHANNELS)] * 4

    state = decoder_forward(z_seg, z_bnd, identity, identity)

    coarsest = z_seg[3].data + z_seg[3].data * z_bnd[3].data
    np.testing.assert_allclose(state.m_seg[3].data, coarsest)
    assert [m.shape for m in state.m_seg] == [(s, s, CHANNELS) for s in (16, 8, 4, 2)]
    assert state.m_bnd[0].shape == (16, 16, CHANNELS)


def test_stage_sizes_must_halve():
    with pytest.raises(ShapeMismatchError):
        DecoderState(z_seg=_features(1, (16, 4)), z_bnd=_features(2, (16, 4)))


def test_one_conv_per_stage():
    identity = [ConvParams.identity(CHANNELS)] * 3

    with pytest.raises(ShapeMismatchError):
        decoder_forward(_features(1), _features(2), identity, identity)


def test_channels_of_the_stage_above_must_match():
    above = ImageTensor.zeros(2, 2, 3)

    with pytest.raises(ShapeMismatchError):
        decoder_fuse_bnd(_features(2, (4,))[0], above, ConvParams.identity(CHANNELS))


def test_visualisation_is_normalised_channel_max():
    m = ImageTensor(np.stack([np.array([[0.0, 1.0], [2.0, 4.0]]), np.zeros((2, 2))], 2))

    picture = visualize_features(m)

    np.testing.assert_allclose(picture.data[:, :, 0], [[0.0, 0.25], [0.5, 1.0]])


def test_visualisation_of_a_constant_map_is_blank():
    picture = visualize_features(ImageTensor.full(3, 3, 2, 0.7))

    assert not picture.data.any()
