import numpy as np
import pytest

from helpers import nonempty_random_mask, oracle_dilate, oracle_iou, rect_mask
from rfaug.errors import DimensionMismatchError, EmptyMaskError, InvalidBoxError
from rfaug.maskops import (
    BoundingBox,
    StructuringElement,
    crop_resize_preserve_aspect,
    dilate,
    mask_area,
    mask_bbox,
    mask_iou,
    normalize_silhouette,
    replicate_pad_to_square,
)


class TestStructuringElement:
    def test_default_is_seven(self):
        assert StructuringElement().size == 7
        assert StructuringElement().radius == 3

    @pytest.mark.parametrize("size", [0, -1, 2, 4, 8])
    def test_rejects_even_or_nonpositive(self, size):
        with pytest.raises(ValueError):
            StructuringElement(size)

    def test_size_one_radius_zero(self):
        assert StructuringElement(1).radius == 0


class TestBoundingBox:
    def test_width_height_inclusive(self):
        box = BoundingBox(2, 3, 5, 7)
        assert box.width == 4
        assert box.height == 5

    def test_rejects_inverted(self):
        with pytest.raises(InvalidBoxError):
            BoundingBox(5, 0, 2, 3)

    def test_rejects_negative(self):
        with pytest.raises(InvalidBoxError):
            BoundingBox(-1, 0, 2, 3)


class TestDilate:
    def test_matches_minkowski_oracle_on_random_masks(self):
        rng = np.random.default_rng(101)
        for trial in range(50):
            mask = (rng.random((16, 16)) < rng.uniform(0.05, 0.6)).astype(np.uint8)
            for size in (1, 3, 7):
                got = dilate(mask, size)
                want = oracle_dilate(mask, size)
                assert np.array_equal(got, want), f"trial {trial} size {size}"

    def test_size_one_is_identity(self):
        rng = np.random.default_rng(5)
        mask = (rng.random((12, 9)) < 0.4).astype(np.uint8)
        out = dilate(mask, 1)
        assert np.array_equal(out, mask)
        assert out is not mask

    def test_empty_stays_empty(self):
        mask = np.zeros((10, 10), dtype=np.uint8)
        assert dilate(mask, 7).sum() == 0

    def test_full_stays_full(self):
        mask = np.ones((10, 10), dtype=np.uint8)
        assert dilate(mask, 7).sum() == 100

    def test_single_center_bit_becomes_square(self):
        mask = np.zeros((9, 9), dtype=np.uint8)
        mask[4, 4] = 1
        out = dilate(mask, 7)
        want = rect_mask(9, 9, 1, 7, 1, 7)
        assert np.array_equal(out, want)

    def test_corner_bit_clips_at_border(self):
        mask = np.zeros((8, 8), dtype=np.uint8)
        mask[0, 0] = 1
        out = dilate(mask, 5)
        want = rect_mask(8, 8, 0, 2, 0, 2)
        assert np.array_equal(out, want)

    def test_does_not_modify_input(self):
        mask = np.zeros((6, 6), dtype=np.uint8)
        mask[3, 3] = 1
        before = mask.copy()
        dilate(mask, 3)
        assert np.array_equal(mask, before)

    def test_accepts_element_object(self):
        mask = np.zeros((6, 6), dtype=np.uint8)
        mask[2, 2] = 1
        assert np.array_equal(dilate(mask, StructuringElement(3)), dilate(mask, 3))


class TestIoU:
    def test_hand_case_shifted_blocks(self):
        # two 2x2 blocks in a 2x3 grid, one column apart: they share one
        # column (2 px) and cover 6 px together
        a = rect_mask(2, 3, 0, 1, 0, 1)
        b = rect_mask(2, 3, 0, 1, 1, 2)
        assert abs(mask_iou(a, b) - (1.0 / 3.0)) <= 1e-12

    def test_symmetry_and_self_on_random_pairs(self):
        rng = np.random.default_rng(77)
        for _ in range(100):
            a = nonempty_random_mask(rng, 15, 11)
            b = nonempty_random_mask(rng, 15, 11)
            ab = mask_iou(a, b)
            ba = mask_iou(b, a)
            assert abs(ab - ba) <= 1e-12
            assert mask_iou(a, a) == 1.0
            assert abs(ab - oracle_iou(a, b)) <= 1e-12

    def test_both_empty_is_zero(self):
        z = np.zeros((4, 4), dtype=np.uint8)
        assert mask_iou(z, z) == 0.0

    def test_disjoint_is_zero(self):
        a = rect_mask(4, 4, 0, 1, 0, 1)
        b = rect_mask(4, 4, 2, 3, 2, 3)
        assert mask_iou(a, b) == 0.0

    def test_shape_mismatch_raises(self):
        with pytest.raises(DimensionMismatchError):
            mask_iou(np.zeros((4, 4), dtype=np.uint8), np.zeros((4, 5), dtype=np.uint8))

    def test_rejects_non_mask_dtype(self):
        with pytest.raises(ValueError):
            mask_iou(np.zeros((4, 4)), np.zeros((4, 4)))


class TestBBoxAndArea:
    def test_bbox_known_rect(self):
        mask = rect_mask(10, 12, 2, 5, 3, 9)
        assert mask_bbox(mask) == BoundingBox(3, 2, 9, 5)

    def test_bbox_single_pixel(self):
        mask = np.zeros((5, 5), dtype=np.uint8)
        mask[2, 4] = 1
        assert mask_bbox(mask) == BoundingBox(4, 2, 4, 2)

    def test_bbox_empty_raises(self):
        with pytest.raises(EmptyMaskError):
            mask_bbox(np.zeros((5, 5), dtype=np.uint8))

    def test_area_counts_bits(self):
        assert mask_area(rect_mask(6, 6, 1, 2, 1, 3)) == 6


class TestCropResize:
    def test_identity_when_crop_matches_target(self):
        rng = np.random.default_rng(3)
        img = rng.integers(0, 256, size=(20, 30, 3), dtype=np.uint8)
        box = BoundingBox(5, 4, 14, 13)  # 10x10 crop
        out = crop_resize_preserve_aspect(img, box, (10, 10))
        assert np.array_equal(out, img[4:14, 5:15])

    def test_mask_identity_when_crop_matches_target(self):
        rng = np.random.default_rng(4)
        mask = (rng.random((16, 16)) < 0.5).astype(np.uint8)
        box = BoundingBox(0, 0, 15, 15)
        assert np.array_equal(crop_resize_preserve_aspect(mask, box, (16, 16)), mask)

    def test_wide_crop_letterboxes_vertically(self):
        mask = np.ones((10, 20), dtype=np.uint8)
        out = crop_resize_preserve_aspect(mask, BoundingBox(0, 0, 19, 9), (40, 40))
        # scale 2 -> 40x20 centred: rows 10..29 set, margins empty
        assert out.shape == (40, 40)
        assert out[10:30].all()
        assert not out[:10].any()
        assert not out[30:].any()

    def test_mask_output_is_binary(self):
        rng = np.random.default_rng(9)
        mask = nonempty_random_mask(rng, 13, 7)
        out = crop_resize_preserve_aspect(mask, BoundingBox(0, 0, 6, 12), (32, 32))
        assert set(np.unique(out)) <= {0, 1}

    def test_box_outside_raster_raises(self):
        mask = np.ones((8, 8), dtype=np.uint8)
        with pytest.raises(InvalidBoxError):
            crop_resize_preserve_aspect(mask, BoundingBox(0, 0, 8, 7), (4, 4))

    def test_bad_target_raises(self):
        mask = np.ones((8, 8), dtype=np.uint8)
        with pytest.raises(ValueError):
            crop_resize_preserve_aspect(mask, BoundingBox(0, 0, 7, 7), (0, 4))

    def test_normalize_silhouette_shape_and_fit(self):
        mask = rect_mask(50, 60, 10, 39, 20, 29)  # 30 tall, 10 wide
        sil = normalize_silhouette(mask, 60)
        assert sil.shape == (60, 60)
        ys, xs = np.nonzero(sil)
        # tall crop scales to full height, width 20, centred
        assert ys.min() == 0 and ys.max() == 59
        assert xs.min() == 20 and xs.max() == 39


class TestReplicatePad:
    def test_two_by_four_example(self):
        img = np.zeros((2, 4, 3), dtype=np.uint8)
        img[0] = 10
        img[1] = 20
        mask = np.array([[0, 1, 1, 0], [0, 1, 0, 0]], dtype=np.uint8)
        pimg, pmask = replicate_pad_to_square(img, mask)
        assert pimg.shape == (4, 4, 3)
        # top border replicates row 0, bottom border replicates row 1
        assert (pimg[0] == 10).all() and (pimg[1] == 10).all()
        assert (pimg[2] == 20).all() and (pimg[3] == 20).all()
        want_mask = np.zeros((4, 4), dtype=np.uint8)
        want_mask[1] = [0, 1, 1, 0]
        want_mask[2] = [0, 1, 0, 0]
        assert np.array_equal(pmask, want_mask)

    def test_odd_difference_pads_after(self):
        img = np.arange(3 * 4 * 3, dtype=np.uint8).reshape(3, 4, 3)
        mask = np.ones((3, 4), dtype=np.uint8)
        pimg, pmask = replicate_pad_to_square(img, mask)
        assert pimg.shape == (4, 4, 3)
        # (4-3)//2 == 0 rows before, 1 after
        assert np.array_equal(pimg[:3], img)
        assert np.array_equal(pimg[3], img[2])
        assert np.array_equal(pmask[:3], mask)
        assert not pmask[3].any()

    def test_tall_input_pads_columns(self):
        img = np.zeros((4, 2, 3), dtype=np.uint8)
        img[:, 0] = 5
        img[:, 1] = 9
        mask = np.ones((4, 2), dtype=np.uint8)
        pimg, pmask = replicate_pad_to_square(img, mask)
        assert pimg.shape == (4, 4, 3)
        assert (pimg[:, 0] == 5).all() and (pimg[:, 1] == 5).all()
        assert (pimg[:, 2] == 9).all() and (pimg[:, 3] == 9).all()
        assert not pmask[:, 0].any() and not pmask[:, 3].any()
        assert pmask[:, 1:3].all()

    def test_square_input_returns_copies(self):
        img = np.ones((5, 5, 3), dtype=np.uint8)
        mask = np.zeros((5, 5), dtype=np.uint8)
        pimg, pmask = replicate_pad_to_square(img, mask)
        assert np.array_equal(pimg, img) and pimg is not img
        assert np.array_equal(pmask, mask) and pmask is not mask

    def test_mismatched_shapes_raise(self):
        with pytest.raises(DimensionMismatchError):
            replicate_pad_to_square(
                np.zeros((4, 4, 3), dtype=np.uint8), np.zeros((4, 5), dtype=np.uint8)
            )
