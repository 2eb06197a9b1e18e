import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from core.errors import (
    ArgumentError,
    CorruptImageError,
    DimensionError,
    ImageNotFoundError,
    ManifestError,
    UnsupportedFormatError,
)
from core.loss import pair_sqdist
from tools.dataset import Dataset, PhotoSketchPair, crop_samples, crop_window, full_samples
from tools.image_io import decode_netpbm, encode_netpbm, load_image, save_image, to_uint8
from tools.manifest import ManifestRecord, load_dataset, parse_manifest, read_manifest, write_manifest
from tools.preprocess import (
    add_xy_channels,
    align_by_eyes,
    crop_center,
    photo_channels,
    prepare_photo,
    prepare_sketch,
    similarity_matrix,
    strip_xy_channels,
    to_grayscale,
    xy_channels_for,
)
from tools.synth import sketch_transform, synth_pairs


def _smooth_image(rng, channels=3, h=250, w=200):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = np.zeros((channels, h, w))
    for c in range(channels):
        for _ in range(4):
            cy, cx, s = rng.uniform(0, h), rng.uniform(0, w), rng.uniform(20, 50)
            img[c] += rng.uniform(40, 120) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
    return np.clip(img, 0, 255).astype(np.float32)


# ── Image files ──────────────────────────────────────────────────────────────

def test_pgm_values_survive(tmp_path):
    path = tmp_path / "tiny.pgm"
    path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 85, 170, 255]))
    img = load_image(path)
    assert img.shape == (1, 2, 2)
    assert_array_equal(img[0], [[0, 85], [170, 255]])


def test_ppm_is_channel_major(tmp_path):
    path = tmp_path / "tiny.ppm"
    path.write_bytes(b"P6 2 1 255\n" + bytes([255, 0, 0, 0, 0, 255]))
    img = load_image(path)
    assert img.shape == (3, 1, 2)
    assert_array_equal(img[:, 0, 0], [255, 0, 0])
    assert_array_equal(img[:, 0, 1], [0, 0, 255])


def test_netpbm_header_comments_and_16_bit():
    blob = b"P5\n# made by hand\n1 2\n# another\n65535\n" + np.array([0, 65535], dtype=">u2").tobytes()
    assert_allclose(decode_netpbm(blob)[0, :, 0], [0.0, 255.0])


def test_image_errors_are_distinct(tmp_path):
    with pytest.raises(ImageNotFoundError):
        load_image(tmp_path / "missing.pgm")

    empty = tmp_path / "empty.pgm"
    empty.write_bytes(b"")
    with pytest.raises(CorruptImageError):
        load_image(empty)

    text = tmp_path / "ascii.pgm"
    text.write_bytes(b"P2\n1 1\n255\n7\n")
    with pytest.raises(UnsupportedFormatError):
        load_image(text)

    other = tmp_path / "photo.jpg"
    other.write_bytes(b"\xff\xd8\xff\xe0 not really")
    with pytest.raises(UnsupportedFormatError):
        load_image(other)

    short = tmp_path / "short.pgm"
    short.write_bytes(b"P5\n4 4\n255\n" + bytes(5))
    with pytest.raises(CorruptImageError, match="truncated"):
        load_image(short)


def test_writers_clamp_and_round_half_to_even(tmp_path):
    assert_array_equal(to_uint8(np.array([[[-3.0, 0.5, 1.5, 2.5, 300.0]]])), [[[0, 0, 2, 2, 255]]])
    img = np.array([[[12.0, 200.0]]])
    assert encode_netpbm(img) == b"P5\n2 1\n255\n" + bytes([12, 200])
    assert_array_equal(load_image(save_image(img, tmp_path / "a.pgm")), img)


def test_png_round_trip(tmp_path, rng):
    img = np.round(rng.uniform(0, 255, size=(3, 5, 4)))
    assert_array_equal(load_image(save_image(img, tmp_path / "a.png")), img)


# ── Alignment and crops ──────────────────────────────────────────────────────

def test_canonical_eyes_give_identity_transform(rng):
    img = _smooth_image(rng)
    assert_allclose(similarity_matrix((75, 125), (125, 125)), [[1, 0, 0], [0, 1, 0]], atol=1e-12)
    out = align_by_eyes(img, (75.0, 125.0), (125.0, 125.0))
    assert out.shape == (3, 250, 200)
    assert_allclose(out, img, atol=1e-3)


def test_swapped_eyes_rotate_by_180_degrees(rng):
    img = _smooth_image(rng, h=500, w=460)
    left, right = (200.0, 240.0), (270.0, 250.0)
    straight = align_by_eyes(img, left, right)
    swapped = align_by_eyes(img, right, left)
    # point reflection about the canonical midpoint (100, 125): (x, y) -> (200 - x, 250 - y)
    assert_allclose(swapped[:, 1:, 1:], straight[:, :0:-1, :0:-1], atol=0.5)


def test_eye_markers_land_on_canonical_positions():
    h, w = 320, 280
    left, right = (96.3, 151.7), (171.8, 139.2)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = np.zeros((1, h, w), dtype=np.float32)
    for x, y in (left, right):
        img[0] += (250 * np.exp(-((yy - y) ** 2 + (xx - x) ** 2) / (2 * 1.5 ** 2))).astype(np.float32)
    out = align_by_eyes(img, left, right)[0]
    for cx, cy in ((75, 125), (125, 125)):
        window = out[cy - 10:cy + 11, cx - 10:cx + 11]
        py, px = np.unravel_index(np.argmax(window), window.shape)
        assert abs(py - 10) <= 1 and abs(px - 10) <= 1


def test_alignment_argument_errors(rng):
    img = _smooth_image(rng)
    with pytest.raises(ArgumentError):
        align_by_eyes(img, (80.0, 120.0), (80.0, 120.0))
    with pytest.raises(ArgumentError):
        align_by_eyes(img, (-5.0, 120.0), (80.0, 120.0))


def test_crop_center_margins():
    img = np.arange(250 * 200, dtype=np.float64).reshape(1, 250, 200)
    out = crop_center(img, 200, 155)
    assert out.shape == (1, 200, 155)
    assert out[0, 0, 0] == img[0, 25, 22]
    assert out[0, -1, -1] == img[0, 224, 176]

    sketch = crop_center(out, 188, 143)
    assert sketch[0, 0, 0] == out[0, 6, 6]
    assert_array_equal(crop_center(img, 250, 200), img)
    with pytest.raises(DimensionError):
        crop_center(img, 251, 10)


def test_xy_channels():
    photo = np.full((3, 2, 2), 9.0)
    out = add_xy_channels(photo)
    assert out.shape == (5, 2, 2)
    assert_array_equal(out[:3], photo)
    assert_array_equal(out[3], [[0, 0], [255, 255]])
    assert_array_equal(out[4], [[0, 255], [0, 255]])

    wide = add_xy_channels(np.zeros((3, 200, 155)))
    assert wide[3:, 0, 0].tolist() == [0.0, 0.0]
    assert wide[4, 0, 77] == pytest.approx(127.5)
    with pytest.raises(DimensionError):
        add_xy_channels(np.zeros((1, 4, 4)))


def test_xy_channels_strip_back_to_the_photo(rng):
    photo = rng.uniform(0, 255, size=(3, 17, 11)).astype(np.float32)
    out = add_xy_channels(photo)
    assert out.shape[0] == photo_channels(True)
    assert_array_equal(strip_xy_channels(out), photo)
    assert strip_xy_channels(out).flags["C_CONTIGUOUS"]


def test_xy_channels_for_network_inputs():
    assert xy_channels_for(5) is True
    assert xy_channels_for(3) is False
    with pytest.raises(DimensionError, match="4 input channels"):
        xy_channels_for(4)


def test_grayscale_luma():
    assert to_grayscale(np.full((3, 1, 1), 255.0))[0, 0, 0] == pytest.approx(255.0)
    assert to_grayscale(np.array([[[255.0]], [[0.0]], [[0.0]]]))[0, 0, 0] == pytest.approx(76.245)
    assert to_grayscale(np.full((3, 2, 2), 37.0))[0, 0, 0] == pytest.approx(37.0)
    with pytest.raises(DimensionError):
        to_grayscale(np.zeros((1, 2, 2)))


def test_prepare_photo_and_sketch_shapes(rng):
    img = _smooth_image(rng, h=270, w=230)
    eyes = ((90.0, 130.0), (140.0, 131.0))
    assert prepare_photo(img, eyes).shape == (5, 200, 155)
    assert prepare_photo(img[:1], None, xy_channels=False).shape == (3, 200, 155)
    assert prepare_sketch(img, eyes).shape == (1, 188, 143)
    assert prepare_sketch(img[:1, :200, :155]).shape == (1, 188, 143)


def test_preprocessing_is_deterministic(rng):
    img = _smooth_image(rng, h=270, w=230)
    eyes = ((90.0, 130.0), (140.0, 131.0))
    assert prepare_photo(img, eyes).tobytes() == prepare_photo(img.copy(), eyes).tobytes()
    assert prepare_sketch(img, eyes).tobytes() == prepare_sketch(img.copy(), eyes).tobytes()


# ── Pairs, datasets and crops ────────────────────────────────────────────────

def test_pair_validation(synth4):
    pair = synth4.pairs[0]
    with pytest.raises(DimensionError):
        PhotoSketchPair(pair.photo[:, :100], pair.sketch, "x")
    with pytest.raises(ArgumentError):
        PhotoSketchPair(pair.photo, pair.sketch + 300, "x")


def test_dataset_rejects_duplicate_identities(synth4):
    with pytest.raises(ArgumentError, match="synth-0001"):
        Dataset((synth4.pairs[0], synth4.pairs[0]))


def test_subset_and_split(synth4):
    assert synth4.subset(2).identities == ("synth-0001", "synth-0002")
    train, test = synth4.split_at(3)
    assert (len(train), len(test), test.split) == (3, 1, "test")
    with pytest.raises(ArgumentError):
        synth4.subset(5)
    for bad in (0, 4):
        with pytest.raises(ArgumentError):
            synth4.split_at(bad)


def test_full_samples_match_network_geometry(synth4):
    sample = full_samples(synth4)[0]
    assert sample.inputs.shape == (5, 200, 155)
    assert sample.target.shape == (1, 188, 143)
    assert full_samples(synth4, xy_channels=False)[0].inputs.shape == (3, 200, 155)


def test_crop_target_covers_the_network_output_region(rng):
    photo = rng.uniform(0, 255, size=(3, 200, 155)).astype(np.float32)
    pair = PhotoSketchPair(photo, crop_center(to_grayscale(photo), 188, 143), "p")
    size, shrink = 21, 4
    sample = crop_window(pair, size, shrink)
    assert sample.inputs.shape == (5, 21, 21)
    assert sample.target.shape == (1, 17, 17)
    # the target is the grayscale of the photo window minus shrink/2 on every side
    inner = to_grayscale(sample.inputs[:3])[:, 2:-2, 2:-2]
    assert_allclose(sample.target, inner, rtol=1e-6)
    # XY channels keep the window's position in the full photo
    top, left = (200 - 21) // 2, (155 - 21) // 2
    assert sample.inputs[3, 0, 0] == pytest.approx(top * 255 / 199)
    assert sample.inputs[4, 0, 0] == pytest.approx(left * 255 / 154)


def test_crop_size_limits(synth4):
    with pytest.raises(ArgumentError):
        crop_samples(synth4, 4, 4)
    with pytest.raises(ArgumentError):
        crop_samples(synth4, 156, 0)


# ── Synthetic pairs ──────────────────────────────────────────────────────────

def test_synth_is_deterministic():
    assert synth_pairs(5, 3) == synth_pairs(5, 3)
    assert synth_pairs(5, 3) != synth_pairs(6, 3)


def test_synth_prefix_property():
    assert synth_pairs(2, 2) == synth_pairs(2, 4).subset(2)


def test_synth_invariants():
    data = synth_pairs(0, 10)
    assert len(set(data.identities)) == 10
    assert data.identities[0] == "synth-0001" and data.identities[-1] == "synth-0010"
    for pair in data.pairs:
        assert pair.photo.shape == (3, 200, 155)
        assert pair.sketch.shape == (1, 188, 143)
    with pytest.raises(ArgumentError):
        synth_pairs(0, 0)


def test_each_sketch_is_closest_to_its_own_photo():
    data = synth_pairs(1, 10)
    redrawn = [sketch_transform(p.photo) for p in data.pairs]
    for i, pair in enumerate(data.pairs):
        dists = [pair_sqdist(pair.sketch, r) for r in redrawn]
        assert int(np.argmin(dists)) == i
        assert sorted(dists)[0] < sorted(dists)[1]


# ── Manifests ────────────────────────────────────────────────────────────────

def test_parse_manifest_fields(tmp_path):
    text = (
        "# photo,sketch,identity\n"
        "p/a.ppm, s/a.pgm, alice\n"
        "\n"
        "p/b.ppm,s/b.pgm,bob,10,20,30,21   # eyes\n"
        "/abs/c.ppm,s/c.pgm,carol,1,2,3,4,5,6,7,8\n"
    )
    records = parse_manifest(text, tmp_path)
    assert [r.identity for r in records] == ["alice", "bob", "carol"]
    assert records[0].photo == tmp_path / "p/a.ppm" and records[0].photo_eyes is None
    assert records[1].photo_eyes == ((10.0, 20.0), (30.0, 21.0))
    assert records[1].sketch_eyes == records[1].photo_eyes
    assert str(records[2].photo) == "/abs/c.ppm"
    assert records[2].sketch_eyes == ((5.0, 6.0), (7.0, 8.0))


@pytest.mark.parametrize("line", [
    "a.ppm,b.pgm", "a.ppm,b.pgm,x,1,2", "a.ppm,b.pgm,x,1,2,3,y", ",b.pgm,x", '"a.ppm,b.pgm,x',
])
def test_manifest_errors_name_the_line(tmp_path, line):
    with pytest.raises(ManifestError, match="m.csv:2"):
        parse_manifest(f"ok.ppm,ok.pgm,ok\n{line}\n", tmp_path, source="m.csv")


def test_quoted_fields_keep_commas_and_hashes(tmp_path):
    text = '"p/smith, j.ppm","s/#7.pgm", "smith, j",1,2,3,4  # eyes\n'
    (record,) = parse_manifest(text, tmp_path)
    assert record.photo == tmp_path / "p/smith, j.ppm"
    assert record.sketch == tmp_path / "s/#7.pgm"
    assert record.identity == "smith, j"
    assert record.photo_eyes == ((1.0, 2.0), (3.0, 4.0))

    path = write_manifest([record], tmp_path / "m.csv")
    assert read_manifest(path) == [record]


def test_empty_manifest(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("# nothing\n")
    with pytest.raises(ManifestError):
        read_manifest(path)


def test_manifest_round_trip_and_loading(tmp_path, synth4):
    records = []
    for pair in reversed(synth4.pairs):
        photo = save_image(pair.photo, tmp_path / "photos" / f"{pair.identity}.ppm")
        sketch = save_image(pair.sketch, tmp_path / "sketches" / f"{pair.identity}.pgm")
        records.append(ManifestRecord(photo, sketch, pair.identity))
    path = write_manifest(records, tmp_path / "manifest.csv", header="test")
    assert "photos/synth-0004.ppm" in path.read_text()
    assert read_manifest(path) == records

    loaded = load_dataset(path)
    assert loaded.identities == synth4.identities
    for a, b in zip(loaded.pairs, synth4.pairs):
        assert_allclose(a.photo, b.photo, atol=0.5)
        assert_allclose(a.sketch, b.sketch, atol=0.5)
    assert load_dataset(path, threads=3) == loaded
