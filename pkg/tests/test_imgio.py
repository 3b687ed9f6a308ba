import numpy as np
import pytest
from PIL import Image

from vesselmat import imgio
from vesselmat.errors import FormatError, FovEstimationError, ManifestError

from conftest import require_dataset


def _write_png(path, arr):
    Image.fromarray(arr).save(path)


def test_load_image_identity_1x1(tmp_path):
    p = tmp_path / "one.png"
    _write_png(p, np.zeros((1, 1, 3), np.uint8))
    img = imgio.load_image(p)
    assert img.shape == (1, 1, 3)
    assert img.dtype == np.uint8
    assert tuple(img[0, 0]) == (0, 0, 0)


@pytest.mark.parametrize("suffix,fmt", [(".png", "PNG"), (".ppm", "PPM"),
                                        (".gif", "GIF"), (".tif", "TIFF"),
                                        (".jpg", "JPEG")])
def test_load_image_supported_formats(tmp_path, suffix, fmt):
    p = tmp_path / f"img{suffix}"
    arr = np.full((4, 5, 3), 200, np.uint8)
    Image.fromarray(arr).save(p, format=fmt)
    img = imgio.load_image(p)
    assert img.shape == (4, 5, 3)


def test_load_image_missing_file(tmp_path):
    with pytest.raises(OSError):
        imgio.load_image(tmp_path / "nope.png")


def test_load_image_unsupported_format(tmp_path):
    p = tmp_path / "img.bmp"
    Image.fromarray(np.zeros((2, 2, 3), np.uint8)).save(p, format="BMP")
    with pytest.raises(FormatError):
        imgio.load_image(p)


def test_load_image_garbage_bytes(tmp_path):
    p = tmp_path / "junk.png"
    p.write_bytes(b"this is not an image")
    with pytest.raises(FormatError):
        imgio.load_image(p)


def test_green_channel_values():
    img = np.zeros((1, 3, 3), np.uint8)
    img[0, 0] = (10, 200, 30)
    img[0, 1] = (255, 0, 255)
    img[0, 2] = (0, 0, 0)
    g = imgio.green_channel(img)
    assert g.shape == (1, 3)
    assert g[0, 0] == pytest.approx(200 / 255)
    assert g[0, 1] == 0.0
    assert g[0, 2] == 0.0
    assert g.min() >= 0.0 and g.max() <= 1.0


def test_green_channel_all_black():
    img = np.zeros((5, 7, 3), np.uint8)
    assert (imgio.green_channel(img) == 0.0).all()


def test_fov_mask_passthrough(rng):
    img = rng.integers(0, 255, (10, 10, 3), dtype=np.uint8)
    provided = rng.random((10, 10)) > 0.5
    out = imgio.fov_mask(img, provided=provided)
    assert np.array_equal(out, provided)


def test_fov_mask_uniform_bright_full_frame():
    img = np.full((20, 20, 3), 220, np.uint8)
    assert imgio.fov_mask(img).all()


def test_fov_mask_disc_area_close_to_analytic():
    size, r = 160, 60
    yy, xx = np.ogrid[:size, :size]
    disc = (yy - size // 2) ** 2 + (xx - size // 2) ** 2 <= r * r
    img = np.zeros((size, size, 3), np.uint8)
    img[disc] = 210
    mask = imgio.fov_mask(img)
    assert abs(mask.sum() - np.pi * r * r) <= 0.02 * np.pi * r * r
    assert np.array_equal(mask, disc)


def test_fov_mask_too_small_estimate_errors():
    img = np.zeros((50, 50, 3), np.uint8)
    img[25, 25] = (255, 255, 255)
    with pytest.raises(FovEstimationError):
        imgio.fov_mask(img)


def test_extend_outside_fov_fills_rim():
    gray = np.zeros((20, 20))
    fov = np.zeros((20, 20), bool)
    fov[5:15, 5:15] = True
    gray[fov] = 0.7
    out = imgio.extend_outside_fov(gray, fov, rounds=3)
    assert np.allclose(out[fov], 0.7)
    assert out[4, 10] == pytest.approx(0.7)   # one ring out
    assert out[2, 10] == pytest.approx(0.7)   # three rings out
    assert out[0, 10] == 0.0                  # beyond the extension budget


# --- dataset layouts ------------------------------------------------------------


def _make_drive_tree(root, n=3):
    for sub in ("images", "1st_manual", "mask"):
        (root / "test" / sub).mkdir(parents=True)
    for i in range(1, n + 1):
        Image.fromarray(np.full((6, 5, 3), 120, np.uint8)).save(
            root / "test" / "images" / f"{i:02d}_test.tif")
        Image.fromarray(np.zeros((6, 5), np.uint8)).save(
            root / "test" / "1st_manual" / f"{i:02d}_manual1.gif")
        Image.fromarray(np.full((6, 5), 255, np.uint8)).save(
            root / "test" / "mask" / f"{i:02d}_test_mask.gif")


def test_load_dataset_drive_layout(tmp_path):
    _make_drive_tree(tmp_path, n=3)
    manifest = imgio.load_dataset(tmp_path, "DRIVE")
    assert manifest.name == "DRIVE"
    assert len(manifest) == 3
    names = [e.image.name for e in manifest.entries]
    assert names == sorted(names)
    assert all(e.fov is not None for e in manifest.entries)


def test_load_dataset_drive_missing_gt(tmp_path):
    _make_drive_tree(tmp_path, n=2)
    (tmp_path / "test" / "1st_manual" / "02_manual1.gif").unlink()
    with pytest.raises(ManifestError, match="02_test"):
        imgio.load_dataset(tmp_path, "DRIVE")


def test_load_dataset_deterministic_order(tmp_path):
    _make_drive_tree(tmp_path, n=3)
    a = imgio.load_dataset(tmp_path, "DRIVE")
    b = imgio.load_dataset(tmp_path, "DRIVE")
    assert [e.image for e in a.entries] == [e.image for e in b.entries]


def test_load_dataset_stare_layout(tmp_path):
    (tmp_path / "images").mkdir()
    (tmp_path / "labels-ah").mkdir()
    for i in (1, 2):
        Image.fromarray(np.full((5, 5, 3), 90, np.uint8)).save(
            tmp_path / "images" / f"im{i:04d}.ppm")
        Image.fromarray(np.zeros((5, 5), np.uint8)).save(
            tmp_path / "labels-ah" / f"im{i:04d}.ah.ppm")
    manifest = imgio.load_dataset(tmp_path, "STARE")
    assert len(manifest) == 2


def test_load_dataset_chase_layout(tmp_path):
    (tmp_path / "images").mkdir()
    for name in ("Image_01L", "Image_01R"):
        Image.fromarray(np.full((5, 5, 3), 90, np.uint8)).save(
            tmp_path / "images" / f"{name}.jpg")
        Image.fromarray(np.zeros((5, 5), np.uint8)).save(
            tmp_path / "images" / f"{name}_1stHO.png")
    manifest = imgio.load_dataset(tmp_path, "CHASE_DB1")
    assert len(manifest) == 2
    assert all("1stHO" in e.ground_truth.name for e in manifest.entries)


def test_load_dataset_custom_manifest(tmp_path):
    img = tmp_path / "a.png"
    gt = tmp_path / "a_gt.png"
    Image.fromarray(np.zeros((4, 4, 3), np.uint8)).save(img)
    Image.fromarray(np.zeros((4, 4), np.uint8)).save(gt)
    manifest_file = tmp_path / "list.txt"
    manifest_file.write_text(f"{img.name}\t{gt.name}\n")
    manifest = imgio.load_dataset(manifest_file, "custom")
    assert len(manifest) == 1
    assert manifest.entries[0].image == img.resolve()


def test_load_dataset_custom_missing_path(tmp_path):
    manifest_file = tmp_path / "list.txt"
    manifest_file.write_text("missing.png\talso_missing.png\n")
    with pytest.raises(ManifestError):
        imgio.load_dataset(manifest_file, "custom")


def test_real_drive_has_20_entries():
    root = require_dataset("DRIVE")
    manifest = imgio.load_dataset(root, "DRIVE")
    assert len(manifest) == 20
    img = imgio.load_image(manifest.entries[0].image)
    assert img.shape[:2] == (584, 565)  # height x width


def test_real_stare_has_20_entries():
    root = require_dataset("STARE")
    assert len(imgio.load_dataset(root, "STARE")) == 20


def test_real_chase_has_28_entries():
    root = require_dataset("CHASE_DB1")
    manifest = imgio.load_dataset(root, "CHASE_DB1")
    assert len(manifest) == 28
    img = imgio.load_image(manifest.entries[0].image)
    assert img.shape[:2] == (960, 999)
