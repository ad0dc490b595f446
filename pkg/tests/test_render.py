import numpy as np
from PIL import Image
import pytest

from cantor_rings.cantor_exception import DomainError
from cantor_rings.const import (
    INNER_COLOR,
    INNER_SHADES,
    OUTCOME_INNER,
    OUTCOME_OUTER,
    OUTER_SHADES,
    RenderMode,
)
from cantor_rings.dynamics import Classification
from cantor_rings.render import (
    RenderJob,
    itinerary_palette,
    job_for_preset,
    prefix_colours,
    ppm_bytes,
    render,
    transitions,
    write_image,
)


@pytest.fixture
def basin_job(fig1_map, fig1_report):
    return RenderJob(fig1_map, fig1_report.layout, 0j, 0.15, 32, 24, max_iter=200)


def test_render_shape_and_determinism(basin_job):
    image = render(basin_job, threads=4)
    assert image.shape == (24, 32, 3)
    assert image.dtype == np.uint8
    assert np.array_equal(image, render(basin_job, threads=1))


def test_inner_trap_is_flat(fig1_map, fig1_report):
    layout = fig1_report.layout
    job = RenderJob(fig1_map, layout, 0j, layout.inner.radius / 4, 16, 16)
    image = render(job)
    assert np.all(image == np.array(INNER_COLOR, dtype=np.uint8))
    assert all(transitions(row) == 0 for row in image)


def test_escape_mode_uses_shades(fig1_map, fig1_report):
    job = RenderJob(
        fig1_map, fig1_report.layout, 0j, 0.15, 16, 16, RenderMode.ESCAPE, max_iter=200
    )
    allowed = {tuple(c) for c in INNER_SHADES + OUTER_SHADES} | {(0, 0, 0)}
    colours = {tuple(int(v) for v in pixel) for pixel in render(job).reshape(-1, 3)}
    assert colours <= allowed


def test_itinerary_mode(fig1_map, fig1_report):
    job = RenderJob(
        fig1_map, fig1_report.layout, 0j, 0.15, 16, 8, RenderMode.ITINERARY, depth=2
    )
    image = render(job)
    assert image.shape == (8, 16, 3)
    palette = {tuple(int(v) for v in c) for c in itinerary_palette(16, 60)}
    palette |= {tuple(int(v) for v in c) for c in itinerary_palette(16, 100)}
    palette |= {tuple(c) for c in INNER_SHADES + OUTER_SHADES}
    palette.add((0, 0, 0))
    assert {tuple(int(v) for v in pixel) for pixel in image.reshape(-1, 3)} <= palette


@pytest.mark.parametrize(
    "width, height, mode, depth",
    [
        (0, 10, RenderMode.BASIN, 0),
        (10, 9000, RenderMode.BASIN, 0),
        (10, 10, RenderMode.ITINERARY, 0),
        (10, 10, RenderMode.ITINERARY, 7),
    ],
)
def test_job_validation(fig1_map, fig1_report, width, height, mode, depth):
    with pytest.raises(DomainError):
        RenderJob(fig1_map, fig1_report.layout, 0j, 1.0, width, height, mode, depth)


def test_job_for_preset(fig1_map, fig1_report):
    job = job_for_preset("fig1", fig1_map, fig1_report.layout, px=8)
    assert job.center == 0j
    assert job.half_width == 0.15
    assert job.row(0)[0] == pytest.approx(complex(-0.15 + 0.15 / 8, 0.15 - 0.15 / 8))


def test_ppm_and_png(tmp_path, basin_job):
    image = render(basin_job)
    data = ppm_bytes(image)
    header = b"P6\n32 24\n255\n"
    assert data.startswith(header)
    assert len(data) == len(header) + 32 * 24 * 3

    ppm = write_image(tmp_path / "basin.ppm", image)
    assert ppm.read_bytes() == data
    png = write_image(tmp_path / "basin.png", image)
    with Image.open(png) as loaded:
        assert loaded.size == (32, 24)
        assert np.array_equal(np.asarray(loaded.convert("RGB")), image)


def test_transitions():
    line = np.array([[0, 0, 0], [0, 0, 0], [255, 255, 255], [0, 0, 0]])
    assert transitions(line) == 2


def test_short_prefixes_do_not_share_hues():
    # "1" trapped after one symbol against "10" and "01" at full depth
    result = Classification(
        outcomes=np.array([OUTCOME_INNER, OUTCOME_INNER, OUTCOME_INNER, OUTCOME_OUTER]),
        steps=np.array([3, 1, 4, 1]),
        codes=np.array([4, 1, 1, 2]),
        depth=np.array([2, 1, 2, 1], dtype=np.int32),
    )
    pixels = [tuple(int(v) for v in c) for c in prefix_colours(result, 4, 2)]
    palette = itinerary_palette(16, 60)
    assert pixels[0] == tuple(int(v) for v in palette[4])
    assert pixels[2] == tuple(int(v) for v in palette[1])
    assert pixels[1] == INNER_SHADES[1]
    assert pixels[3] == OUTER_SHADES[1]
    assert len(set(pixels)) == 4
