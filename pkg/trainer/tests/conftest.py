import numpy as np
import pytest


def _write_pgm(directory, occupancy, resolution, origin, negate=0, name="map"):
    """Write occupancy (row 0 = min y) as a P5 PGM plus yaml sidecar."""
    occupancy = np.asarray(occupancy, dtype=np.float64)
    height, width = occupancy.shape
    pixels = np.flipud(occupancy)  # image top row holds max y
    if negate:
        raw = np.rint(pixels * 255.0).astype(np.uint8)
    else:
        raw = np.rint(255.0 - pixels * 255.0).astype(np.uint8)
    image_path = directory / f"{name}.pgm"
    with open(image_path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(raw.tobytes())
    meta_path = directory / f"{name}.yaml"
    meta_path.write_text(
        f"image: {name}.pgm\n"
        f"resolution: {resolution!r}\n"
        f"origin: [{origin[0]!r}, {origin[1]!r}]\n"
        f"negate: {negate}\n"
    )
    return image_path, meta_path


@pytest.fixture
def write_pgm():
    return _write_pgm
