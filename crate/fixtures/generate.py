"""Regenerates the test fixtures from scikit-image's bundled sample data.

Images are box-downscaled, converted to 8-bit, and written as binary PNM.
The golden PSNR for the 32x32 fixture comes from a sparse direct solve of
the inpainting system, independent of the Rust solvers.
"""

from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from PIL import Image
from skimage import color, data

HERE = Path(__file__).resolve().parent


def gray(rgb):
    return (color.rgb2gray(rgb) * 255.0).astype(np.float64)


def square_crop(img):
    h, w = img.shape[:2]
    s = min(h, w)
    y0, x0 = (h - s) // 2, (w - s) // 2
    return img[y0 : y0 + s, x0 : x0 + s]


def box_resize(img, size):
    arr = np.clip(np.round(img), 0, 255).astype(np.uint8)
    return np.asarray(Image.fromarray(arr).resize((size, size), Image.BOX), dtype=np.float64)


def to_u8(img):
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def write_pgm(path, img):
    img = to_u8(img)
    h, w = img.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode() + img.tobytes())


def write_ppm(path, img):
    img = to_u8(img)
    h, w, _ = img.shape
    path.write_bytes(f"P6\n{w} {h}\n255\n".encode() + img.tobytes())


def write_pbm(path, mask):
    h, w = mask.shape
    packed = np.packbits(mask.astype(np.uint8), axis=1)
    path.write_bytes(f"P4\n{w} {h}\n".encode() + packed.tobytes())


def inpaint_direct(f, mask):
    """Solves C(u - f) + (I - C) L u = 0 with reflecting boundaries."""
    h, w = f.shape
    n = h * w
    idx = np.arange(n).reshape(h, w)
    rows, cols, vals = [], [], []
    for y in range(h):
        for x in range(w):
            i = idx[y, x]
            if mask[y, x]:
                rows.append(i), cols.append(i), vals.append(1.0)
                continue
            deg = 0
            for dy, dx in ((0, -1), (0, 1), (-1, 0), (1, 0)):
                ny, nx = y + dy, x + dx
                if 0 <= ny < h and 0 <= nx < w:
                    deg += 1
                    rows.append(i), cols.append(idx[ny, nx]), vals.append(-1.0)
            rows.append(i), cols.append(i), vals.append(float(deg))
    a = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    b = np.where(mask, f, 0.0).ravel()
    return spla.spsolve(a.tocsc(), b).reshape(h, w)


def main():
    corpus = {
        "camera": data.camera().astype(np.float64),
        "astronaut": gray(data.astronaut()),
        "coffee": gray(square_crop(data.coffee())),
        "chelsea": gray(square_crop(data.chelsea())),
        "brick": data.brick().astype(np.float64),
    }
    for name, img in corpus.items():
        write_pgm(HERE / "corpus" / f"{name}.pgm", box_resize(img, 256))

    camera64 = box_resize(data.camera().astype(np.float64), 64)
    write_pgm(HERE / "camera64.pgm", camera64)

    rgb = square_crop(data.chelsea())
    rgb64 = np.stack([box_resize(rgb[..., c].astype(np.float64), 64) for c in range(3)], axis=-1)
    write_ppm(HERE / "chelsea64.ppm", rgb64)

    small = box_resize(gray(data.astronaut()), 32)
    write_pgm(HERE / "astronaut32.pgm", small)
    rng = np.random.default_rng(20)
    mask = np.zeros(32 * 32, dtype=bool)
    mask[rng.choice(32 * 32, size=102, replace=False)] = True
    mask = mask.reshape(32, 32)
    write_pbm(HERE / "astronaut32_mask.pbm", mask)
    f = to_u8(small).astype(np.float64)
    u = inpaint_direct(f, mask)
    mse = np.mean((f - u) ** 2)
    psnr = 10.0 * np.log10(255.0**2 / mse)
    # Unquantized reconstruction, so the value does not depend on rounding at export.
    (HERE / "astronaut32_golden.txt").write_text(f"mse={mse:.10f}\npsnr={psnr:.6f}\n")


if __name__ == "__main__":
    main()
