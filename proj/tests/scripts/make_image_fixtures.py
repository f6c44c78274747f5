"""Writes small PNG and TIFF decoder fixtures with PIL into the given directory."""
import os
import sys

import numpy as np
from PIL import Image

out = sys.argv[1]
os.makedirs(out, exist_ok=True)
g16 = np.array([[0, 256, 32768, 65535]], dtype=np.uint16)
Image.fromarray(g16).save(os.path.join(out, "gray16.png"))
Image.fromarray(g16).save(os.path.join(out, "gray16.tif"))
pal = Image.new("P", (3, 1))
pal.putpalette([10, 20, 30, 200, 100, 50, 0, 255, 0] + [0] * 759)
pal.putdata([0, 1, 2])
pal.save(os.path.join(out, "palette.png"))
rgba = np.array([[[255, 0, 0, 255], [0, 0, 255, 0], [100, 100, 100, 128]]], dtype=np.uint8)
Image.fromarray(rgba, "RGBA").save(os.path.join(out, "rgba.png"))
Image.fromarray(np.array([[[50, 255], [60, 0]]], dtype=np.uint8), "LA").save(os.path.join(out, "gray_alpha.png"))
Image.fromarray(np.array([[0, 1], [1, 0]], dtype=bool)).save(os.path.join(out, "bilevel.png"))
Image.fromarray(np.array([[1, 2, 3], [4, 5, 250]], dtype=np.uint8)).save(os.path.join(out, "gray8.tif"))
Image.fromarray(np.array([[[1, 2, 3], [4, 5, 6]]], dtype=np.uint8)).save(os.path.join(out, "rgb.tif"))
