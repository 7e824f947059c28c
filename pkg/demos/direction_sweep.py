"""Move a highlight around the image center and read back its angle."""
import math

from illumest import bright_pixels, direction, synth_blob_scene

SIZE, OFFSET, SIGMA = 128, 20.0, 3.0

for truth in range(0, 360, 30):
    th = math.radians(truth)
    blob = (SIZE / 2 - OFFSET * math.sin(th), SIZE / 2 + OFFSET * math.cos(th))
    est = direction(bright_pixels(synth_blob_scene(SIZE, SIZE, blob, SIGMA)))
    print(f"truth {truth:3d} deg  estimate {est.angle_deg:7.3f} deg  from {est.n_points} bright pixels")
