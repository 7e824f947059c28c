"""W2 to the uniform reference: one concentrated highlight vs scattered pixels."""
from illumest import AnalysisOptions, analyze_array, bright_pixels, synth_blob_scene, synth_uniform_noise_scene
from illumest.image import replicate

for sigma in (4.0, 8.0, 16.0):
    blob = synth_blob_scene(128, 128, (40, 90), sigma)
    n = len(bright_pixels(blob))
    noise = synth_uniform_noise_scene(128, 128, n, seed=1)
    opts = AnalysisOptions(seed=1)
    w_blob = analyze_array(replicate(blob), opts).wasserstein.w2
    w_noise = analyze_array(replicate(noise), opts).wasserstein.w2
    print(f"sigma {sigma:4.1f}  n {n:5d}  w2 blob {w_blob:.4f}  w2 noise {w_noise:.4f}")
