"""
Periodicity features of a single window
=======================================

A keypoint on a moving limb traces a 2-D path. Here we cut one 5 s window
from a synthetic vertical oscillation and one from a random walk and look
at the numbers the detector sees.
"""
import numpy as np

from repmotion import dsp, synth
from repmotion.features import FEATURE_NAMES, window_features
from repmotion.trajectory import slide_windows

# A 0.8 Hz vertical oscillation, 8 s long, with a little pixel noise.
lift, truth = synth.generate(synth.SynthSpec("sinusoid_y", frequency=0.8, amplitude=35, duration=8,
                                             noise_std=1.5, seed=1), "lift")
walk, _ = synth.generate(synth.SynthSpec("random_walk", amplitude=15, duration=8, seed=2), "walk")
print(f"lift: {len(lift.points)} samples, true repetitions {truth.reps:.1f}")

# Windows are 5 s long and start every second, so an 8 s track yields 4.
windows = slide_windows(lift)
print("window starts:", [w.window_start_frame for w in windows])

# The low-level helpers work on 1-D signals.
y = lift.points[:150, 1]
print("zero crossings:", dsp.zero_crossings(y)[0])
print("dominant frequency:", dsp.dominant_frequency(y, lift.fps))
r = dsp.autocorrelation(y, unbiased=True)
print("first autocorrelation peak at lag", dsp.local_maxima(r)[0], "frames")

# window_features normalizes the window (first point at the origin, largest
# excursion 1) and returns all 27 values.
for name, traj in (("lift", lift), ("walk", walk)):
    fv = window_features(slide_windows(traj)[0])
    print(f"\n{name}:")
    for key in ("dom_freq_hz", "ac_max_peak", "n_ac_peaks", "disp_overall_c1", "decay_slope"):
        print(f"  {key:>16s} = {fv[key]: .3f}")

print("\nall features:", ", ".join(FEATURE_NAMES))
