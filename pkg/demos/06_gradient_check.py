"""
Checking backpropagation
========================

Every gradient the trainer uses is compared against a central finite
difference, one parameter at a time, for the three network shapes the
pipeline builds.
"""
import numpy as np

from repmotion.nn import ARCHITECTURES, check_architectures, gradient_check, init_model

for name, (task, sizes) in ARCHITECTURES.items():
    print(f"{name:>10s}: {task:<10s} layers {sizes}")

errors = check_architectures(seed=0)
for name, err in errors.items():
    print(f"{name:>10s}: max relative error {err:.2e}")

# The same check on a tiny two-hidden-layer net, with L2 regularization.
rng = np.random.default_rng(1)
model = init_model("binary", [3, 5, 4, 1], rng)
x = rng.normal(size=(10, 3))
y = (x[:, 0] > 0).astype(float)
print(f"\ntiny net: {gradient_check(model, x, y, alpha=1e-2):.2e}")
