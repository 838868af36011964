"""Dataset builders shared by the tests."""

import numpy as np

from matrixda import MtsDataset


def make_dataset(rng, n_per_class, d1, d2, c, gap=1.0):
    """Gaussian classes with random means; ``n_per_class`` may be a list."""
    counts = n_per_class if np.ndim(n_per_class) else [n_per_class] * c
    labels = np.repeat(np.arange(c), counts)
    means = gap * rng.standard_normal((c, d1, d2))
    X = means[labels] + rng.standard_normal((labels.size, d1, d2))
    return MtsDataset(X, labels, c)
