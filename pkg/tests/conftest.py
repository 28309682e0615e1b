"""Shared builders for the test suite."""
import numpy as np

from hra_forge.dataset import Instance, ObservationSet
from hra_forge.psf import Probability, PsfVector

# raw upper bounds per PSF column, matching the bundled observation set
RAW_MAXIMA = (10.0, 5.0, 5.0, 3.0, 50.0, 10.0, 5.0, 5.0)


def planted_observations(n=48, seed=7):
    """Synthetic observations whose HEP depends on PSFs A and D only.

    The generator is smooth and noise free so the surface the network
    learns has no real signal along the other six inputs.
    """
    rng = np.random.default_rng(seed)
    frac = rng.uniform(0.05, 1.0, size=(n, 8))
    raw = frac * np.array(RAW_MAXIMA)
    heps = 0.05 + 0.25 * frac[:, 0] + 0.15 * frac[:, 3] + 0.20 * frac[:, 0] * frac[:, 3]
    instances = tuple(
        Instance(
            id=f"S{i + 1}",
            psfs=PsfVector.from_sequence(raw[i]),
            observed_hep=Probability(float(heps[i])),
            trials=None,
        )
        for i in range(n)
    )
    return ObservationSet(instances)
