import numpy as np
import pytest

from posturelab.features import normalizer
from posturelab.skeleton import NUM_JOINTS, Skeleton


def random_skeleton(rng: np.random.Generator, span: float = 1.0) -> Skeleton:
    """Random joint cloud with a non-degenerate spine segment."""
    while True:
        skel = Skeleton(rng.uniform(-span, span, (NUM_JOINTS, 3)))
        try:
            if normalizer(skel) > 1e-3:
                return skel
        except Exception:
            continue


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish random rotation matrix via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
