import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def noisy_llr(rng, codeword, sigma):
    """BPSK over AWGN, LLR = 2y/sigma^2."""
    y = 1.0 - 2.0 * np.asarray(codeword, dtype=float) + sigma * rng.standard_normal(np.shape(codeword))
    return 2.0 * y / sigma**2
