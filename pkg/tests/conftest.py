import numpy as np
import pytest

from ignifront import make_profile
from ignifront.medium import AmplitudeMap, EnvelopeBump, RandomMedium


@pytest.fixture(scope="session")
def canonical_profile():
    return make_profile(0.25, 1.0, 2.0, 0.5)


@pytest.fixture(scope="session")
def canonical_c0(canonical_profile):
    from ignifront.shooting import compute_c0
    return compute_c0(canonical_profile)


@pytest.fixture()
def hat_medium_1d(canonical_profile):
    return RandomMedium(profile=canonical_profile, dim=1, seed=2024,
                        bump=EnvelopeBump("hat", radius=2.0, height=1.0),
                        amplitudes=AmplitudeMap("uniform", scale=1.0))


@pytest.fixture()
def hat_medium_2d(canonical_profile):
    return RandomMedium(profile=canonical_profile, dim=2, seed=2024,
                        bump=EnvelopeBump("hat", radius=1.5, height=1.0),
                        amplitudes=AmplitudeMap("uniform", scale=1.0))


@pytest.fixture()
def homogeneous_medium_1d(canonical_profile):
    return RandomMedium(profile=canonical_profile, dim=1, seed=7,
                        bump=EnvelopeBump("zero"))
