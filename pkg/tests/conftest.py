from pathlib import Path

import pytest

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture(scope="session")
def samples_dir() -> Path:
    return SAMPLES


@pytest.fixture(scope="session")
def google_fixtures(samples_dir) -> Path:
    return samples_dir / "fixtures" / "google"


@pytest.fixture(scope="session")
def dblp_fixtures(samples_dir) -> Path:
    return samples_dir / "fixtures" / "dblp"
