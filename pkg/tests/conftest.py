import os
from pathlib import Path

import numpy as np
import pytest

from fspgemm.matrices import CsrMatrix, coo_to_csr, random_csr
from fspgemm.mmio import parse_matrix_market

REPO_ROOT = Path(__file__).resolve().parent.parent

SUITESPARSE_NAMES = [
    "poisson3Da",
    "2cubes_sphere",
    "filter3D",
    "cage12",
    "scircuit",
    "mac_econ_fwd500",
    "offshore",
    "webbase-1M",
]


def data_dir() -> Path:
    env = os.environ.get("FSPGEMM_DATA_DIR")
    return Path(env) if env else REPO_ROOT / "data"


def suitesparse_file(name: str) -> Path:
    return data_dir() / f"{name}.mtx"


def require_suitesparse(*names: str) -> None:
    missing = [n for n in (names or SUITESPARSE_NAMES) if not suitesparse_file(n).exists()]
    if missing:
        pytest.skip(
            f"evaluation matrices not present under {data_dir()}: {', '.join(missing)} "
            "(run scripts/fetch_suitesparse.py on a machine with network access)"
        )


_matrix_cache: dict = {}


def load_suitesparse(name: str) -> CsrMatrix:
    if name not in _matrix_cache:
        _matrix_cache[name] = coo_to_csr(parse_matrix_market(suitesparse_file(name)))
    return _matrix_cache[name]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)


def random_pair(rng: np.random.Generator, n_max: int = 128, density_max: float = 0.05):
    """A conformable random (A, B) pair for end-to-end checks."""
    m = int(rng.integers(1, n_max + 1))
    k = int(rng.integers(1, n_max + 1))
    n = int(rng.integers(1, n_max + 1))
    d_a = float(rng.uniform(0.0, density_max))
    d_b = float(rng.uniform(0.0, density_max))
    return random_csr(m, k, d_a, rng), random_csr(k, n, d_b, rng)
