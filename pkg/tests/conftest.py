import hypothesis
import numpy as np
import pytest

from stable_ddsde.besov_lp import DyadicPartition, TorusGrid, build_partition
from stable_ddsde.fokker_planck import DriftSpec, InitialDensity, nfp_solve
from stable_ddsde.stable_process import KernelTable, build_kernel_table

hypothesis.settings.register_profile(
    "numeric", deadline=None, max_examples=25, derandomize=True
)
hypothesis.settings.load_profile("numeric")

# Matches the drift used throughout: ten full sine periods on the extent-80 box.
WAVE_NUMBER = np.pi / 4.0


@pytest.fixture(scope="session")
def table15() -> KernelTable:
    return build_kernel_table(1.5)


@pytest.fixture(scope="session")
def grid80() -> TorusGrid:
    return TorusGrid(80.0, 4096)


@pytest.fixture(scope="session")
def part80(grid80) -> DyadicPartition:
    return build_partition(grid80, 6)


@pytest.fixture(scope="session")
def grid20() -> TorusGrid:
    """Tight box whose Nyquist admits dyadic blocks up to j = 8."""
    return TorusGrid(20.0, 4096)


@pytest.fixture(scope="session")
def part20(grid20) -> DyadicPartition:
    return build_partition(grid20, 8)


@pytest.fixture(scope="session")
def drift() -> DriftSpec:
    return DriftSpec(kind="product", amplitude=0.5, spatial="sin",
                     envelope="tanh", wave_number=WAVE_NUMBER)


@pytest.fixture(scope="session")
def mixture() -> InitialDensity:
    return InitialDensity(kind="gaussian_mixture", weights=(0.6, 0.4),
                          centers=(-2.0, 3.0), sigmas=(1.0, 0.5))


@pytest.fixture(scope="session")
def bump08() -> InitialDensity:
    return InitialDensity(kind="holder_bump", center=0.0, width=4.0,
                          holder_exponent=0.8)


@pytest.fixture(scope="session")
def reference_flow(grid80, drift, mixture):
    """128-step deterministic solve shared by the particle-facing tests."""
    return nfp_solve(mixture.on_grid(grid80), drift, 1.5, 1.0, 128, grid80)
