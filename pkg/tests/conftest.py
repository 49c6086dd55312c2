"""Shared fixtures and path setup for the Rivlin cube tests."""
import sys
import os
import argparse
import pytest

# Add project root to path so tests can import the top-level modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


@pytest.fixture
def nh_model():
    """Neo-Hookean cube with mu = 0.52, the mean modulus of the uncertainty study."""
    from constitutive import MaterialModel
    return MaterialModel(0.52, 0.0)


@pytest.fixture
def e12_model():
    """Mooney-Rivlin cube at the mean coefficients (1.92, 0.48)."""
    from constitutive import MaterialModel
    return MaterialModel(1.92, 0.48)


@pytest.fixture
def e21_model():
    """Negative-mu2 coefficients (2.484, -0.148), regime E21."""
    from constitutive import MaterialModel
    return MaterialModel(2.484, -0.148)


@pytest.fixture
def shear_gamma():
    from randvars import GammaParams
    return GammaParams(400.0, 0.0013)


@pytest.fixture
def ratio_beta():
    from randvars import BetaParams
    return BetaParams(400.0, 100.0)


@pytest.fixture
def rng():
    """Seeded generator for property checks."""
    import numpy as np
    return np.random.default_rng(20190101)


@pytest.fixture(scope="session")
def random_models():
    """1000 admissible models: mu1 log-uniform on [0.1, 10], mu2/mu1 uniform on (-0.99, 1.5)."""
    import numpy as np
    from constitutive import MaterialModel
    rng = np.random.default_rng(1000)
    mu1 = np.exp(rng.uniform(np.log(0.1), np.log(10.0), 1000))
    ratio = rng.uniform(-0.99, 1.5, 1000)
    return [MaterialModel(float(a), float(a * q)) for a, q in zip(mu1, ratio)]


@pytest.fixture
def sample_args():
    """Fully resolved argparse.Namespace with the CLI defaults for a diagram run."""
    from rivlin_cube import DEFAULTS
    values = dict(DEFAULTS)
    values.update(command="diagram", mu1=1.0, mu2=0.0, tau_max=3.0, steps=30)
    return argparse.Namespace(**values)


@pytest.fixture
def sample_config(sample_args, tmp_path):
    """RunConfig built from sample_args, writing into tmp_path."""
    from rivlin_cube import RunConfig
    sample_args.out = str(tmp_path / "diagram.csv")
    return RunConfig(sample_args)
