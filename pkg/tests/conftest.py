import numpy as np
import pytest

import minperturb as mp


@pytest.fixture(scope="session")
def grid_mlp():
    """(2,16,3) tanh network trained on the three-blob dataset; shared by the
    attack-comparison and diagnostics tests."""
    train = mp.generate_dataset("grid-multiclass", 400, seed=11)
    return mp.train(
        mp.make_mlp((2, 16, 3), "tanh", seed=7),
        train,
        mp.TrainConfig(epochs=300, learning_rate=0.1, l2_weight_decay=1e-3),
    )


@pytest.fixture(scope="session")
def grid_test():
    return mp.generate_dataset("grid-multiclass", 200, seed=12)


@pytest.fixture(scope="session")
def gauss_mlp():
    train = mp.generate_dataset("two-gaussians", 200, seed=21)
    return mp.train(
        mp.make_mlp((2, 8, 2), "tanh", seed=5),
        train,
        mp.TrainConfig(epochs=400, learning_rate=0.1),
    )


@pytest.fixture(scope="session")
def ellipse():
    return mp.make_quadric_binary(np.diag([0.25, 1.0]), 1.0)
