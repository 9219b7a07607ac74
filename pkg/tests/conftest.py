''' Created: 11/10/2026 '''

# External Dependencies
import numpy as np
import pytest
import yaml

# Internal Dependencies
from core.scm_core import LatentScm
from core.synth_gen import GroundTruth, make_ground_truth, make_projection, sample_intervention_plan, generate_dataset
from core.trainer import TrainConfig
from utilities.settings import Settings

@pytest.fixture
def chain_scm() -> LatentScm:
    ''' 0 -> 1 -> 2 with moderate weights, unit noise. '''
    l = np.array([[0.0, 0.0, 0.0],
                  [0.8, 0.0, 0.0],
                  [0.0, -0.6, 0.0]])
    return LatentScm(np.arange(3), l, 0.0)

@pytest.fixture
def chain_gt(chain_scm) -> GroundTruth:
    return GroundTruth(chain_scm, make_projection('linear', 3, 8, 0))

@pytest.fixture
def small_gt() -> GroundTruth:
    return make_ground_truth(3, 8, 1, 'linear', 0)

@pytest.fixture
def small_dataset(small_gt):
    plan = sample_intervention_plan(3, 4, 10, False, 1)
    return generate_dataset(small_gt, 40, plan, 2)

@pytest.fixture
def fast_config() -> TrainConfig:
    return TrainConfig(epochs=20, eval_interval=10, checkpoint_interval=10, posterior_samples=10, latent_samples=8,
                       clamp_interventions=True)

@pytest.fixture
def settings(tmp_path, monkeypatch) -> Settings:
    monkeypatch.chdir(tmp_path)
    with open(tmp_path / 'settings.yml', 'w') as file:
        yaml.safe_dump({'PROGRESS_BARS': False}, file)
    return Settings(str(tmp_path / 'settings.yml'))
