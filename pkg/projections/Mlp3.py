''' Created: 03/10/2026 '''

# External Dependencies
import numpy as np
from typing import Dict

# Internal Dependencies
from projections.BaseProjection import BaseProjection

HIDDEN_WIDTH = 128

class Projection(BaseProjection):

    kind = 'mlp3'
    decoder_kind = 'mlp3'

    def sample_params(self, d: int, D: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        ''' Returns: Three affine layers d -> 128 -> 128 -> D, weights N(0, 1/fan_in). '''
        sizes = [d, HIDDEN_WIDTH, HIDDEN_WIDTH, D]
        params = {}
        for k, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            params[f'w{k}'] = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_in, fan_out))
            params[f'b{k}'] = np.zeros(fan_out)
        return params

    def apply(self, z: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
        self.validate_latents(z, params, params['w0'].shape[0])
        h = np.asarray(z)
        for k in range(3):
            h = h @ params[f'w{k}'] + params[f'b{k}']
            if k < 2:
                h = np.tanh(h)
        return h
