''' Created: 03/10/2026 '''

# External Dependencies
import numpy as np
from typing import Dict

# Internal Dependencies
from projections.BaseProjection import BaseProjection

class Projection(BaseProjection):

    kind = 'linear'
    decoder_kind = 'linear'

    def sample_params(self, d: int, D: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        # Regenerate until P~ has full row rank so latents stay recoverable.
        while True:
            matrix = rng.normal(0.0, 1.0, size=(d, D))
            if np.linalg.matrix_rank(matrix) == d:
                return {'matrix': matrix}

    def apply(self, z: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
        matrix = params['matrix']
        self.validate_latents(z, params, matrix.shape[0])
        return np.asarray(z) @ matrix
