''' Created: 04/10/2026 '''

# Renders each latent as one grayscale block whose intensity is logistic(z_i),
# so parent block intensities drive child block intensities.

# External Dependencies
import numpy as np
from scipy.special import expit
from typing import Dict, Tuple

# Internal Dependencies
from projections.BaseProjection import BaseProjection
from utilities.custom_exceptions import LatentExceptions as LE

IMAGE_SIDE = 32

class Projection(BaseProjection):

    kind = 'blocks'
    decoder_kind = 'mlp3'

    def sample_params(self, d: int, D: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        ''' Returns: Integer block geometry, one (top, bottom, left, right) row per node.
            The layout is fixed, so rng is unused. '''
        if D != self.observation_dim(d, D):
            raise LE.ArgumentError(f'Block images are {IMAGE_SIDE}x{IMAGE_SIDE}, so D must be {IMAGE_SIDE ** 2}, got {D}.')
        return {'boxes': block_boxes(d), 'side': np.array([IMAGE_SIDE])}

    def observation_dim(self, d: int, D: int) -> int:
        return IMAGE_SIDE * IMAGE_SIDE

    def apply(self, z: np.ndarray, params: Dict[str, np.ndarray]) -> np.ndarray:
        boxes = params['boxes']
        self.validate_latents(z, params, boxes.shape[0])
        return render(np.asarray(z), boxes, int(params['side'][0])).reshape(*np.shape(z)[:-1], -1)

def grid_shape(d: int) -> Tuple[int, int]:
    ''' Returns: (rows, cols) of the block grid, one row up to 8 nodes, two otherwise. '''
    rows = 1 if d <= 8 else 2
    cols = -(-d // rows)
    if cols > IMAGE_SIDE // 2:
        raise LE.ArgumentError(f'Cannot fit {d} blocks in a {IMAGE_SIDE}px image.')
    return rows, cols

def block_boxes(d: int) -> np.ndarray:
    rows, cols = grid_shape(d)
    cell_h, cell_w = IMAGE_SIDE // rows, IMAGE_SIDE // cols
    margin = 1 if min(cell_h, cell_w) >= 4 else 0
    boxes = []
    for i in range(d):
        r, c = divmod(i, cols)
        boxes.append((r * cell_h + margin, (r + 1) * cell_h - margin, c * cell_w + margin, (c + 1) * cell_w - margin))
    return np.asarray(boxes, dtype=int)

def render(z: np.ndarray, boxes: np.ndarray, side: int) -> np.ndarray:
    ''' Returns: Images of shape (..., side, side) with pixel values in [0, 1]. '''
    intensity = expit(z)
    images = np.zeros((*z.shape[:-1], side, side))
    for i, (top, bottom, left, right) in enumerate(boxes):
        images[..., top:bottom, left:right] = intensity[..., i, None, None]
    return images
