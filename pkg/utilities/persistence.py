''' Created: 08/10/2026 '''

# External Dependencies
from typing import Any, Dict, Iterable, List, Tuple
import csv
import json
import os
import numpy as np
import jax

# Internal Dependencies
from utilities.custom_exceptions import LatentExceptions as LE

def save_checkpoint(path: str, params: Any, opt_state: Any, epoch: int, trace: List[float], config_hash: str) -> None:
    ''' Purpose: Writes every parameter and optimizer leaf, the epoch, the ELBO
        trace and the config hash to one .npz container. '''
    arrays = {}
    for prefix, tree in (('param', params), ('opt', opt_state)):
        for k, leaf in enumerate(jax.tree_util.tree_leaves(tree)):
            arrays[f'{prefix}_{k:04d}'] = np.asarray(leaf)
    arrays['epoch'] = np.array([epoch])
    arrays['trace'] = np.asarray(trace, dtype=float)
    arrays['config_hash'] = np.array([config_hash])
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    temporary = f'{path}.partial.npz'
    np.savez(temporary, **arrays)
    os.replace(temporary, path)

def checkpoint_config_hash(path: str) -> str:
    ''' Returns: Config hash a checkpoint was written under, without loading its arrays. '''
    with np.load(path) as stored:
        return str(stored['config_hash'][0])

def load_checkpoint(path: str, params_template: Any, opt_template: Any, config_hash: str) -> Tuple[Any, Any, int, List[float]]:
    ''' Returns: (params, opt_state, epoch, trace) rebuilt on the template
        structures. Refuses checkpoints written under another config hash. '''
    if not os.path.exists(path):
        raise LE.ArgumentError(f'No checkpoint at {path}.')
    found = checkpoint_config_hash(path)
    if found != config_hash:
        raise LE.CheckpointMismatch(f'Checkpoint {path} has config hash {found[:12]}, current config is {config_hash[:12]}.')
    with np.load(path) as stored:
        restored = []
        for prefix, template in (('param', params_template), ('opt', opt_template)):
            leaves, treedef = jax.tree_util.tree_flatten(template)
            names = sorted(k for k in stored.files if k.startswith(f'{prefix}_'))
            if len(names) != len(leaves):
                raise LE.CheckpointMismatch(f'Checkpoint {path} holds {len(names)} {prefix} arrays, expected {len(leaves)}.')
            loaded = [jax.numpy.asarray(stored[name], dtype=np.asarray(leaf).dtype) for name, leaf in zip(names, leaves)]
            restored.append(jax.tree_util.tree_unflatten(treedef, loaded))
        return restored[0], restored[1], int(stored['epoch'][0]), stored['trace'].tolist()

def to_builtin(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray) or hasattr(value, 'tolist'):
        return value.tolist()
    return value

def append_jsonl(path: str, record: Dict) -> None:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'a') as file:
        file.write(json.dumps(to_builtin(record), sort_keys=True) + '\n')

def write_jsonl(path: str, records: Iterable[Dict]) -> None:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w') as file:
        for record in records:
            file.write(json.dumps(to_builtin(record), sort_keys=True) + '\n')

def read_jsonl(path: str) -> List[Dict]:
    with open(path, 'r') as file:
        return [json.loads(line) for line in file if line.strip()]

def write_json(path: str, document: Dict) -> None:
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w') as file:
        json.dump(to_builtin(document), file, indent=4, sort_keys=True)

def write_csv(path: str, rows: List[Dict], columns: List[str]) -> None:
    ''' Purpose: Writes rows as CSV, missing fields left empty. '''
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w', newline='') as file:
        writer = csv.DictWriter(file, fieldnames=columns, extrasaction='ignore')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ('' if row.get(k) is None else row.get(k)) for k in columns})

def write_pgm(path: str, image: np.ndarray) -> None:
    ''' Purpose: Writes a [0, 1] grayscale image as binary PGM (P5, 8 bit). '''
    image = np.asarray(image, dtype=float)
    if image.ndim != 2:
        raise LE.ArgumentError(f'PGM output needs a 2D image, got shape {image.shape}.')
    pixels = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'wb') as file:
        file.write(f'P5\n{image.shape[1]} {image.shape[0]}\n255\n'.encode('ascii'))
        file.write(pixels.tobytes())

def read_pgm(path: str) -> np.ndarray:
    with open(path, 'rb') as file:
        content = file.read()
    magic, size, maxval, pixels = content.split(b'\n', 3)
    if magic != b'P5' or maxval != b'255':
        raise LE.DatasetFormatError(f'{path} is not an 8 bit binary PGM.')
    width, height = (int(v) for v in size.split())
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width) / 255.0
