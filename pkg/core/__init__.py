''' Created: 02/10/2026 '''

# External Dependencies
import jax

# Finite-difference gradient checks at 1e-3 are unreliable in 32-bit.
jax.config.update('jax_enable_x64', True)
