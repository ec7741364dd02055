__version__ = '0.1'

# every engine in the package works in double precision
import jax
jax.config.update('jax_enable_x64', True)
