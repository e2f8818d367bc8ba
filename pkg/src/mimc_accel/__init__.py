"""BN254 prime-field arithmetic, the MiMC-p/p cipher and hash, and a cycle-accurate
model of pipelined MiMC hardware."""

from .gf254 import BN254, FieldElement, FieldParams
from .mimc import derive_constants, encrypt, hash_blocks, hash_bytes, load_constants, pad_message

__version__ = "0.1.0"
