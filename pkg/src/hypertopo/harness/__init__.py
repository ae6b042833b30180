"""File codecs, synthetic data, batch evaluation, checkpoint selection and the CLI."""
from .codecs import read_mask, read_probmap, write_mask, write_probmap
from .selection import CheckpointEntry, select_checkpoint
from .synth import SynthSpec, perturb_probmap, synth_mask

__all__ = [
    "CheckpointEntry",
    "SynthSpec",
    "perturb_probmap",
    "read_mask",
    "read_probmap",
    "select_checkpoint",
    "synth_mask",
    "write_mask",
    "write_probmap",
]
