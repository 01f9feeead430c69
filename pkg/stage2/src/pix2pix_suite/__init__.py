"""Stage 2: three parallel conditional translation networks plus embedding export."""

from .config import TrainConfig
from .data import PairedDataset, load_manifest_acquisitions
from .networks import PatchDiscriminator, UNetGenerator

__version__ = "0.1.0"
