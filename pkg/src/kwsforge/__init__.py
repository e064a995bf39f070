"""kwsforge: keyword spotting on one-second clips, end to end.

MFCC frontend, two small CNNs trained with hand-written backprop, a
deterministic SHA1-based corpus split, and a REST service for live inference.
"""

from .audio import AudioClip, fit_to_length, read_wav, write_wav
from .dataset import AugmentConfig, Manifest, SampleRecord, assign_split, scan_dataset
from .features import FeatureMatrix, mfcc
from .labels import KEYWORDS, LABELS, N_LABELS
from .models import (
    Checkpoint,
    Model,
    ModelSpec,
    build_cnn_one_fstride4,
    build_cnn_trad_pool2,
    build_model,
    count_multiplies,
    load_checkpoint,
    model_spec,
    predict,
    save_checkpoint,
)
from .training import RunResult, TrainConfig, evaluate, multi_seed_run, train

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "AugmentConfig",
    "Checkpoint",
    "FeatureMatrix",
    "KEYWORDS",
    "LABELS",
    "Manifest",
    "Model",
    "ModelSpec",
    "N_LABELS",
    "RunResult",
    "SampleRecord",
    "TrainConfig",
    "assign_split",
    "build_cnn_one_fstride4",
    "build_cnn_trad_pool2",
    "build_model",
    "count_multiplies",
    "evaluate",
    "fit_to_length",
    "load_checkpoint",
    "mfcc",
    "model_spec",
    "multi_seed_run",
    "predict",
    "read_wav",
    "save_checkpoint",
    "scan_dataset",
    "train",
    "write_wav",
]
