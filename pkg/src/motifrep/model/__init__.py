from .config import ModelConfig, default_gamma
from .losses import (
    loss_classification,
    loss_reconstruction,
    ones_matrix,
    repetition_matrix,
    total_loss,
)
from .network import init_params, parameter_group
from .training import (
    ModelState,
    TrainLog,
    TrainingDivergedError,
    VARIANTS,
    classify_tokens,
    decode_tokens,
    gradient_check,
    layer_gradient_checks,
    train,
)
from .checkpoint import CheckpointError, checkpoint_hash, load_checkpoint, save_checkpoint
