from .ablation import ablation_variants, run_ablation
from .config import TrainConfig, load_train_config, load_train_settings, save_train_settings
from .evaluate import (
    EvaluationResult,
    evaluate,
    evaluate_network,
    evaluate_predictions,
    predict_masks,
)
from .optim import AdamState, adam_step, lr_schedule
from .report import AblationRow, format_ablation_table, write_ablation_table, write_ef_scatter
from .trainer import (
    EpochRecord,
    Trainer,
    TrainResult,
    TrainState,
    load_records,
    read_train_log,
    train,
)

__all__ = [
    "AblationRow",
    "AdamState",
    "EpochRecord",
    "EvaluationResult",
    "TrainConfig",
    "TrainResult",
    "TrainState",
    "Trainer",
    "ablation_variants",
    "adam_step",
    "evaluate",
    "evaluate_network",
    "evaluate_predictions",
    "format_ablation_table",
    "load_records",
    "load_train_config",
    "load_train_settings",
    "lr_schedule",
    "predict_masks",
    "read_train_log",
    "run_ablation",
    "save_train_settings",
    "train",
    "write_ablation_table",
    "write_ef_scatter",
]
