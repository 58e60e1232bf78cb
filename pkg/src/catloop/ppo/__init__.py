"""From-scratch actor-critic proximal policy optimization."""
from .adam import AdamOptimizer
from .agent import ActorCritic, PpoHyperparams, policy_sample, ppo_update
from .gae import compute_gae, normalize_advantages
from .nets import MlpNetwork, orthogonal
from .train import (VectorEnvs, collect_rollout, load_checkpoint,
                    save_checkpoint, train)
from .evaluate import evaluate, histogram_csv, histogram_png, reset_statistics, save_report

__all__ = [
    "ActorCritic", "AdamOptimizer", "MlpNetwork", "PpoHyperparams",
    "VectorEnvs", "collect_rollout", "compute_gae", "evaluate",
    "histogram_csv", "histogram_png", "load_checkpoint",
    "normalize_advantages", "orthogonal", "policy_sample", "ppo_update",
    "reset_statistics", "save_checkpoint", "save_report", "train",
]
