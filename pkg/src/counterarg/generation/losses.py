"""Sequence negative log-likelihood and the weighted two-decoder objective."""

from __future__ import annotations

import numpy as np
import torch


def lm_loss(step_logits, target_tokens, reduction: str = "sum"):
    """Teacher-forced negative log-likelihood of ``target_tokens``.

    ``step_logits`` holds one logit vector per target position, as a numpy
    array or a torch tensor (the latter keeps the autograd graph).
    ``reduction="mean"`` gives the per-token value used for logging.
    """
    if len(step_logits) != len(target_tokens):
        raise ValueError(
            f"{len(step_logits)} logit vectors for {len(target_tokens)} target tokens")
    if reduction not in ("sum", "mean"):
        raise ValueError(f"unknown reduction {reduction!r}")
    if isinstance(step_logits, torch.Tensor):
        targets = torch.as_tensor(target_tokens, dtype=torch.long, device=step_logits.device)
        return torch.nn.functional.cross_entropy(step_logits, targets, reduction=reduction)
    logits = np.asarray(step_logits, dtype=np.float64)
    targets = np.asarray(target_tokens, dtype=np.int64)
    if len(targets) == 0:
        return 0.0
    peak = logits.max(axis=1, keepdims=True)
    log_z = peak[:, 0] + np.log(np.exp(logits - peak).sum(axis=1))
    nll = log_z - logits[np.arange(len(targets)), targets]
    total = float(nll.sum())
    return total / len(targets) if reduction == "mean" else total


def multitask_loss(loss_a, loss_b, alpha_a: float = 0.7, alpha_b: float = 0.3):
    """alpha_a * conclusion NLL + alpha_b * counter NLL.

    The weights need not sum to one.
    """
    if alpha_a < 0 or alpha_b < 0:
        raise ValueError("loss weights must be non-negative")
    if not isinstance(loss_a, torch.Tensor) and not isinstance(loss_b, torch.Tensor):
        if loss_a < 0 or loss_b < 0:
            raise ValueError("losses must be non-negative")
    return alpha_a * loss_a + alpha_b * loss_b
