from .attention import AttentionHead, attention_weights, causal_mask, multi_head_self_attention, scaled_dot_attention
from .layers import AcnnEncoder, LstmCell, LstmDecoder, MultiScaleConv
from .model import ModelConfig, Seq2SeqModel
from .optim import AdamState, adam_step, clip_grad_norm
from .train import TrainConfig, train

__all__ = [
    "AttentionHead", "attention_weights", "causal_mask", "multi_head_self_attention",
    "scaled_dot_attention", "AcnnEncoder", "LstmCell", "LstmDecoder", "MultiScaleConv",
    "ModelConfig", "Seq2SeqModel", "AdamState", "adam_step", "clip_grad_norm",
    "TrainConfig", "train",
]
