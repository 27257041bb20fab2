"""Saliency-aware multi-view encoding and hyperbolic alignment toolkit."""
from .align import AlignBatch, AlignParams, TrainConfig, infonce_loss, loss_grad, train_align
from .embedding import aggregate_views, read_emb, toy_view_encoder, write_emb
from .foveation import FoveationConfig, foveate, generate_views, suppress_background
from .lorentz import LorentzManifold
from .retrieval import rank, topk_accuracy
from .sas import FixationSet, SamplingConfig, baseline_sample, sas_sample

__version__ = "0.1.0"
