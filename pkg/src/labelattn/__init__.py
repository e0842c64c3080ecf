"""Label-attentive text classification, trained from scratch.

Words and class labels share one embedding space; cosine compatibility
between them drives an attention score over tokens, and the attended
average of word embeddings feeds a linear classifier.
"""

from .corpus import (Dataset, EmbeddingTable, Example, LabelDescriptions,
                     Vocabulary, build_vocab, encode, init_label_embeddings,
                     load_pretrained, random_embeddings, read_dataset,
                     tokenize)
from .evaluate import (accuracy, auc, class_center_similarity, evaluate, f1,
                       precision_at_n)
from .explain import Highlight, explain, render
from .model import (ForwardTrace, ModelParams, count_params, forward,
                    forward_linear, forward_swem, init_params)
from .numerics import AdamState, Param, Prng, adam_update, finite_diff_grad
from .train import (LossReport, TrainConfig, backward, fit, label_reg_loss,
                    loss_multi, loss_single, subsample, total_loss)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
