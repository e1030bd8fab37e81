"""Word boundary detection toolkit.

Pipeline: word-annotated audio -> per-sample pre-labels -> 25 ms BIO frame
labels (with train-time Begin augmentation) -> frame classifier -> Begin
cluster collapse -> boundary timestamps -> tolerance-windowed metrics
(precision, recall, F-value, over-segmentation, R-value).
"""

from .classifier import (ModelParams, TrainConfig, UttSample, cross_entropy,
                         grad_cross_entropy, predict, read_model, softmax,
                         train_baseline, write_model)
from .corpus import (StandardizationStats, Waveform, WordAnnotationSeq, WordSpan,
                     compute_stats, load_wav, pad_to, parse_annotations,
                     read_annotation_corpus, read_stats, standardize,
                     write_annotation_corpus, write_annotations, write_stats,
                     write_wav)
from .errors import InputError, SegwordsError, TrainingDivergedError
from .evaluate import (EvalReport, MatchCounts, compose_scores, evaluate_corpus,
                       format_report, match_boundaries, metrics_from_counts,
                       write_report)
from .features import FeatureMatrix, extract_features
from .kernels import BACKEND
from .labeling import (AugmentConfig, BEGIN, FrameLabelSeq, INSIDE, OUTSIDE,
                       PointLabelSeq, augment_labels, frame_labels,
                       frame_len_samples, make_point_labels, read_labels,
                       write_labels)
from .logits_io import LogitsMatrix, read_logits, write_logits
from .postprocess import (BoundaryList, SelectionStrategy, collapse_clusters,
                          decode, frames_to_times, read_boundaries, segment,
                          write_boundaries)
from .synth import SynthSpec, synthesize_corpus

__version__ = "0.1.0"
