"""Training-free point-prompt interactive segmentation engine."""

from ._backend import BACKEND
from .attention import AttentionTensor, BlockStack, aggregate, apply_temperature, flip_average, ipf_normalize
from .evaluator import BenchReport, Trajectory, iou, miou_at, next_click_center, next_click_random, noc, run_benchmark, simulate
from .floodfill import FillParams, geodesic_fill
from .jbu import JbuParams, jbu_upsample, make_guide
from .markov import CoarseMarkovMap, markov_map, markov_maps_batch
from .scoring import AdaptiveConfig, ScoreBreakdown, boundary_distance, candidate_lambdas, score, select_scale, size_limit
from .segmenter import AddResult, PipelineConfig, PromptPoint, Segmentation, Session, coordinate_map, fuse
from .synth import SceneSpec, generate_scene, make_suite
from .tensor_io import ImageBundle, TensorFile, load_bundle, load_tensor, save_bundle, save_tensor

__version__ = "0.1.0"
