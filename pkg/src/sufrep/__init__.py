"""Sufficient multimodal representation learning and modality selection.

The package trains one small feed-forward encoder per data modality so
that each latent representation (i) is maximally dependent on the
response as measured by distance covariance, (ii) is pushed toward a
standard normal law through discriminator-estimated density-ratio
residual steps, and (iii) is independent of the other modalities'
representations.  Thresholding the per-modality dependence utilities
then yields a selected set of informative modalities.
"""

from .bench import BenchConfig, BenchmarkResult, emit_report, run_benchmark
from .dcov import dcor, dcov_grad, dcov_u, dcov_v, perm_threshold
from .data import MultimodalDataset, export_dataset, load_multimodal_csv
from .gaussianize import (
    Discriminator,
    density_ratio,
    draw_reference,
    push_particles,
    train_discriminator,
)
from .nn import Mlp, adam_init, adam_step, mlp_backward, mlp_forward, mlp_init
from .predict import EvalReport, FitConfig, Predictor, evaluate, fit_head, make_splits
from .select import (
    SelectionConfig,
    SelectionReport,
    conditional_select,
    estimate_active_set,
    modality_utilities,
)
from .synth import SynthConfig, gen_dataset, gen_latent, gen_response, gen_transitions
from .train import (
    EncoderBank,
    ObjectiveBreakdown,
    TrainConfig,
    encode_all,
    empirical_objective,
    load_checkpoint,
    save_checkpoint,
    train_encoders,
    update_modality,
)

__version__ = "0.1.0"
