"""Modality utilities, thresholding, and active-set estimation.

The utility of a trained modality is the pair/triple-normalized distance
covariance between its representation and the response.  Candidates whose
utility exceeds a threshold tau form the estimated active set; tau is
either fixed or calibrated per candidate by a permutation null.  The
conditional mode handles preselected modalities: everything is trained
jointly with cross-modality independence penalties, but only the
candidates are scored, since their representations carry no information
already captured by the preselected ones.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import MultimodalDataset
from .dcov import dcor, dcov_u, perm_threshold
from .errors import ConfigError
from .rng import STREAM_PERM, STREAM_SPLIT, derive_seed, spawn_rng
from .train import EncoderBank, TrainConfig, encode_all, train_encoders

THRESHOLD_FIXED = "fixed"
THRESHOLD_PERMUTATION = "permutation"


@dataclass
class SelectionConfig:
    """Threshold policy and bookkeeping for active-set estimation.

    ``holdout`` is the fraction of rows reserved for scoring: encoders are
    trained on the remaining rows and the utilities (and permutation
    thresholds) are computed on rows the encoders never saw.  Encoders
    trained to maximize dependence on the scoring rows would otherwise
    carry an in-sample bias that keeps even pure-noise modalities above
    any calibrated threshold.  Set it to 0 for in-sample scoring.
    """

    threshold: str = THRESHOLD_PERMUTATION
    tau: float = 0.0
    level: float = 0.05
    num_perms: int = 199
    holdout: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.threshold not in (THRESHOLD_FIXED, THRESHOLD_PERMUTATION):
            raise ConfigError(
                f"threshold policy must be '{THRESHOLD_FIXED}' or "
                f"'{THRESHOLD_PERMUTATION}', got {self.threshold!r}"
            )
        if self.threshold == THRESHOLD_FIXED and self.tau < 0:
            raise ConfigError(f"fixed tau must be >= 0, got {self.tau}")
        if not 0.0 <= self.holdout < 1.0:
            raise ConfigError(f"holdout fraction must be in [0, 1), got {self.holdout}")


@dataclass
class CandidateScore:
    name: str
    index: int
    utility: float
    dcor: float
    tau: float
    active: bool


@dataclass
class SelectionReport:
    """Scored candidates, the active set, and the utility ranking."""

    candidates: list
    mode: str
    seed: int
    preselected: list = field(default_factory=list)

    @property
    def active_set(self):
        return [c.name for c in self.candidates if c.active]

    @property
    def ranking(self):
        """Candidate names by utility, descending; ties broken by index."""
        order = sorted(self.candidates, key=lambda c: (-c.utility, c.index))
        return [c.name for c in order]

    @property
    def selected(self):
        """The single argmax-utility candidate (lowest index on ties)."""
        return self.ranking[0] if self.candidates else None

    def to_dict(self):
        return {
            "candidates": [
                {
                    "name": c.name,
                    "v_n": c.utility,
                    "dcor": c.dcor,
                    "tau": c.tau,
                    "active": c.active,
                }
                for c in self.candidates
            ],
            "mode": self.mode,
            "seed": self.seed,
            "preselected": list(self.preselected),
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def modality_utilities(reps, y):
    """Utility (dcov_u) and distance correlation of each representation."""
    if len(reps) == 0:
        raise ConfigError("no representations to score")
    utils = np.array([dcov_u(r, y) for r in reps])
    dcors = np.array([dcor(r, y) for r in reps])
    return utils, dcors


def estimate_active_set(
    utilities,
    cfg: SelectionConfig,
    reps,
    y,
    names=None,
    dcors=None,
    mode="marginal",
    preselected_names=(),
) -> SelectionReport:
    """Threshold per-candidate utilities into a SelectionReport.

    Under the permutation policy each candidate gets its own threshold
    (latent dimensions and distributions differ across candidates), from
    an independent derived seed.
    """
    utilities = np.asarray(utilities, dtype=np.float64)
    if utilities.size == 0:
        raise ConfigError("empty candidate list")
    if names is None:
        names = [f"M{i}" for i in range(utilities.size)]
    if dcors is None:
        dcors = [dcor(r, y) for r in reps]
    scores = []
    for i, (name, util) in enumerate(zip(names, utilities)):
        if cfg.threshold == THRESHOLD_FIXED:
            tau = float(cfg.tau)
        else:
            tau = perm_threshold(
                reps[i],
                y,
                num_perms=cfg.num_perms,
                level=cfg.level,
                seed=derive_seed(cfg.seed, STREAM_PERM, i),
            )
        scores.append(
            CandidateScore(
                name=name,
                index=i,
                utility=float(util),
                dcor=float(dcors[i]),
                tau=tau,
                active=bool(util > tau),
            )
        )
    return SelectionReport(
        candidates=scores, mode=mode, seed=cfg.seed, preselected=list(preselected_names)
    )


def conditional_select(
    data: MultimodalDataset,
    preselected,
    candidates,
    train_cfg: TrainConfig,
    sel_cfg: SelectionConfig,
    bank: EncoderBank = None,
) -> SelectionReport:
    """Score candidate modalities given already-selected ones.

    Trains representations for preselected + candidate modalities jointly
    (independence penalties active across every pair, so candidate
    representations are trained away from what the preselected ones carry),
    then scores and thresholds only the candidates, on held-out rows when
    ``sel_cfg.holdout`` is positive.  With no preselected modalities this
    is exactly marginal selection.  If ``bank`` is given (e.g. from a
    checkpoint) the preselected encoders are frozen instead of retrained.

    Returns a report whose candidate indices refer to the candidate order.
    """
    preselected = list(preselected)
    candidates = list(candidates)
    if set(preselected) & set(candidates):
        raise ConfigError("preselected and candidate sets must be disjoint")
    for i in preselected + candidates:
        if not 0 <= i < data.k:
            raise ConfigError(f"modality index {i} out of range for K={data.k}")
    mode = "conditional" if preselected else "marginal"
    if not candidates:
        return SelectionReport(
            candidates=[],
            mode=mode,
            seed=sel_cfg.seed,
            preselected=[data.names[i] for i in preselected],
        )

    order = preselected + candidates
    sub = data.subset(order)
    if sel_cfg.holdout > 0.0:
        n = sub.n
        n_score = int(round(sel_cfg.holdout * n))
        if n_score < 3 or n - n_score < train_cfg.batch_size:
            raise ConfigError(
                f"holdout {sel_cfg.holdout} leaves too few rows from n={n}"
            )
        perm = spawn_rng(sel_cfg.seed, STREAM_SPLIT).permutation(n)
        fit_rows, score_rows = perm[n_score:], perm[:n_score]
    else:
        fit_rows = score_rows = None

    fit_data = sub if fit_rows is None else sub.take_rows(fit_rows)
    frozen = range(len(preselected)) if bank is not None else ()
    bank, _, _ = train_encoders(fit_data, train_cfg, bank=bank, frozen=frozen)

    score_data = sub if score_rows is None else sub.take_rows(score_rows)
    reps = encode_all(bank, score_data)
    cand_reps = reps[len(preselected):]
    cand_names = sub.names[len(preselected):]
    utils, dcors = modality_utilities(cand_reps, score_data.response)
    return estimate_active_set(
        utils,
        sel_cfg,
        cand_reps,
        score_data.response,
        names=cand_names,
        dcors=dcors,
        mode=mode,
        preselected_names=[data.names[i] for i in preselected],
    )
