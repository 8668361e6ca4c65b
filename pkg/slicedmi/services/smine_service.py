"""
S-MINE Service

Variational (Donsker-Varadhan) lower bound on sliced mutual information with
a two-layer potential network, and SMI-maximizing linear feature
extraction. Gradients are computed by explicit backpropagation through the
network; they also flow into the linear maps through the slice projections.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import torch
from tqdm import tqdm

from slicedmi.exceptions import (
    DimensionMismatchError, InsufficientSamplesError, InvalidDimensionError,
    NumericalError, TrainingDivergedError,
)
from slicedmi.models.dv_model import DTYPE, DvModel
from slicedmi.models.estimates import SmiEstimate, convert_unit
from slicedmi.models.feature_maps import FeatureMaps
from slicedmi.models.settings import KnnConfig, SmiConfig, TrainConfig
from slicedmi.services.sampling_service import SeededRng, as_sample_matrix, sample_unit_sphere_batch
from slicedmi.services.smi_service import SmiService

logger = logging.getLogger(__name__)


@dataclass
class DvGradient:
    """Ascent gradient of the DV objective w.r.t. parameters and input rows"""
    parameters: Dict[str, torch.Tensor]
    inputs_pos: torch.Tensor
    inputs_neg: torch.Tensor


@dataclass
class SmineResult:
    """Trained potential with its held-out DV curve"""
    model: DvModel
    estimate_curve: List[float]
    estimate: float

    def to_dict(self, unit: str = 'nats') -> Dict:
        return {'estimate': convert_unit(self.estimate, unit),
                'estimate_curve': [convert_unit(value, unit) for value in self.estimate_curve],
                'model': self.model.to_dict()}


@dataclass
class FeatureExtractionResult:
    """Learned maps, potential and estimates before/after extraction"""
    maps: FeatureMaps
    model: DvModel
    estimate: float
    estimate_curve: List[float] = field(default_factory=list)
    baseline_smi: Optional[SmiEstimate] = None
    extracted_smi: Optional[SmiEstimate] = None

    def to_dict(self, unit: str = 'nats') -> Dict:
        return {
            'estimate': convert_unit(self.estimate, unit),
            'estimate_curve': [convert_unit(value, unit) for value in self.estimate_curve],
            'baseline_smi': self.baseline_smi.to_dict(unit) if self.baseline_smi else None,
            'extracted_smi': self.extracted_smi.to_dict(unit) if self.extracted_smi else None,
            'maps': self.maps.to_dict(),
            'model': self.model.to_dict(),
        }


def _as_tensor(array) -> torch.Tensor:
    return torch.as_tensor(np.asarray(array, dtype=float), dtype=DTYPE)


def _check_batches(batch_pos: torch.Tensor, batch_neg: torch.Tensor, model: DvModel) -> None:
    if batch_pos.ndim != 2 or batch_neg.ndim != 2 or batch_pos.shape[0] == 0 or batch_neg.shape[0] == 0:
        raise InvalidDimensionError("DV batches must be non-empty 2-D tensors")
    if batch_pos.shape[1] != model.input_dim or batch_neg.shape[1] != model.input_dim:
        raise DimensionMismatchError(
            f"batch rows of width {batch_pos.shape[1]}/{batch_neg.shape[1]} do not match "
            f"model input_dim {model.input_dim}")


def _check_finite(values: torch.Tensor, model: DvModel, what: str) -> None:
    if not bool(torch.isfinite(values).all()):
        raise NumericalError(f"non-finite {what}", parameter_norms=model.parameter_norms())


class SmineService:
    """Service for variational SMI estimation and feature extraction"""

    @staticmethod
    def build_rows(thetas, phis, projected_x, projected_y) -> torch.Tensor:
        """Network input rows (theta, phi, theta^T x, phi^T y)"""
        return torch.cat([_as_tensor(thetas), _as_tensor(phis),
                          _as_tensor(projected_x).reshape(-1, 1),
                          _as_tensor(projected_y).reshape(-1, 1)], dim=1)

    @staticmethod
    def dv_objective(model: DvModel, batch_pos, batch_neg) -> float:
        """
        Empirical Donsker-Varadhan objective

        mean(g(pos)) - log(mean(exp(g(neg)))), the log-mean-exp term computed
        with max subtraction.

        Raises:
            NumericalError: Non-finite model output, with parameter norms
        """
        batch_pos, batch_neg = _as_tensor(batch_pos), _as_tensor(batch_neg)
        _check_batches(batch_pos, batch_neg, model)
        with torch.no_grad():
            g_pos = model(batch_pos)
            g_neg = model(batch_neg)
            _check_finite(g_pos, model, 'potential on positive batch')
            _check_finite(g_neg, model, 'potential on negative batch')
            log_mean_exp = torch.logsumexp(g_neg, dim=0) - math.log(g_neg.shape[0])
            return float(g_pos.mean() - log_mean_exp)

    @staticmethod
    def model_gradient(model: DvModel, batch_pos, batch_neg) -> DvGradient:
        """
        Analytic gradient of dv_objective by explicit backpropagation

        The positive rows carry weight 1/n each; the negative rows carry the
        negated softmax of their potentials (derivative of the log-partition).

        Returns:
            DvGradient: Parameter gradients keyed like model.named_parameters(),
            plus gradients w.r.t. every input row
        """
        batch_pos, batch_neg = _as_tensor(batch_pos), _as_tensor(batch_neg)
        _check_batches(batch_pos, batch_neg, model)
        with torch.no_grad():
            w1, b1 = model.layer1.weight, model.layer1.bias
            w2, b2 = model.layer2.weight, model.layer2.bias
            h_pos = torch.tanh(batch_pos @ w1.T + b1)
            h_neg = torch.tanh(batch_neg @ w1.T + b1)
            g_neg = h_neg @ w2[0] + b2[0]
            g_pos = h_pos @ w2[0] + b2[0]
            _check_finite(g_pos, model, 'potential on positive batch')
            _check_finite(g_neg, model, 'potential on negative batch')

            upstream_pos = torch.full((batch_pos.shape[0],), 1.0 / batch_pos.shape[0], dtype=DTYPE)
            upstream_neg = -torch.softmax(g_neg, dim=0)

            grads = {name: torch.zeros_like(p) for name, p in model.named_parameters()}
            input_grads = []
            for inputs, hidden, upstream in ((batch_pos, h_pos, upstream_pos),
                                             (batch_neg, h_neg, upstream_neg)):
                grads['layer2.weight'] += (upstream @ hidden).unsqueeze(0)
                grads['layer2.bias'] += upstream.sum().reshape(1)
                pre_activation = upstream[:, None] * w2 * (1.0 - hidden * hidden)
                grads['layer1.weight'] += pre_activation.T @ inputs
                grads['layer1.bias'] += pre_activation.sum(dim=0)
                input_grads.append(pre_activation @ w1)
        return DvGradient(parameters=grads, inputs_pos=input_grads[0], inputs_neg=input_grads[1])

    @staticmethod
    def train_smine(x, y, cfg: Optional[TrainConfig] = None,
                    slices_per_batch: Optional[int] = None, progress: bool = False) -> SmineResult:
        """
        Train the potential network and report the DV lower bound on SMI

        Each batch draws direction pairs (by default one per sample), builds
        negatives by permuting y within the batch and ascends the objective.
        The estimate is the mean held-out objective over the last
        smoothing_epochs epochs.

        Args:
            x: n x d_x samples
            y: n x d_y samples
            cfg (TrainConfig): Training hyperparameters
            slices_per_batch (int, optional): Direction pairs per batch, shared
                round-robin across the batch rows; None means one per row

        Returns:
            SmineResult: Model, per-epoch held-out DV values and the estimate

        Raises:
            TrainingDivergedError: Objective became non-finite
        """
        trainer = _DvTrainer(x, y, cfg or TrainConfig(), slices_per_batch=slices_per_batch)
        curve = trainer.fit(progress=progress)
        return SmineResult(model=trainer.model, estimate_curve=curve, estimate=trainer.smoothed(curve))

    @staticmethod
    def feature_extract(x, y, r_x: int, r_y: int = 0, cfg: Optional[TrainConfig] = None,
                        progress: bool = False) -> FeatureExtractionResult:
        """
        Jointly learn linear maps A_x, A_y and the potential to maximize SMI

        Slicing is applied to A_x X and A_y Y. r_y = 0 leaves Y unprocessed.
        Maps start with i.i.d. N(0, 1/d) entries; no rank or norm constraint
        is imposed.

        Returns:
            FeatureExtractionResult: Learned maps, model, DV estimate and the
            nonparametric SMI of the data through the initial and learned maps
        """
        cfg = cfg or TrainConfig()
        x = as_sample_matrix(x, 'x')
        y = as_sample_matrix(y, 'y')
        if not 1 <= r_x <= x.shape[1]:
            raise InvalidDimensionError(f"r_x must lie in 1..{x.shape[1]}, got {r_x}")
        if not 0 <= r_y <= y.shape[1]:
            raise InvalidDimensionError(f"r_y must lie in 0..{y.shape[1]}, got {r_y}")

        trainer = _DvTrainer(x, y, cfg, r_x=r_x, r_y=r_y)
        initial_maps = trainer.current_maps()
        curve = trainer.fit(progress=progress)
        maps = trainer.current_maps()

        eval_cfg = SmiConfig(m=cfg.eval_slices, knn=KnnConfig(), seed=trainer.root.derive_seed(9))
        baseline = SmiService.estimate_smi(*initial_maps.apply(x, y), eval_cfg)
        extracted = SmiService.estimate_smi(*maps.apply(x, y), eval_cfg)
        logger.info(f"Feature extraction: nonparametric SMI {baseline.value:.4f} with random maps, "
                    f"{extracted.value:.4f} with learned maps")
        return FeatureExtractionResult(maps=maps, model=trainer.model, estimate=trainer.smoothed(curve),
                                       estimate_curve=curve, baseline_smi=baseline, extracted_smi=extracted)


class _DvTrainer:
    """Mini-batch ascent of the DV objective, optionally through linear maps"""

    def __init__(self, x, y, cfg: TrainConfig, r_x: Optional[int] = None, r_y: Optional[int] = None,
                 slices_per_batch: Optional[int] = None):
        self.cfg = cfg
        self.x = as_sample_matrix(x, 'x')
        self.y = as_sample_matrix(y, 'y')
        n = self.x.shape[0]
        if self.y.shape[0] != n:
            raise DimensionMismatchError(f"x has {n} rows but y has {self.y.shape[0]}")
        if n < cfg.batch_size:
            raise InsufficientSamplesError(f"n={n} is smaller than batch_size={cfg.batch_size}")
        if slices_per_batch is not None and slices_per_batch < 1:
            raise InvalidDimensionError(f"slices_per_batch must be positive, got {slices_per_batch}")
        self.slices_per_batch = slices_per_batch

        self.root = SeededRng(cfg.seed)
        split = self.root.spawn(0).permutation(n)
        holdout = max(2, int(round(cfg.holdout_fraction * n)))
        self.eval_idx, self.train_idx = split[:holdout], split[holdout:]
        if self.train_idx.size < 2:
            raise InsufficientSamplesError(f"n={n} leaves fewer than 2 training samples")
        self.batch_size = min(cfg.batch_size, self.train_idx.size)

        map_rng = self.root.spawn(1)
        d_x, d_y = self.x.shape[1], self.y.shape[1]
        self.a_x = self._init_map(r_x, d_x, map_rng)
        self.a_y = self._init_map(r_y or None, d_y, map_rng)
        self.dim_x = r_x or d_x
        self.dim_y = r_y or d_y

        input_dim = self.dim_x + self.dim_y + 2 if cfg.slicing else self.dim_x + self.dim_y
        self.model = DvModel(input_dim, cfg.hidden, rng=self.root.spawn(2))

        parameters = list(self.model.parameters()) + [a for a in (self.a_x, self.a_y) if a is not None]
        if cfg.optimizer == 'adam':
            self.optimizer = torch.optim.Adam(parameters, lr=cfg.learning_rate)
        else:
            self.optimizer = torch.optim.SGD(parameters, lr=cfg.learning_rate)

        # Directions fixed per training sample when not resampled per batch
        direction_rng = self.root.spawn(3)
        self.fixed_thetas = sample_unit_sphere_batch(n, self.dim_x, direction_rng)
        self.fixed_phis = sample_unit_sphere_batch(n, self.dim_y, direction_rng)

        eval_rng = self.root.spawn(4)
        self.eval_thetas = sample_unit_sphere_batch(self.eval_idx.size, self.dim_x, eval_rng)
        self.eval_phis = sample_unit_sphere_batch(self.eval_idx.size, self.dim_y, eval_rng)
        self.eval_perm = eval_rng.permutation(self.eval_idx.size)

        logger.info(f"S-MINE trainer: n_train={self.train_idx.size}, n_eval={self.eval_idx.size}, "
                    f"input_dim={input_dim}, slicing={cfg.slicing}, maps=({r_x}, {r_y}), seed={self.root.seed}")

    @staticmethod
    def _init_map(rows: Optional[int], cols: int, rng: SeededRng) -> Optional[torch.Tensor]:
        if not rows:
            return None
        values = rng.standard_normal((rows, cols)) / math.sqrt(cols)
        return _as_tensor(values).requires_grad_(True)

    def current_maps(self) -> FeatureMaps:
        a_x = self.a_x.detach().numpy().copy() if self.a_x is not None else np.eye(self.x.shape[1])
        a_y = self.a_y.detach().numpy().copy() if self.a_y is not None else None
        return FeatureMaps(a_x=a_x, a_y=a_y)

    def _features(self, rows: np.ndarray) -> Tuple[torch.Tensor, torch.Tensor]:
        x_rows, y_rows = _as_tensor(self.x[rows]), _as_tensor(self.y[rows])
        with torch.no_grad():
            fx = x_rows @ self.a_x.T if self.a_x is not None else x_rows
            fy = y_rows @ self.a_y.T if self.a_y is not None else y_rows
        return fx, fy

    def _assemble(self, fx, fy, thetas, phis, perm):
        fy_neg = fy[perm]
        if not self.cfg.slicing:
            return torch.cat([fx, fy], dim=1), torch.cat([fx, fy_neg], dim=1)
        thetas, phis = _as_tensor(thetas), _as_tensor(phis)
        s_x = (thetas * fx).sum(dim=1, keepdim=True)
        s_y = (phis * fy).sum(dim=1, keepdim=True)
        s_y_neg = (phis * fy_neg).sum(dim=1, keepdim=True)
        return torch.cat([thetas, phis, s_x, s_y], dim=1), torch.cat([thetas, phis, s_x, s_y_neg], dim=1)

    def _feature_gradients(self, gradient: DvGradient, thetas, phis):
        # Chain rule from network inputs back to the mapped features
        if not self.cfg.slicing:
            return (gradient.inputs_pos[:, :self.dim_x] + gradient.inputs_neg[:, :self.dim_x],
                    gradient.inputs_pos[:, self.dim_x:], gradient.inputs_neg[:, self.dim_x:])
        thetas, phis = _as_tensor(thetas), _as_tensor(phis)
        d_fx = thetas * (gradient.inputs_pos[:, -2] + gradient.inputs_neg[:, -2])[:, None]
        return d_fx, phis * gradient.inputs_pos[:, -1][:, None], phis * gradient.inputs_neg[:, -1][:, None]

    def _batch_directions(self, rows: np.ndarray, rng: SeededRng):
        if not self.cfg.resample_directions_per_batch:
            return self.fixed_thetas[rows], self.fixed_phis[rows]
        count = rows.size if self.slices_per_batch is None else min(self.slices_per_batch, rows.size)
        thetas = sample_unit_sphere_batch(count, self.dim_x, rng)
        phis = sample_unit_sphere_batch(count, self.dim_y, rng)
        assignment = np.arange(rows.size) % count
        return thetas[assignment], phis[assignment]

    def step(self, rows: np.ndarray, rng: SeededRng) -> float:
        """One ascent step on a batch; returns the batch objective"""
        fx, fy = self._features(rows)
        thetas, phis = self._batch_directions(rows, rng)
        perm = torch.as_tensor(rng.permutation(rows.size))
        batch_pos, batch_neg = self._assemble(fx, fy, thetas, phis, perm)

        value = SmineService.dv_objective(self.model, batch_pos, batch_neg)
        gradient = SmineService.model_gradient(self.model, batch_pos, batch_neg)

        self.optimizer.zero_grad(set_to_none=True)
        # Optimizers minimize; hand them the negated ascent direction
        for name, parameter in self.model.named_parameters():
            parameter.grad = -gradient.parameters[name]
        if self.a_x is not None or self.a_y is not None:
            d_fx, d_fy_pos, d_fy_neg = self._feature_gradients(gradient, thetas, phis)
            x_rows, y_rows = _as_tensor(self.x[rows]), _as_tensor(self.y[rows])
            if self.a_x is not None:
                self.a_x.grad = -(d_fx.T @ x_rows)
            if self.a_y is not None:
                self.a_y.grad = -(d_fy_pos.T @ y_rows + d_fy_neg.T @ y_rows[perm])
        self.optimizer.step()
        return value

    def evaluate(self) -> float:
        """DV objective on the held-out rows with fixed directions and pairing"""
        fx, fy = self._features(self.eval_idx)
        batch_pos, batch_neg = self._assemble(fx, fy, self.eval_thetas, self.eval_phis,
                                              torch.as_tensor(self.eval_perm))
        return SmineService.dv_objective(self.model, batch_pos, batch_neg)

    def fit(self, progress: bool = False) -> List[float]:
        curve = []
        batch_rng = self.root.spawn(5)
        for epoch in tqdm(range(self.cfg.epochs), desc='epochs', disable=not progress, leave=False):
            order = self.train_idx[batch_rng.permutation(self.train_idx.size)]
            try:
                for start in range(0, order.size - self.batch_size + 1, self.batch_size):
                    self.step(order[start:start + self.batch_size], batch_rng)
                value = self.evaluate()
            except NumericalError as e:
                raise TrainingDivergedError("DV objective diverged", epoch=epoch,
                                            parameter_norms=self.model.parameter_norms()) from e
            if not math.isfinite(value):
                raise TrainingDivergedError("DV objective diverged", epoch=epoch)
            curve.append(value)
            logger.debug(f"epoch {epoch}: held-out DV {value:.6f}")
        return curve

    def smoothed(self, curve: List[float]) -> float:
        tail = curve[-self.cfg.smoothing_epochs:]
        return float(np.mean(tail)) if tail else math.nan
