"""
Independence Testing Service

AUC-ROC of SMI and classic MI as dependence statistics on synthetic
scenarios. Negatives are independently generated datasets whose pairing is
destroyed by a shuffle.
"""
import logging
import math
import traceback
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import mannwhitneyu

from slicedmi.exceptions import DimensionMismatchError, SmiError
from slicedmi.models.experiment import ESTIMATORS, ExperimentPlan, RocInput
from slicedmi.models.scenario import Scenario
from slicedmi.models.settings import KnnConfig, SmiConfig
from slicedmi.services.knn_service import jitter_degenerate_pair, kl_entropy_multivariate, kl_mi_1d
from slicedmi.services.sampling_service import SeededRng, as_sample_matrix
from slicedmi.services.smi_service import SmiService
from slicedmi.services.synthetic_service import SyntheticDataService
from slicedmi.tasks import run_jobs

logger = logging.getLogger(__name__)


def multivariate_kl_mi(x, y, cfg: Optional[KnnConfig] = None, rng=None) -> float:
    """
    Classic MI by Kozachenko-Leonenko entropy decomposition in any dimension

    H(X) + H(Y) - H(X, Y) with k-d tree neighbor search. Scalar pairs take
    the same path as kl_mi_1d so both statistics agree exactly in 1-D; tied
    samples are jittered once as a pair, as estimate_smi does.
    """
    cfg = cfg or KnnConfig()
    x = as_sample_matrix(x, 'x')
    y = as_sample_matrix(y, 'y')
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    if x.shape[1] == 1 and y.shape[1] == 1:
        return kl_mi_1d(x[:, 0], y[:, 0], cfg, rng)

    x, y = jitter_degenerate_pair(x, y, cfg, rng)
    strict = KnnConfig(k=cfg.k, degeneracy_policy='error')
    terms = {}
    for term, samples in (('joint', np.hstack([x, y])), ('x', x), ('y', y)):
        try:
            terms[term] = kl_entropy_multivariate(samples, strict).value
        except SmiError as e:
            raise e.with_context(term=term)
    return terms['x'] + terms['y'] - terms['joint']


class IndependenceService:
    """Service for AUC-ROC independence-testing experiments"""

    @staticmethod
    def auc_roc(roc_input: RocInput) -> float:
        """
        Area under the ROC curve as the Mann-Whitney statistic

        Fraction of (positive, negative) pairs with positive > negative,
        ties counted as one half.
        """
        result = mannwhitneyu(roc_input.positive_scores, roc_input.negative_scores,
                              alternative='two-sided')
        pairs = roc_input.positive_scores.size * roc_input.negative_scores.size
        return float(result.statistic) / pairs

    @staticmethod
    def score_trial(plan: ExperimentPlan, d: int, n: int, trial_seed: int) -> Dict[str, Tuple[float, float]]:
        """
        Score one positive and one negative dataset with both statistics

        Returns:
            dict: estimator -> (positive score, negative score)
        """
        rng = SeededRng(trial_seed)
        knn = KnnConfig(k=plan.k, degeneracy_policy=plan.degeneracy_policy)
        positive = SyntheticDataService.generate(
            Scenario(kind=plan.scenario, n=n, d=d, seed=rng.derive_seed(0)))
        x_neg, y_neg = SyntheticDataService.generate(
            Scenario(kind=plan.scenario, n=n, d=d, seed=rng.derive_seed(1)))
        negative = SyntheticDataService.shuffle_pairing(x_neg, y_neg, rng.spawn(2))

        scores = {estimator: [] for estimator in ESTIMATORS}
        for role, (x, y) in enumerate((positive, negative)):
            estimator_seed = rng.derive_seed(3, role)
            smi = SmiService.estimate_smi(x, y, SmiConfig(m=plan.m, knn=knn, seed=estimator_seed))
            scores['SMI'].append(smi.value)
            scores['MI'].append(multivariate_kl_mi(x, y, knn))
        return {estimator: tuple(values) for estimator, values in scores.items()}

    @staticmethod
    def run_cell(plan: ExperimentPlan, cell_index: int, d: int, n: int) -> Dict[str, Any]:
        """Run every trial of one (d, n) cell; failures produce a diagnostic result"""
        root = SeededRng(plan.seed)
        trials = []
        try:
            for trial in range(plan.trials):
                trials.append(IndependenceService.score_trial(plan, d, n, root.derive_seed(cell_index, trial)))
        except SmiError as e:
            logger.error(f"Independence cell d={d}, n={n} aborted: {e}")
            logger.error(traceback.format_exc())
            return {'d': d, 'n': n, 'trials': trials, 'error': str(e)}
        return {'d': d, 'n': n, 'trials': trials, 'error': None}

    @staticmethod
    def run_independence_experiment(plan: ExperimentPlan, progress: bool = False) -> Dict[str, List[Dict[str, Any]]]:
        """
        Run the (d, n) grid and report AUC per estimator

        Args:
            plan (ExperimentPlan): Scenario, grid, trials and estimator settings
            progress (bool): Show a progress bar over cells

        Returns:
            dict: 'rows' (one per cell x estimator, CSV columns) and 'scores'
            (raw per-trial statistics for external ROC plotting)
        """
        if plan.seed is None:
            plan.seed = SeededRng().seed
        logger.info(f"Independence experiment: scenario={plan.scenario}, dims={plan.dims}, "
                    f"sample_sizes={plan.sample_sizes}, trials={plan.trials}, m={plan.m}, seed={plan.seed}")
        cells = [(index, d, n) for index, (d, n) in
                 enumerate((d, n) for d in plan.dims for n in plan.sample_sizes)]

        results = run_jobs(lambda cell: IndependenceService.run_cell(plan, *cell), cells,
                           threads=plan.threads, desc='cells', progress=progress)

        rows, scores = [], []
        for result in results:
            for estimator in ESTIMATORS:
                row = {'scenario': plan.scenario, 'd': result['d'], 'n': result['n'],
                       'estimator': estimator, 'auc': math.nan, 'trials': plan.trials,
                       'm': plan.m, 'k': plan.k, 'seed': plan.seed, 'error': ''}
                if result['error'] is None:
                    positives = [trial[estimator][0] for trial in result['trials']]
                    negatives = [trial[estimator][1] for trial in result['trials']]
                    row['auc'] = IndependenceService.auc_roc(RocInput(positives, negatives))
                    for trial_index, trial in enumerate(result['trials']):
                        for label, score in zip((1, 0), trial[estimator]):
                            scores.append({'scenario': plan.scenario, 'd': result['d'], 'n': result['n'],
                                           'estimator': estimator, 'trial': trial_index,
                                           'label': label, 'score': score})
                else:
                    row['error'] = result['error']
                rows.append(row)
        return {'rows': rows, 'scores': scores}
