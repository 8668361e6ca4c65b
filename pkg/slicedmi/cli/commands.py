"""
Command handlers

Each handler resolves its RunConfig section (file values, then flag
overrides, then seeds), runs the service and writes its outputs into the
output directory. Every output embeds the resolved configuration. Handlers
return the list of written paths and let errors propagate to main().
"""
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np

from slicedmi.cli.datasets import load_table, write_csv, write_json, write_table
from slicedmi.exceptions import ConfigError, NearSingularError
from slicedmi.models.estimates import convert_unit
from slicedmi.models.experiment import CSV_COLUMNS, SCORE_COLUMNS, ExperimentPlan
from slicedmi.models.gaussian_spec import GaussianSpec
from slicedmi.models.rate_report import RATE_COLUMNS, RateGrid
from slicedmi.models.run_config import DataSource, ExtractSection, OracleSection, RunConfig, SmineSection
from slicedmi.models.scenario import Scenario
from slicedmi.models.settings import SmiConfig
from slicedmi.services.convergence_service import ConvergenceService
from slicedmi.services.independence_service import IndependenceService
from slicedmi.services.oracle_service import GaussianOracleService
from slicedmi.services.sampling_service import SeededRng
from slicedmi.services.smi_service import SmiService
from slicedmi.services.smine_service import SmineService
from slicedmi.services.synthetic_service import SyntheticDataService

logger = logging.getLogger(__name__)

# Default spec of the rate sweep: X = Z_{1:3}, Y = Z_{2:4} with Z ~ N(0, I_4)
DEFAULT_RATE_SPEC = {'overlap': {'d_total': 4, 'x_range': [1, 3], 'y_range': [2, 4]}}


def _merged(record_type, record, overrides: Dict[str, Any]):
    """Re-validate a record with non-None overrides applied"""
    data = record.to_dict() if record is not None else {}
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict):
            data[key] = {**(data.get(key) or {}), **{k: v for k, v in value.items() if v is not None}}
        else:
            data[key] = value
    return record_type.from_dict(data)


def _int_list(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    try:
        return [int(part) for part in text.replace(' ', '').split(',') if part]
    except ValueError as e:
        raise ConfigError(f"expected a comma-separated integer list, got {text!r}") from e


def _str_list(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    return [part for part in text.replace(' ', '').split(',') if part]


def _data_seed(run_config: RunConfig) -> int:
    return SeededRng(run_config.seed).derive_seed(1)


def _load_source(source: DataSource) -> tuple:
    if source.scenario is not None:
        scenario = source.scenario
        if scenario.seed is None:
            scenario.seed = source.seed
        return SyntheticDataService.generate(scenario)
    return SyntheticDataService.sample_gaussian(source.gaussian, source.n, SeededRng(source.seed))


def _training_data(args, section, run_config: RunConfig):
    if args.x is not None or args.y is not None:
        if args.x is None or args.y is None:
            raise ConfigError("dataset files must be given as a pair x y")
        return load_table(args.x), load_table(args.y)
    if section.data.empty:
        raise ConfigError(f"{args.command} needs dataset files or a data section in the run configuration")
    if section.data.seed is None:
        section.data.seed = _data_seed(run_config)
    return _load_source(section.data)


def _output(output_dir: str, name: str) -> str:
    return os.path.join(output_dir, name)


def cmd_estimate(args, run_config: RunConfig, output_dir: str, progress: bool = False) -> List[str]:
    """Nonparametric SMI of two dataset files"""
    cfg = _merged(SmiConfig, run_config.estimate, {
        'm': args.m,
        'knn': {'k': args.k, 'degeneracy_policy': args.policy},
        'clip_negative_slices': True if args.clip else None,
        'threads': run_config.threads,
    })
    if cfg.seed is None:
        cfg.seed = run_config.seed
    run_config.estimate = cfg

    x = load_table(args.x)
    y = load_table(args.y)
    estimate = SmiService.estimate_smi(x, y, cfg, progress=progress)

    document = estimate.to_dict(run_config.unit, include_slices=args.per_slice)
    document['config'] = run_config.to_dict()
    return [write_json(_output(output_dir, 'estimate.json'), document)]


def cmd_oracle(args, run_config: RunConfig, output_dir: str, progress: bool = False) -> List[str]:
    """Closed-form Gaussian SMI report"""
    overrides = {'m': args.m, 'quadrature_grid': args.quadrature_grid}
    if args.rho is not None:
        overrides['spec'] = GaussianSpec.scalar(args.rho).to_dict()
    section = _merged(OracleSection, run_config.oracle, overrides)
    if section.spec is None:
        raise ConfigError("oracle needs a spec in the run configuration or --rho")
    if section.seed is None:
        section.seed = run_config.seed
    run_config.oracle = section

    unit = run_config.unit
    spec = section.spec
    estimate = GaussianOracleService.gaussian_smi_mc(spec, section.m, seed=section.seed)
    cca = GaussianOracleService.cca_coefficient(spec)
    document: Dict[str, Any] = {'smi': estimate.to_dict(unit), 'cca': cca,
                                'mi': None, 'upper_bound': None, 'logconcave': None, 'quadrature': None}
    try:
        document['mi'] = convert_unit(GaussianOracleService.gaussian_mi(spec), unit)
        document['upper_bound'] = convert_unit(GaussianOracleService.gaussian_smi_upper_bound(spec), unit)
        check = ConvergenceService.check_logconcave_bound(
            spec, slices=section.bound_slices, seed=SeededRng(section.seed).derive_seed(2))
        document['logconcave'] = {**check.to_dict(), 'margin': convert_unit(check.margin, unit),
                                  'bound': convert_unit(check.bound, unit),
                                  'max_slice_mi': convert_unit(check.max_slice_mi, unit)}
    except NearSingularError as e:
        logger.warning(f"Skipping bounds: {e}")
    if section.quadrature_grid and spec.d_x == 2 and spec.d_y == 2:
        document['quadrature'] = convert_unit(
            GaussianOracleService.gaussian_smi_quadrature_2d(spec, section.quadrature_grid), unit)

    document['config'] = run_config.to_dict()
    return [write_json(_output(output_dir, 'oracle.json'), document)]


def cmd_indep(args, run_config: RunConfig, output_dir: str, progress: bool = False) -> List[str]:
    """Independence-testing AUC table plus raw per-trial scores"""
    plan = _merged(ExperimentPlan, run_config.indep, {
        'scenario': args.scenario,
        'dims': _int_list(args.dims),
        'sample_sizes': _int_list(args.sizes),
        'trials': args.trials,
        'm': args.m,
        'k': args.k,
        'threads': run_config.threads,
    }) if (run_config.indep is not None or args.scenario is not None) else None
    if plan is None:
        raise ConfigError("indep needs an indep section in the run configuration or --scenario")
    if plan.seed is None:
        plan.seed = run_config.seed
    run_config.indep = plan

    result = IndependenceService.run_independence_experiment(plan, progress=progress)
    for row in result['scores']:
        row['score'] = convert_unit(row['score'], run_config.unit)

    provenance = run_config.to_json()
    return [
        write_csv(_output(output_dir, 'indep.csv'), CSV_COLUMNS, result['rows'], provenance),
        write_csv(_output(output_dir, 'indep_scores.csv'), SCORE_COLUMNS, result['scores'], provenance),
    ]


def cmd_rates(args, run_config: RunConfig, output_dir: str, progress: bool = False) -> List[str]:
    """RMSE-versus-(n, m) sweep with slope summary"""
    base = run_config.rates
    overrides = {'trials': args.trials, 'truth': args.truth, 'threads': run_config.threads,
                 'sweeps': _str_list(args.sweeps), 'n_values': _int_list(args.n_values),
                 'm_values': _int_list(args.m_values), 'classic_mi': args.classic_mi}
    if base is None:
        overrides['spec'] = DEFAULT_RATE_SPEC
        logger.info("No rates section; sweeping the default overlap spec")
    grid = _merged(RateGrid, base, overrides)
    if grid.seed is None:
        grid.seed = run_config.seed
    run_config.rates = grid

    unit = run_config.unit
    report = ConvergenceService.run_rate_sweep(grid, progress=progress)
    rows = [{**row.to_dict(), 'rmse': convert_unit(row.rmse, unit),
             'mi_rmse': convert_unit(row.mi_rmse, unit) if row.mi_rmse is not None else None}
            for row in report.rows]
    summary = report.summary(unit_scale=convert_unit(1.0, unit))
    summary['config'] = run_config.to_dict()
    return [
        write_csv(_output(output_dir, 'rates.csv'), RATE_COLUMNS, rows, run_config.to_json()),
        write_json(_output(output_dir, 'rates_summary.json'), summary),
    ]


def cmd_smine(args, run_config: RunConfig, output_dir: str, progress: bool = False) -> List[str]:
    """Train the variational estimator; writes the model and the held-out curve"""
    section = _merged(SmineSection, run_config.smine, {
        'train': {'epochs': args.epochs, 'batch_size': args.batch_size,
                  'learning_rate': args.learning_rate, 'optimizer': args.optimizer,
                  'slicing': False if args.no_slicing else None},
        'slices_per_batch': args.slices_per_batch,
    })
    if section.train.seed is None:
        section.train.seed = run_config.seed
    run_config.smine = section

    x, y = _training_data(args, section, run_config)
    result = SmineService.train_smine(x, y, section.train, slices_per_batch=section.slices_per_batch,
                                      progress=progress)

    document = result.to_dict(run_config.unit)
    document['config'] = run_config.to_dict()
    curve = [{'epoch': epoch, 'estimate': value} for epoch, value in enumerate(document['estimate_curve'])]
    return [
        write_json(_output(output_dir, 'smine.json'), document),
        write_csv(_output(output_dir, 'smine_curve.csv'), ('epoch', 'estimate'), curve, run_config.to_json()),
    ]


def cmd_extract(args, run_config: RunConfig, output_dir: str, progress: bool = False) -> List[str]:
    """Learn SMI-maximizing linear maps; writes maps, model and a row table of A_x"""
    section = _merged(ExtractSection, run_config.extract, {
        'train': {'epochs': args.epochs, 'batch_size': args.batch_size,
                  'learning_rate': args.learning_rate, 'optimizer': args.optimizer},
        'r_x': args.r_x,
        'r_y': args.r_y,
    })
    if section.train.seed is None:
        section.train.seed = run_config.seed
    run_config.extract = section

    x, y = _training_data(args, section, run_config)
    r_x = section.r_x if section.r_x is not None else np.atleast_2d(x).shape[1]
    result = SmineService.feature_extract(x, y, r_x, section.r_y, section.train, progress=progress)

    maps = result.maps
    alignment = maps.row_alignment()
    dominant = maps.dominant_indices()
    width = maps.a_x.shape[1]
    columns = ('row', 'dominant', 'alignment') + tuple(f"a{j + 1}" for j in range(width))
    rows = []
    for index, values in enumerate(maps.a_x):
        row = {'row': index + 1, 'dominant': int(dominant[index]), 'alignment': float(alignment[index])}
        row.update({f"a{j + 1}": float(v) for j, v in enumerate(values)})
        rows.append(row)

    document = result.to_dict(run_config.unit)
    document['config'] = run_config.to_dict()
    return [
        write_json(_output(output_dir, 'extract.json'), document),
        write_csv(_output(output_dir, 'extract_rows.csv'), columns, rows, run_config.to_json()),
    ]


def cmd_gen(args, run_config: RunConfig, output_dir: str, progress: bool = False) -> List[str]:
    """Write a synthetic scenario as x.csv / y.csv dataset tables"""
    overrides = {
        'kind': args.scenario,
        'n': args.n,
        'd': args.d,
        'd_total': args.d_total,
        'x_range': _int_list(args.x_range),
        'y_range': _int_list(args.y_range),
    }
    if run_config.gen is None and args.scenario is None:
        raise ConfigError("gen needs a gen section in the run configuration or --scenario")
    scenario = _merged(Scenario, run_config.gen, overrides)
    if scenario.seed is None:
        scenario.seed = _data_seed(run_config)
    run_config.gen = scenario

    x, y = SyntheticDataService.generate(scenario)
    return [
        write_table(_output(output_dir, 'x.csv'), x),
        write_table(_output(output_dir, 'y.csv'), y),
        write_json(_output(output_dir, 'gen.json'), {'config': run_config.to_dict(),
                                                      'shape_x': list(x.shape), 'shape_y': list(y.shape)}),
    ]


COMMANDS = {
    'estimate': cmd_estimate,
    'oracle': cmd_oracle,
    'indep': cmd_indep,
    'rates': cmd_rates,
    'smine': cmd_smine,
    'extract': cmd_extract,
    'gen': cmd_gen,
}
