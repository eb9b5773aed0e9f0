#!/usr/bin/env python3
"""
Sweep runner

Runs (instance, model) tasks:
- Trains each model on the instance's shared sample and band
- Evaluates the exact metrics of the resulting table
- Appends one RunRecord per task to the result store
"""

import hashlib
import json
import logging
import multiprocessing
import signal
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from threading import Event

from .. import __version__
from ..benchmark import BenchmarkConfig, make_instance, model_init_rng
from ..config import Config
from ..errors import ContractViolation, TrainingDivergence
from ..metrics import evaluate
from ..models import IqpModel, IsingModel, MaxEntModel
from ..spectral import region_visibility, spectral_proxy
from ..trainer import LossSpec, OptimizerConfig, train
from ..walsh import ProbabilityTable
from .store import (
    STATUS_DIVERGED,
    STATUS_FAILED,
    ResultStore,
    RunRecord,
    record_key,
)

logger = logging.getLogger('parity_bench.runner')

TRAINED_MODELS = ("iqp-parity", "iqp-mse", "ising-sparse", "ising-dense", "maxent")
REFERENCE_MODELS = (
    "spectral-proxy",
    "spectral-proxy-support",
    "uniform",
    "uniform-support",
)
MODEL_NAMES = TRAINED_MODELS + REFERENCE_MODELS

# Models whose table does not depend on the parity band
BAND_INDEPENDENT = frozenset(
    {"iqp-mse", "ising-dense", "uniform", "uniform-support"}
)

# Loss-swap partners start from the same parameters
_INIT_STREAM = {"iqp-parity": "iqp", "iqp-mse": "iqp"}


@dataclass(frozen=True)
class RunSettings:
    """Everything besides the instance that changes a run's outcome."""

    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    budgets: tuple = Config.BUDGETS
    init_scale: float = Config.INIT_SCALE

    def config_version(self):
        payload = json.dumps(
            {
                "optimizer": asdict(self.optimizer),
                "budgets": list(self.budgets),
                "init_scale": self.init_scale,
                "version": __version__,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:16]


def check_models(models):
    unknown = sorted(set(models) - set(MODEL_NAMES))
    if unknown:
        raise ContractViolation(f"unknown models: {', '.join(unknown)}")
    return tuple(models)


def build_model(instance, name):
    """Model object and training objective for a trained model name."""
    n = instance.n
    if name == "iqp-parity":
        return IqpModel(n, name=name), LossSpec("parity", band=instance.band)
    if name == "iqp-mse":
        loss = LossSpec(
            "mse", train_table=instance.train_table(), support=instance.support
        )
        return IqpModel(n, name=name), loss
    if name == "ising-sparse":
        return IsingModel.sparse(n), LossSpec("parity", band=instance.band)
    if name == "ising-dense":
        loss = LossSpec("cross_entropy", train_table=instance.train_table())
        return IsingModel.dense(n), loss
    if name == "maxent":
        return MaxEntModel(instance.band), LossSpec("maxent_dual", band=instance.band)
    raise ContractViolation(f"'{name}' is not a trained model")


def _reference_table(instance, name):
    n = instance.n
    if name == "uniform":
        return ProbabilityTable.uniform(n), {}
    if name == "uniform-support":
        return ProbabilityTable.uniform(n, instance.support), {}
    support = instance.support if name == "spectral-proxy-support" else None
    proxy = spectral_proxy(instance.band, n, support)
    uniform_mass, visibility = region_visibility(
        instance.band, instance.unseen_elite, n
    )
    extras = {
        "negative_mass_clipped": proxy.negative_mass_clipped,
        "off_support_mass": proxy.off_support_mass,
        "elite_uniform_mass": uniform_mass,
        "elite_visibility": visibility,
    }
    return proxy.projected, extras


def run_model(instance, name, settings):
    """Train or build one model and evaluate it; failures become flagged records."""
    identity = instance.config.identity()
    version = settings.config_version()
    record = RunRecord(
        key=record_key(identity, name, version),
        instance=identity,
        model=name,
        config_version=version,
        train_checksum=instance.train_checksum(),
        band_checksum=instance.band.checksum(),
    )
    started = time.perf_counter()
    try:
        if name in TRAINED_MODELS:
            model, loss = build_model(instance, name)
            rng = model_init_rng(instance.config.seed, _INIT_STREAM.get(name, name))
            result = train(
                model,
                loss,
                settings.optimizer,
                params=model.init_params(rng, settings.init_scale),
            )
            table = model.distribution(result.params)
            record.params = model.to_record(result.params)
            record.loss_trace = result.loss_trace.tolist()
            extras = {"final_loss": result.final_loss}
        else:
            table, extras = _reference_table(instance, name)
        record.metrics = evaluate(instance, table, settings.budgets, extras).to_dict()
    except TrainingDivergence as e:
        logger.warning("%s diverged on %s: %s", name, identity, e)
        record.status = STATUS_DIVERGED
        record.error = str(e)
        record.loss_trace = list(e.loss_trace)
    except Exception as e:
        logger.error("%s failed on %s: %s", name, identity, e, exc_info=True)
        record.status = STATUS_FAILED
        record.error = f"{type(e).__name__}: {e}"
    record.wall_clock = time.perf_counter() - started
    return record


def run_instance(instance, models, settings=None):
    """Run every requested model on one instance.

    Returns:
        list: One RunRecord per model, in request order.
    """
    settings = settings or RunSettings()
    return [run_model(instance, name, settings) for name in check_models(models)]


@lru_cache(maxsize=4)
def _cached_instance(config):
    return make_instance(config)


def _run_task(task):
    """Pool entry point: build (or reuse) the instance and run one model."""
    config, name, settings = task
    try:
        instance = _cached_instance(config)
    except Exception as e:
        logger.error("Instance %s failed: %s", config, e, exc_info=True)
        identity = config.identity()
        version = settings.config_version()
        return RunRecord(
            key=record_key(identity, name, version),
            instance=identity,
            model=name,
            config_version=version,
            status=STATUS_FAILED,
            error=f"{type(e).__name__}: {e}",
        )
    return run_model(instance, name, settings)


def _ignore_sigint():
    signal.signal(signal.SIGINT, signal.SIG_IGN)


@dataclass(frozen=True)
class SweepSpec:
    """A grid of instances and the models to run on each.

    The first band is the reference band; band-independent models are run
    on it only.
    """

    betas: tuple = Config.BETAS
    seeds: tuple = Config.SEEDS
    n: int = Config.N
    bands: tuple = ((Config.SIGMA, Config.K),)
    models: tuple = Config.MODELS
    budgets: tuple = Config.BUDGETS
    m: int = Config.M
    tau: float = Config.TAU
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    init_scale: float = Config.INIT_SCALE

    def __post_init__(self):
        check_models(self.models)
        if not (self.betas and self.seeds and self.bands and self.models):
            raise ContractViolation("sweep needs betas, seeds, bands and models")

    @property
    def settings(self):
        return RunSettings(
            optimizer=self.optimizer,
            budgets=tuple(self.budgets),
            init_scale=self.init_scale,
        )

    def tasks(self):
        """(BenchmarkConfig, model name) pairs in a fixed order."""
        tasks = []
        for index, (sigma, K) in enumerate(self.bands):
            for beta in self.betas:
                for seed in self.seeds:
                    config = BenchmarkConfig(
                        n=self.n, beta=beta, seed=seed, m=self.m,
                        sigma=sigma, K=K, tau=self.tau,
                    )
                    for name in self.models:
                        if index > 0 and name in BAND_INDEPENDENT:
                            continue
                        tasks.append((config, name))
        return tasks


class SweepRunner:
    """
    Orchestrates one sweep over a result store.

    Tasks whose key is already stored are skipped. Records are appended in
    the main process as workers finish them.
    """

    def __init__(self, spec, store, workers=1):
        self.spec = spec
        self.store = store
        self.workers = max(1, int(workers))
        self.settings = spec.settings
        self.shutdown_event = Event()
        self.stats = {
            "scheduled": 0,
            "skipped": 0,
            "completed": 0,
            "failed": 0,
        }

    def setup_signal_handlers(self):
        """Setup graceful shutdown on SIGTERM and SIGINT."""
        signal.signal(signal.SIGTERM, self._handle_shutdown)
        signal.signal(signal.SIGINT, self._handle_shutdown)

    def _handle_shutdown(self, signum, frame):
        """Handle shutdown signal."""
        logger.info("Received signal %s, finishing current tasks...", signum)
        self.shutdown_event.set()

    def pending(self):
        version = self.settings.config_version()
        pending = []
        for config, name in self.spec.tasks():
            if record_key(config.identity(), name, version) in self.store:
                self.stats["skipped"] += 1
            else:
                pending.append((config, name, self.settings))
        return pending

    def _store(self, record):
        self.store.append(record)
        self.stats["completed"] += 1
        if not record.ok:
            self.stats["failed"] += 1
        logger.info(
            "✓ %s beta=%s seed=%s sigma=%s K=%s: %s (%.1fs)",
            record.model, record.instance["beta"], record.instance["seed"],
            record.instance["sigma"], record.instance["K"], record.status,
            record.wall_clock,
        )

    def run(self):
        """Run every pending task.

        Returns:
            dict: Scheduled, skipped, completed and failed counts.
        """
        tasks = self.pending()
        self.stats["scheduled"] = len(tasks)
        logger.info("=" * 70)
        logger.info("Sweep starting")
        logger.info("=" * 70)
        logger.info("Store: %s", self.store.path)
        logger.info(
            "Tasks: %s pending, %s already stored, %s workers",
            len(tasks), self.stats["skipped"], self.workers,
        )
        logger.info("=" * 70)

        if self.workers == 1:
            for task in tasks:
                if self.shutdown_event.is_set():
                    break
                self._store(_run_task(task))
        elif tasks:
            chunk = max(1, len(self.spec.models))
            with multiprocessing.Pool(self.workers, initializer=_ignore_sigint) as pool:
                for record in pool.imap_unordered(_run_task, tasks, chunksize=chunk):
                    self._store(record)
                    if self.shutdown_event.is_set():
                        pool.terminate()
                        break

        logger.info("=" * 70)
        if self.shutdown_event.is_set():
            logger.info("Sweep interrupted; rerun to resume")
        logger.info(
            "Sweep finished: %s completed, %s failed, %s skipped",
            self.stats["completed"], self.stats["failed"], self.stats["skipped"],
        )
        logger.info("=" * 70)
        return self.stats


def run_sweep(spec, workers=1, store=None, path=None):
    """Run a sweep into a store and return the store.

    Args:
        spec: SweepSpec to execute.
        workers: Worker process count.
        store: Existing ResultStore; one is opened at path otherwise.
        path: JSONL location used when store is None.
    """
    if store is None:
        store = ResultStore(path or Config().store_path)
    SweepRunner(spec, store, workers).run()
    return store
