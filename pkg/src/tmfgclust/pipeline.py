"""End-to-end clustering pipeline with per-stage timing and reports.

Stages: initial faces, sorting, TMFG insertion, APSP, DBHT, linkage.
The driver itself is single-threaded; parallelism lives inside the stage
operations, and every stage output is independent of the worker count,
so reruns with any worker setting produce the same dendrogram digest.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import apsp as apsp_mod
from . import dbht as dbht_mod
from . import linkage as linkage_mod
from . import metrics, simmatrix
from . import tmfg as tmfg_mod

STAGES = ("initial_faces", "sorting", "tmfg_insertion", "apsp", "dbht", "linkage")


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    input_path: str | None = None
    input_format: str = "ucr"         # ucr | matrix
    variant: str = "heap"             # exact | corr | heap
    prefix_size: int = 1
    apsp_mode: str = "exact"          # exact | hub
    hub_count: int | None = None
    radius_factor: float | None = None
    k: int | None = None
    workers: int | None = None
    out_dir: str | None = None
    report_format: str = "json"       # json | text
    include_baseline_delta: bool = False

    def __post_init__(self):
        if self.input_format not in ("ucr", "matrix"):
            raise ValueError(f"unknown input format {self.input_format!r}")
        if self.variant not in ("exact", "corr", "heap"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.apsp_mode not in ("exact", "hub"):
            raise ValueError(f"unknown apsp mode {self.apsp_mode!r}")
        if self.report_format not in ("json", "text"):
            raise ValueError(f"unknown report format {self.report_format!r}")
        if self.prefix_size < 1:
            raise ValueError("prefix_size must be >= 1")
        if self.apsp_mode == "exact" and (self.hub_count is not None
                                          or self.radius_factor is not None):
            raise ValueError("hub parameters are only valid with --apsp hub")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")

    def echo(self) -> dict:
        return {
            "input_path": self.input_path,
            "input_format": self.input_format,
            "variant": self.variant,
            "prefix_size": self.prefix_size,
            "apsp_mode": self.apsp_mode,
            "hub_count": self.hub_count,
            "radius_factor": self.radius_factor,
            "k": self.k,
            "workers": self.workers,
        }


@dataclass
class RunReport:
    config: dict
    n: int
    k: int
    stage_seconds: dict
    total_seconds: float
    edge_sum: float
    digest: str
    num_converging: int
    ari: float | None = None
    edge_sum_delta: float | None = None
    load_seconds: float = 0.0
    similarity_seconds: float = 0.0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "config": self.config,
            "n": self.n,
            "k": self.k,
            "stage_seconds": dict(self.stage_seconds),
            "total_seconds": self.total_seconds,
            "edge_sum": self.edge_sum,
            "digest": self.digest,
            "num_converging": self.num_converging,
            "ari": self.ari,
            "edge_sum_delta": self.edge_sum_delta,
            "load_seconds": self.load_seconds,
            "similarity_seconds": self.similarity_seconds,
        }
        out.update(self.extras)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"n: {self.n}", f"k: {self.k}"]
        for name in STAGES:
            lines.append(f"{name}_seconds: {self.stage_seconds[name]:.6f}")
        lines.append(f"total_seconds: {self.total_seconds:.6f}")
        lines.append(f"edge_sum: {self.edge_sum:.12g}")
        if self.edge_sum_delta is not None:
            lines.append(f"edge_sum_delta_pct: {self.edge_sum_delta:.6g}")
        if self.ari is not None:
            lines.append(f"ari: {self.ari:.6g}")
        lines.append(f"num_converging: {self.num_converging}")
        lines.append(f"digest: {self.digest}")
        return "\n".join(lines) + "\n"


class _Timer:
    def __init__(self):
        self.seconds = {name: 0.0 for name in STAGES}

    def stage(self, name: str):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()
                return self

            def __exit__(self, exc_type, exc, tb):
                timer.seconds[name] += time.perf_counter() - self.t0
                if exc is not None and not isinstance(exc, StageError):
                    raise StageError(name, exc) from exc
                return False

        return _Ctx()


def load_input(config: PipelineConfig):
    """Read the configured input; returns (S, labels-or-None, load_s, similarity_s)."""
    if config.input_path is None:
        raise ValueError("config.input_path is not set")
    t0 = time.perf_counter()
    if config.input_format == "ucr":
        data = simmatrix.load_ucr_dataset(config.input_path)
        load_s = time.perf_counter() - t0
        t1 = time.perf_counter()
        S = simmatrix.pearson_similarity(data, workers=config.workers)
        return S, data.labels, load_s, time.perf_counter() - t1
    S = simmatrix.load_matrix(config.input_path)
    return S, None, time.perf_counter() - t0, 0.0


def run_stages(config: PipelineConfig, S: np.ndarray, labels=None):
    """The timed pipeline over an in-memory similarity matrix.

    Returns (report, graph, dendrogram, flat_labels).
    """
    if labels is not None:
        labels = np.asarray(labels)
    k = config.k if config.k is not None else (
        int(labels.max()) + 1 if labels is not None else None)
    if k is None:
        raise ValueError("k is required when the input has no ground-truth labels")
    n = S.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range 1..{n}")

    timer = _Timer()
    total0 = time.perf_counter()

    with timer.stage("initial_faces"):
        tmfg_mod.select_initial_clique(S)

    lists = None
    with timer.stage("sorting"):
        if config.variant != "exact":
            lists = simmatrix.sort_neighbor_lists(S, workers=config.workers)

    with timer.stage("tmfg_insertion"):
        build_cfg = tmfg_mod.BuildConfig(variant=config.variant,
                                         prefix_size=config.prefix_size)
        graph = tmfg_mod.build_tmfg(S, lists, build_cfg)

    with timer.stage("apsp"):
        weighted = apsp_mod.to_weighted(graph, S)
        if config.apsp_mode == "exact":
            oracle = apsp_mod.apsp_exact(weighted, workers=config.workers)
        else:
            params = apsp_mod.ApspParams(
                hub_count=config.hub_count,
                radius_factor=config.radius_factor if config.radius_factor is not None else 2.0,
            )
            oracle = apsp_mod.apsp_hub(weighted, params, workers=config.workers)

    with timer.stage("dbht"):
        tree = dbht_mod.build_bubble_tree(graph)
        dtree = dbht_mod.orient_edges(tree, S)
        assignment = dbht_mod.assign_vertices(graph, dtree, oracle)

    with timer.stage("linkage"):
        dendrogram = dbht_mod.build_hierarchy(assignment, dtree, oracle,
                                              workers=config.workers)
        flat = linkage_mod.cut(dendrogram, k)

    total = time.perf_counter() - total0
    text = linkage_mod.serialize_dendrogram(dendrogram)
    digest = hashlib.sha256(text.encode()).hexdigest()
    report = RunReport(
        config=config.echo(),
        n=n,
        k=k,
        stage_seconds=timer.seconds,
        total_seconds=total,
        edge_sum=tmfg_mod.edge_sum(graph, S),
        digest=digest,
        num_converging=int(np.unique(assignment.vertex_converging).size),
        ari=float(metrics.ari(labels, flat)) if labels is not None else None,
    )
    return report, graph, dendrogram, flat


def _write_outputs(config: PipelineConfig, report: RunReport, dendrogram, flat):
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        dpath = out / "dendrogram.txt"
        linkage_mod.save_dendrogram(dendrogram, dpath)
        written.append(dpath)
        lpath = out / "labels.txt"
        lpath.write_text("".join(f"{int(x)}\n" for x in flat))
        written.append(lpath)
        rpath = out / ("report.json" if config.report_format == "json" else "report.txt")
        rpath.write_text(report.to_json() if config.report_format == "json"
                         else report.to_text())
        written.append(rpath)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise


def run_pipeline(config: PipelineConfig, S: np.ndarray | None = None, labels=None) -> RunReport:
    """Run load -> similarity -> sort -> TMFG -> APSP -> DBHT -> cut -> ARI.

    S (and labels) may be passed directly to skip file loading. With
    config.out_dir set, writes dendrogram.txt, labels.txt and the report
    file; partial outputs are removed if a stage fails.
    """
    load_s = sim_s = 0.0
    if S is None:
        S, labels, load_s, sim_s = load_input(config)
    report, graph, dendrogram, flat = run_stages(config, S, labels)
    report.load_seconds = load_s
    report.similarity_seconds = sim_s
    if config.include_baseline_delta:
        if config.variant == "exact" and config.prefix_size == 1:
            report.edge_sum_delta = 0.0
        else:
            baseline = tmfg_mod.build_tmfg_exact(S, tmfg_mod.BuildConfig(variant="exact"))
            report.edge_sum_delta = metrics.edge_sum_delta(graph, baseline, S)
    if config.out_dir is not None:
        _write_outputs(config, report, dendrogram, flat)
    return report


def parse_variant_token(token: str) -> tuple[str, int]:
    """Parse a comparison token: "heap", "corr", "exact" or "exact:200"."""
    name, _, prefix = token.strip().partition(":")
    if name not in ("exact", "corr", "heap"):
        raise ValueError(f"unknown variant token {token!r}")
    return name, int(prefix) if prefix else 1


def compare_variants(config: PipelineConfig, variants) -> list[dict]:
    """Run the pipeline once per variant on the same input.

    Each entry reports the variant plus its edge-sum reduction against
    the exact prefix-1 baseline built on the same matrix.
    """
    tokens = [v for v in variants if str(v).strip()]
    if len(tokens) < 2:
        raise ValueError("compare_variants needs at least 2 variants")
    parsed = [parse_variant_token(t) for t in tokens]
    S, labels, _, _ = load_input(config)
    baseline = tmfg_mod.build_tmfg_exact(S, tmfg_mod.BuildConfig(variant="exact"))
    rows = []
    for token, (name, prefix) in zip(tokens, parsed):
        cfg = PipelineConfig(**{**config.__dict__, "variant": name,
                                "prefix_size": prefix, "out_dir": None})
        report, graph, _, _ = run_stages(cfg, S, labels)
        report.edge_sum_delta = metrics.edge_sum_delta(graph, baseline, S)
        rows.append({"variant": token, "report": report,
                     "edge_sum_delta": report.edge_sum_delta})
    return rows
