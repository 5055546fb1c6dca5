"""Tile-based Gaussian splat rendering with reused per-tile depth tables."""

import json

from ._splatsort import (
    ContractError,
    Error,
    Scene,
    baseline_sort_traffic,
    chunk_boundaries,
    dynamic_partial_sort,
    load_ply,
    merge_update,
    nearest_rank,
    psnr,
    rank_displacements,
    read_ppm,
    retention_fraction,
    run_json,
    save_ply,
    synth_scene,
)


def run(config):
    """Render a run described by a config dict (same keys as the CLI's JSON config).

    Returns a dict with per-mode traffic summaries, the similarity report and,
    when both modes ran, the per-frame PSNR series. Infinite PSNR is the string "inf".
    """
    return json.loads(run_json(json.dumps(config)))


__all__ = [
    "ContractError",
    "Error",
    "Scene",
    "baseline_sort_traffic",
    "chunk_boundaries",
    "dynamic_partial_sort",
    "load_ply",
    "merge_update",
    "nearest_rank",
    "psnr",
    "rank_displacements",
    "read_ppm",
    "retention_fraction",
    "run",
    "save_ply",
    "synth_scene",
]
