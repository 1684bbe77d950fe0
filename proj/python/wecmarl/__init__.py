"""Wave energy converter multi-agent control toolkit.

Thin Python surface over the C++ core: wave synthesis, the surrogate
simulator with its spring-damper baseline, schedule training, paired
evaluation, and hyperparameter search. Configurations are the same JSON
documents the ``wecmarl`` CLI reads.
"""

import json as _json

from ._core import (
    default_config,
    evaluate,
    gain_vs_baseline,
    hyper_search,
    impedance_bound,
    normalize_config,
    sd_episode,
    shaped_reward,
    spectrum_energy,
    train,
    wave_elevation,
)

__all__ = [
    "config_dict",
    "default_config",
    "evaluate",
    "gain_vs_baseline",
    "hyper_search",
    "impedance_bound",
    "normalize_config",
    "sd_episode",
    "shaped_reward",
    "spectrum_energy",
    "train",
    "wave_elevation",
]


def config_dict(overrides=None):
    """Default configuration as a dict, with ``overrides`` deep-merged in.

    Convenience for building the JSON documents that ``train``, ``evaluate``,
    and ``gain_vs_baseline`` expect::

        cfg = wecmarl.config_dict({"seed": 7, "training": {"hidden": 32}})
        report = wecmarl.train(json.dumps(cfg))
    """
    cfg = _json.loads(default_config())

    def merge(base, extra):
        for key, value in extra.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                merge(base[key], value)
            else:
                base[key] = value

    if overrides:
        merge(cfg, overrides)
    return cfg
