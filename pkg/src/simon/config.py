"""Run configuration: defaults < config file < command-line settings.

Config files hold ``key = value`` lines (``#`` starts a comment).  Keys are
namespaced by module and every key must appear in :data:`SCHEMA`.
"""
import os

from .align import TrainConfig
from .foveation import FoveationConfig
from .sas import STRATEGIES, SamplingConfig


class ConfigError(ValueError):
    pass


def _choice(*allowed):
    def parse(text):
        if text not in allowed:
            raise ValueError(f"expected one of {allowed}")
        return text

    return parse


def _optional_float(text):
    return None if str(text).lower() in ("auto", "none", "") else float(text)


def _int_list(text):
    vals = [int(x) for x in str(text).split(",") if x.strip()]
    if not vals:
        raise ValueError("empty list")
    return vals


SCHEMA = {
    "sampling.k": (int, 3),
    "sampling.tau": (float, 0.5),
    "sampling.gamma": (float, 1.0),
    "sampling.strategy": (_choice(*STRATEGIES), "saliency_aware"),
    "foveation.bg_sigma": (float, 12.0),
    "foveation.sigma_max": (float, 8.0),
    "foveation.r_max": (_optional_float, None),
    "foveation.pyramid_levels": (int, 6),
    "embedding.dim": (int, 64),
    "manifold.curvature": (float, 1.0),
    "train.learning_rate": (float, 3e-4),
    "train.weight_decay": (float, 1e-4),
    "train.epochs": (int, 50),
    "train.batch_size": (int, 1024),
    "train.t": (float, 0.0),
    "retrieval.metric": (_choice("hyperbolic", "cosine"), "hyperbolic"),
    "retrieval.ks": (_int_list, [1, 5]),
    "stability.tau_lo": (float, 0.3),
    "stability.tau_hi": (float, 0.7),
    "synth.count": (int, 20),
    "synth.width": (int, 64),
    "synth.height": (int, 64),
    "synth.pairs": (int, 200),
    "synth.test_pairs": (int, 50),
    "synth.dim": (int, 16),
    "synth.noise": (float, 0.05),
    "run.seed": (int, 0),
    "run.jobs": (int, 0),
}


def _coerce(key, value):
    if key not in SCHEMA:
        raise ConfigError(f"unknown config key {key!r}")
    parse, _ = SCHEMA[key]
    if not isinstance(value, str):
        return value
    try:
        return parse(value.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value {value!r} for {key}: {exc}") from None


def parse_assignment(text):
    if "=" not in text:
        raise ConfigError(f"expected key=value, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def read_config_file(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                key, value = parse_assignment(line)
            except ConfigError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
            out[key] = value
    return out


class RunConfig(dict):
    """Flat mapping of validated settings."""

    @classmethod
    def build(cls, path=None, overrides=None):
        cfg = cls({k: default for k, (_, default) in SCHEMA.items()})
        layers = []
        if path:
            layers.append(read_config_file(path))
        if overrides:
            layers.append(dict(overrides))
        for layer in layers:
            for key, value in layer.items():
                cfg[key] = _coerce(key, value)
        cfg._validate()
        return cfg

    def _validate(self):
        try:
            self.sampling()
            self.foveation()
            self.train()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        dim = self["embedding.dim"]
        if dim < 1 or int(dim**0.5) ** 2 != dim:
            raise ConfigError("embedding.dim must be a positive perfect square")
        if self["manifold.curvature"] <= 0:
            raise ConfigError("manifold.curvature must be > 0")
        if not 0 <= self["stability.tau_lo"] < self["stability.tau_hi"] <= 1:
            raise ConfigError("need 0 <= stability.tau_lo < stability.tau_hi <= 1")

    @property
    def jobs(self):
        return self["run.jobs"] or (os.cpu_count() or 1)

    def sampling(self):
        return SamplingConfig(self["sampling.k"], self["sampling.tau"], self["sampling.gamma"],
                              self["sampling.strategy"], self["run.seed"])

    def foveation(self):
        return FoveationConfig(self["foveation.bg_sigma"], self["foveation.sigma_max"],
                               self["foveation.r_max"], self["foveation.pyramid_levels"])

    def train(self):
        return TrainConfig(learning_rate=self["train.learning_rate"], weight_decay=self["train.weight_decay"],
                           epochs=self["train.epochs"], batch_size=self["train.batch_size"],
                           rng_seed=self["run.seed"], t=self["train.t"])
