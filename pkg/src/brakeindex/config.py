"""Run configuration.

Defaults live here; a JSON file and BIT_* environment variables can
override them.  Dotted key names (``tol.symplectic``) are the external
spelling; attributes use underscores.
"""

from __future__ import annotations

import dataclasses
import json
import os


@dataclasses.dataclass(frozen=True)
class Config:
    tol_symplectic: float = 1e-9
    tol_rank: float = 1e-8
    tol_zero_eig: float = 1e-6
    ode_steps: int = 4096
    fourier_K: int = 32
    shooting_max_iter: int = 100

    def as_dict(self):
        # external dotted spelling, stable ordering
        return {
            "tol.symplectic": self.tol_symplectic,
            "tol.rank": self.tol_rank,
            "tol.zero_eig": self.tol_zero_eig,
            "ode.steps": self.ode_steps,
            "fourier.K": self.fourier_K,
            "shooting.max_iter": self.shooting_max_iter,
        }


DEFAULT = Config()

_KEYMAP = {
    "tol.symplectic": ("tol_symplectic", float),
    "tol.rank": ("tol_rank", float),
    "tol.zero_eig": ("tol_zero_eig", float),
    "ode.steps": ("ode_steps", int),
    "fourier.K": ("fourier_K", int),
    "shooting.max_iter": ("shooting_max_iter", int),
}

ENV_PREFIX = "BIT_"


def _env_name(dotted):
    return ENV_PREFIX + dotted.replace(".", "_").upper()


def load_config(path=None, env=None):
    """Build a Config from defaults, an optional JSON file, then env vars.

    Precedence: defaults < file < environment.
    """
    from .errors import ValidationError

    values = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise ValidationError("config file must contain a JSON object")
        for key, raw in doc.items():
            if key not in _KEYMAP:
                raise ValidationError(f"unknown config key {key!r}")
            attr, cast = _KEYMAP[key]
            values[attr] = cast(raw)
    env = os.environ if env is None else env
    for dotted, (attr, cast) in _KEYMAP.items():
        raw = env.get(_env_name(dotted))
        if raw is not None:
            try:
                values[attr] = cast(raw)
            except ValueError as exc:
                raise ValidationError(
                    f"bad value for {_env_name(dotted)}: {raw!r}"
                ) from exc
    return dataclasses.replace(DEFAULT, **values)
