"""JSON run configuration: parsing, validation and serialization."""

from __future__ import annotations

import json
import math
import numbers
from dataclasses import dataclass
from typing import Optional

from .core import GroupParams, ReceiverKind, SystemModel, derive_params, effective_epsilon
from .errors import InfeasibleTargetSIR, ParseError, ValidationError
from .power_control import DEFAULT_MAX_ITER, DEFAULT_TOL, UpdateSchedule
from .regions import DEFAULT_BISECT_TOL, DEFAULT_M, ArchitectureKind

TOP_KEYS = {
    "sigma2", "groups", "order", "receiver", "arch", "M", "schedule", "seed",
    "tol", "max_iter", "sweep", "bisect_tol", "out",
}
GROUP_REQUIRED = ("alpha", "gamma", "hbar2", "xi2", "paths")
GROUP_OPTIONAL = ("epsilon", "pathloss")
DEFAULT_SWEEP = (0.0, 2.0, 0.01)


@dataclass(frozen=True)
class RunConfig:
    system: SystemModel
    order: tuple  # 0-based class labels in detection order
    receiver: ReceiverKind = ReceiverKind.LMMSE
    arch: ArchitectureKind = ArchitectureKind.GsicLmmse
    m: int = DEFAULT_M
    schedule: UpdateSchedule = UpdateSchedule.Synchronous
    seed: int = 0
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    sweep: tuple = DEFAULT_SWEEP
    bisect_tol: float = DEFAULT_BISECT_TOL
    out: Optional[str] = None
    pathloss: tuple = ()

    def to_dict(self) -> dict:
        groups = []
        for g, z in zip(self.system.groups, self.pathloss):
            item = {"alpha": g.alpha, "gamma": g.gamma, "hbar2": g.hbar2, "xi2": g.xi2, "paths": g.paths}
            if g.epsilon_override is not None:
                item["epsilon"] = g.epsilon_override
            item["pathloss"] = z
            groups.append(item)
        data = {
            "sigma2": self.system.sigma2,
            "groups": groups,
            "order": [c + 1 for c in self.order],
            "receiver": self.receiver.value,
            "arch": self.arch.value,
            "M": self.m,
            "schedule": self.schedule.value,
            "seed": self.seed,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "sweep": "{!r}:{!r}:{!r}".format(*self.sweep),
            "bisect_tol": self.bisect_tol,
        }
        if self.out is not None:
            data["out"] = self.out
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _number(value, path, *, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(f"expected a number, got {value!r}", path)
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError("must be finite", path)
    if positive and not value > 0:
        raise ValidationError(f"must be > 0, got {value}", path)
    if nonneg and not value >= 0:
        raise ValidationError(f"must be >= 0, got {value}", path)
    return value


def _integer(value, path, minimum):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"expected an integer, got {value!r}", path)
    if value < minimum:
        raise ValidationError(f"must be >= {minimum}, got {value}", path)
    return int(value)


def _enum(cls, value, path):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ValidationError(f"expected one of {choices}, got {value!r}", path) from None


def parse_sweep(value, path="sweep") -> tuple:
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 3:
            raise ValidationError("expected START:STOP:STEP", path)
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ValidationError(f"bad number in {value!r}", path) from None
    elif isinstance(value, list) and len(value) == 3:
        start, stop, step = (_number(v, f"{path}[{i}]") for i, v in enumerate(value))
    else:
        raise ValidationError("expected START:STOP:STEP", path)
    if not step > 0 or stop < start:
        raise ValidationError("need step > 0 and stop >= start", path)
    return (start, stop, step)


def _parse_group(raw, idx):
    path = f"groups[{idx}]"
    if not isinstance(raw, dict):
        raise ValidationError("expected an object", path)
    unknown = set(raw) - set(GROUP_REQUIRED) - set(GROUP_OPTIONAL)
    if unknown:
        raise ValidationError(f"unknown keys {sorted(unknown)}", path)
    for key in GROUP_REQUIRED:
        if key not in raw:
            raise ValidationError("missing required field", f"{path}.{key}")
    eps = raw.get("epsilon")
    if eps is not None:
        eps = _number(eps, f"{path}.epsilon", nonneg=True)
        if eps > 1:
            raise ValidationError(f"must be <= 1, got {eps}", f"{path}.epsilon")
    g = GroupParams(
        alpha=_number(raw["alpha"], f"{path}.alpha", nonneg=True),
        gamma=_number(raw["gamma"], f"{path}.gamma", positive=True),
        hbar2=_number(raw["hbar2"], f"{path}.hbar2", positive=True),
        xi2=_number(raw["xi2"], f"{path}.xi2", nonneg=True),
        paths=_integer(raw["paths"], f"{path}.paths", 1),
        epsilon_override=eps,
    )
    try:
        derive_params(g)
    except InfeasibleTargetSIR as exc:
        raise ValidationError(str(exc), f"{path}.gamma") from exc
    z = _number(raw.get("pathloss", 1.0), f"{path}.pathloss", positive=True)
    return g, z


def parse_config_dict(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ValidationError("top level must be an object")
    unknown = set(data) - TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown keys {sorted(unknown)}")
    if "groups" not in data:
        raise ValidationError("missing required field", "groups")
    raw_groups = data["groups"]
    if not isinstance(raw_groups, list) or not raw_groups:
        raise ValidationError("expected a non-empty list", "groups")
    parsed = [_parse_group(raw, i) for i, raw in enumerate(raw_groups)]
    groups = [g for g, _ in parsed]
    system = SystemModel(groups, _number(data.get("sigma2", 1.0), "sigma2", positive=True))

    if data.get("order") is None:
        order = tuple(sorted(range(len(groups)), key=lambda c: effective_epsilon(groups[c])))
    else:
        raw_order = data["order"]
        if not isinstance(raw_order, list):
            raise ValidationError("expected a list of 1-based group labels", "order")
        labels = [_integer(v, f"order[{i}]", 1) for i, v in enumerate(raw_order)]
        if sorted(labels) != list(range(1, len(groups) + 1)):
            raise ValidationError(f"{labels} is not a permutation of 1..{len(groups)}", "order")
        order = tuple(c - 1 for c in labels)

    out = data.get("out")
    if out is not None and not isinstance(out, str):
        raise ValidationError("expected a string", "out")
    seed = data.get("seed", 0)
    return RunConfig(
        system=system,
        order=order,
        receiver=_enum(ReceiverKind, data.get("receiver", "lmmse"), "receiver"),
        arch=_enum(ArchitectureKind, data.get("arch", "gsic-lmmse"), "arch"),
        m=_integer(data.get("M", DEFAULT_M), "M", 1),
        schedule=_enum(UpdateSchedule, data.get("schedule", "sync"), "schedule"),
        seed=_integer(seed, "seed", 0),
        tol=_number(data.get("tol", DEFAULT_TOL), "tol", positive=True),
        max_iter=_integer(data.get("max_iter", DEFAULT_MAX_ITER), "max_iter", 1),
        sweep=parse_sweep(data.get("sweep", list(DEFAULT_SWEEP))),
        bisect_tol=_number(data.get("bisect_tol", DEFAULT_BISECT_TOL), "bisect_tol", positive=True),
        out=out,
        pathloss=tuple(z for _, z in parsed),
    )


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON configuration document.

    Raises
    ------
    ParseError
        The text is not valid JSON.
    ValidationError
        A field is missing, unknown, or violates its invariant; the
        message names the field path, e.g. ``groups[0].gamma``.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return parse_config_dict(data)
