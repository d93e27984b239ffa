"""Analysis configuration: one JSON document drives every CLI command."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping

from .geometry import SystemInstance, derive_instance
from .incentives import EconParams

__all__ = ["AnalysisConfig", "ConfigError", "DEFAULT_CONFIG"]


class ConfigError(ValueError):
    """A configuration document failed validation."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ConfigError(msg)


@dataclass(frozen=True)
class RaceConfig:
    slot_duration: float = 1.0
    seal_deadline: float = 1.0
    reaction_time: float = 0.1
    rate: float = 4.0

    def to_dict(self) -> dict:
        return {
            "slot_duration": self.slot_duration,
            "seal_deadline": self.seal_deadline,
            "reaction_time": self.reaction_time,
            "rate": self.rate,
        }


@dataclass(frozen=True)
class AnalysisConfig:
    """Validated inputs for the table, sweep, verify, and advise commands."""

    instance: SystemInstance
    beta: float
    econ: EconParams
    usd_per_fee_unit: float
    table_kappas: tuple[int, ...]
    mev_tiers_usd: tuple[float, ...]
    sweep_min: int
    sweep_max: int
    trials: int
    seed: int
    race: RaceConfig
    instance_given_as_kappa: bool

    @classmethod
    def default(cls) -> "AnalysisConfig":
        return cls.from_dict({})

    @classmethod
    def from_dict(cls, obj: Mapping[str, Any]) -> "AnalysisConfig":
        try:
            return cls._parse(obj)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def _parse(cls, obj: Mapping[str, Any]) -> "AnalysisConfig":
        inst_obj = dict(obj.get("instance", {}))
        n = int(inst_obj.get("n", 100))
        m = int(inst_obj.get("m", 20))
        s = int(inst_obj.get("s", 1))
        has_K = "K" in inst_obj
        has_kappa = "kappa" in inst_obj
        _require(
            not (has_K and has_kappa),
            "instance: give exactly one of 'K' or 'kappa', not both",
        )
        if has_kappa:
            kappa = int(inst_obj["kappa"])
            _require(kappa > 0, "instance.kappa must be positive")
            K = kappa * s
        elif has_K:
            K = int(inst_obj["K"])
        else:
            K = 30 * s  # default operating point
        try:
            instance = derive_instance(n, m, s, K)
        except ValueError as exc:
            raise ConfigError(f"instance: {exc}") from exc

        beta = float(obj.get("beta", 0.2))
        _require(0.0 <= beta < 1.0, "beta must lie in [0, 1)")

        econ_obj = dict(obj.get("econ", {}))
        mode = econ_obj.get("mode", "normalized")
        gamma = float(econ_obj.get("gamma", 0.99))
        bounty = float(econ_obj.get("bounty", 0.0))
        if mode == "normalized":
            for forbidden in (
                "header_bytes",
                "metadata_bytes",
                "symbol_bytes",
                "per_byte_price",
                "proposer_share",
            ):
                _require(
                    forbidden not in econ_obj,
                    f"econ: normalized mode excludes byte-model field {forbidden!r}",
                )
            econ = EconParams.normalized(
                fee=float(econ_obj.get("fee", 1.0)),
                alpha_v=float(econ_obj.get("alpha_v", 100.0)),
                gamma=gamma,
                bounty=bounty,
                alpha=float(econ_obj.get("alpha", 1.0)),
                bundle_price=(
                    float(econ_obj["bundle_price"])
                    if "bundle_price" in econ_obj
                    else None
                ),
            )
        elif mode == "bytes":
            econ = EconParams.byte_model(
                header_bytes=int(econ_obj["header_bytes"]),
                metadata_bytes=int(econ_obj["metadata_bytes"]),
                symbol_bytes=int(econ_obj["symbol_bytes"]),
                per_byte_price=float(econ_obj["per_byte_price"]),
                proposer_share=float(econ_obj["proposer_share"]),
                alpha=float(econ_obj["alpha"]),
                value=float(econ_obj["value"]),
                gamma=gamma,
                bounty=bounty,
            )
        else:
            raise ConfigError(f"econ.mode must be 'normalized' or 'bytes', got {mode!r}")

        sweep_obj = dict(obj.get("sweep", {}))
        sweep_min = int(sweep_obj.get("kappa_min", 1))
        sweep_max = int(sweep_obj.get("kappa_max", 120))
        _require(1 <= sweep_min <= sweep_max, "sweep: need 1 <= kappa_min <= kappa_max")

        mc_obj = dict(obj.get("mc", {}))
        trials = int(mc_obj.get("trials", 10_000))
        seed = int(mc_obj.get("seed", 20260809))
        _require(trials >= 1, "mc.trials must be positive")

        kappas = tuple(int(k) for k in obj.get("table_kappas", (10, 20, 30, 50, 100)))
        _require(len(kappas) > 0, "table_kappas must be nonempty")
        _require(all(k > 0 for k in kappas), "table_kappas must be positive")

        tiers = tuple(float(t) for t in obj.get("mev_tiers_usd", (5.0, 50.0, 5000.0)))
        _require(all(t > 0 for t in tiers), "mev_tiers_usd must be positive")

        race_obj = dict(obj.get("race", {}))
        race = RaceConfig(
            slot_duration=float(race_obj.get("slot_duration", 1.0)),
            seal_deadline=float(race_obj.get("seal_deadline", 1.0)),
            reaction_time=float(race_obj.get("reaction_time", 0.1)),
            rate=float(race_obj.get("rate", 4.0)),
        )

        usd = float(obj.get("usd_per_fee_unit", 0.10))
        _require(usd > 0, "usd_per_fee_unit must be positive")

        return cls(
            instance=instance,
            beta=beta,
            econ=econ,
            usd_per_fee_unit=usd,
            table_kappas=kappas,
            mev_tiers_usd=tiers,
            sweep_min=sweep_min,
            sweep_max=sweep_max,
            trials=trials,
            seed=seed,
            race=race,
            instance_given_as_kappa=has_kappa or not has_K,
        )

    def to_dict(self) -> dict:
        inst: dict[str, Any] = {"n": self.instance.n, "m": self.instance.m, "s": self.instance.s}
        if self.instance_given_as_kappa:
            inst["kappa"] = self.instance.kappa
        else:
            inst["K"] = self.instance.K
        return {
            "instance": inst,
            "beta": self.beta,
            "econ": self.econ.to_config(),
            "usd_per_fee_unit": self.usd_per_fee_unit,
            "table_kappas": list(self.table_kappas),
            "mev_tiers_usd": list(self.mev_tiers_usd),
            "sweep": {"kappa_min": self.sweep_min, "kappa_max": self.sweep_max},
            "mc": {"trials": self.trials, "seed": self.seed},
            "race": self.race.to_dict(),
        }

    @classmethod
    def load(cls, path: str) -> "AnalysisConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"{path}: top-level value must be an object")
        return cls.from_dict(obj)

    def with_seed(self, seed: int) -> "AnalysisConfig":
        d = self.to_dict()
        d["mc"]["seed"] = int(seed)
        return AnalysisConfig.from_dict(d)


DEFAULT_CONFIG = AnalysisConfig.default
