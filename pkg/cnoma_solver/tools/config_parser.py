"""
Parsing of flat ``key = value`` scenario and pair configs.

Every physical quantity carries its unit in the key (``p_bs_dbm``, ``lambda_s_db``,
``r_th_bpshz``); a bare ``p_bs`` is rejected. One swept key may hold a comma list.
A config that names the ``gamma_*_db`` gains of a single pair describes a pair
problem instead of a scenario.
"""

import logging
import re
from enum import Enum
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, ConfigDict, ValidationError

from cnoma_solver.channel import db_to_linear, dbm_to_linear_normalized
from cnoma_solver.exceptions import ConfigError
from cnoma_solver.models.channels import ChannelStats, PairChannels
from cnoma_solver.models.config import (
    Mode,
    Pairing,
    PairProblem,
    RelayPower,
    Scenario,
    SweepAxis,
    SystemConfig,
)


logger = logging.getLogger(__name__)

_ENTRY = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")

DEFAULTS: Dict[str, str] = {
    "k": "1",
    "trials": "10000",
    "lambda_s_db": "10",
    "lambda_w_db": "0",
    "lambda_d_db": "6",
    "lambda_si_db": "0",
    "p_bs_dbm": "30",
    "p_d_max_dbm": "30",
    "noise_floor_dbm": "0",
    "r_th_bpshz": "1",
    "mode": "fd",
    "pairing": "hungarian",
    "relay_power": "adaptive",
}

GAIN_KEYS = ("gamma_m_db", "gamma_n_db", "gamma_d_db", "gamma_si_db")
KNOWN_KEYS = frozenset(DEFAULTS) | frozenset(GAIN_KEYS) | {"user_gains_db"}
_UNIT_SUFFIXES = ("_dbm", "_db", "_bpshz")

E = TypeVar("E", bound=Enum)


class _Entry(BaseModel):
    value: str
    line: int

    model_config = ConfigDict(frozen=True)


def _bare_stems() -> Dict[str, str]:
    """Map of keys written without their unit suffix to the full key."""
    stems = {}
    for key in KNOWN_KEYS:
        for suffix in _UNIT_SUFFIXES:
            if key.endswith(suffix):
                stems[key[: -len(suffix)]] = key
    return stems


_STEMS = _bare_stems()


def _check_key(key: str, lines: Sequence[int]) -> None:
    if key in _STEMS:
        raise ConfigError(f"missing unit suffix on {key!r}, expected {_STEMS[key]!r}", lines)
    if key not in KNOWN_KEYS:
        raise ConfigError(f"unknown key {key!r}", lines)


def parse_entries(text: str) -> Dict[str, _Entry]:
    """
    Split config text into raw entries.

    Args:
        text: Config file content

    Returns:
        Raw string value and line number per key

    Raises:
        ConfigError: On malformed lines, duplicate, unknown or unit-less keys
    """
    entries: Dict[str, _Entry] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _ENTRY.match(line)
        if not match:
            raise ConfigError(f"expected 'key = value', got {line!r}", [number])
        key, value = match.group(1), match.group(2).strip()
        if not value:
            raise ConfigError(f"no value given for {key!r}", [number])
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", [entries[key].line, number])
        _check_key(key, [number])
        entries[key] = _Entry(value=value, line=number)
    return entries


def apply_overrides(entries: Dict[str, _Entry], overrides: Sequence[str]) -> Dict[str, _Entry]:
    """Replace or add entries from ``key=value`` strings given on the command line."""
    merged = dict(entries)
    for item in overrides:
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise ConfigError(f"override must have the form key=value, got {item!r}")
        _check_key(key, [])
        merged[key] = _Entry(value=value, line=0)
        logger.debug(f"Override {key} = {value}")
    return merged


def _where(entry: _Entry) -> List[int]:
    return [entry.line] if entry.line else []


def _numbers(key: str, entry: _Entry) -> List[float]:
    values = []
    for part in entry.value.split(","):
        try:
            values.append(float(part))
        except ValueError:
            raise ConfigError(f"{key}: not a number: {part.strip()!r}", _where(entry)) from None
    return values


def _integer(key: str, entry: _Entry) -> int:
    try:
        return int(entry.value)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {entry.value!r}", _where(entry)) from None


def _choice(key: str, entry: _Entry, enum: Type[E]) -> E:
    try:
        return enum(entry.value.lower())
    except ValueError:
        choices = ", ".join(member.value for member in enum)
        raise ConfigError(
            f"{key}: unknown value {entry.value!r}, expected one of {choices}", _where(entry)
        ) from None


def _to_linear(axis: SweepAxis, value: float, noise_floor_dbm: float) -> float:
    if axis in (SweepAxis.P_BS, SweepAxis.P_D_MAX):
        return dbm_to_linear_normalized(value, noise_floor_dbm)
    if axis is SweepAxis.R_TH:
        return value
    return db_to_linear(value)


def _axis_values(
    entries: Dict[str, _Entry],
) -> Tuple[Dict[SweepAxis, List[float]], SweepAxis]:
    lists = {axis: _numbers(axis.value, entries[axis.value]) for axis in SweepAxis}
    swept = [axis for axis, values in lists.items() if len(values) > 1]
    if len(swept) > 1:
        names = ", ".join(axis.value for axis in swept)
        lines = [n for axis in swept for n in _where(entries[axis.value])]
        raise ConfigError(f"only one key may list several values, got {names}", lines)
    return lists, swept[0] if swept else SweepAxis.P_BS


def parse_config(text: str, overrides: Sequence[str] = ()) -> Union[Scenario, PairProblem]:
    """
    Parse a config into a scenario, or a pair problem if it names pair gains.

    Args:
        text: Config file content
        overrides: ``key=value`` strings applied on top of the file

    Returns:
        Scenario with linear, noise-normalized budgets, or a PairProblem

    Raises:
        ConfigError: On any syntax, key, unit or value error
    """
    given = apply_overrides(parse_entries(text), overrides)
    entries = {key: _Entry(value=value, line=0) for key, value in DEFAULTS.items()}
    entries.update(given)

    lists, axis = _axis_values(entries)
    noise = _numbers("noise_floor_dbm", entries["noise_floor_dbm"])
    if len(noise) != 1:
        raise ConfigError(
            "noise_floor_dbm takes a single value", _where(entries["noise_floor_dbm"])
        )
    linear = {a: [_to_linear(a, v, noise[0]) for v in values] for a, values in lists.items()}

    try:
        stats = ChannelStats(
            lambda_s=linear[SweepAxis.LAMBDA_S][0],
            lambda_w=linear[SweepAxis.LAMBDA_W][0],
            lambda_d=linear[SweepAxis.LAMBDA_D][0],
            lambda_si=linear[SweepAxis.LAMBDA_SI][0],
        )
        budgets = {
            "p_bs": linear[SweepAxis.P_BS][0],
            "p_d_max": linear[SweepAxis.P_D_MAX][0],
            "r_th": linear[SweepAxis.R_TH][0],
        }
        mode = _choice("mode", entries["mode"], Mode)
        relay_power = _choice("relay_power", entries["relay_power"], RelayPower)

        if any(key in given for key in GAIN_KEYS):
            return _pair_problem(given, lists, budgets, mode, relay_power)

        user_gains = None
        if "user_gains_db" in given:
            gains_entry = given["user_gains_db"]
            user_gains = [db_to_linear(x) for x in _numbers("user_gains_db", gains_entry)]
            if len(user_gains) < 2:
                raise ConfigError("user_gains_db needs at least two users", _where(gains_entry))
            if "k" not in given:
                given["k"] = _Entry(value=str((len(user_gains) + 1) // 2), line=0)

        scenario = Scenario(
            stats=stats,
            k=_integer("k", given.get("k", entries["k"])),
            trials=_integer("trials", entries["trials"]),
            mode=mode,
            pairing=_choice("pairing", entries["pairing"], Pairing),
            relay_power=relay_power,
            noise_floor_dbm=noise[0],
            sweep_axis=axis,
            sweep_values=linear[axis],
            sweep_labels=lists[axis],
            user_gains=user_gains,
            **budgets,
        )
    except ValidationError as e:
        raise ConfigError(_summarize(e)) from e

    if scenario.user_gains is not None and scenario.k != (len(scenario.user_gains) + 1) // 2:
        raise ConfigError(
            f"k = {scenario.k} does not match {len(scenario.user_gains)} user gains",
            _where(given["k"]),
        )
    logger.debug(f"Parsed scenario sweeping {axis.value} over {lists[axis]}")
    return scenario


def _pair_problem(
    given: Dict[str, _Entry],
    lists: Dict[SweepAxis, List[float]],
    budgets: Dict[str, float],
    mode: Mode,
    relay_power: RelayPower,
) -> PairProblem:
    missing = [key for key in GAIN_KEYS if key not in given]
    if missing:
        raise ConfigError(f"pair config is missing {', '.join(missing)}")
    swept = [axis.value for axis, values in lists.items() if len(values) > 1]
    if swept:
        raise ConfigError(f"a pair config takes single values, {swept[0]} lists several")
    gains = {}
    for key in GAIN_KEYS:
        values = _numbers(key, given[key])
        if len(values) != 1:
            raise ConfigError(f"{key} takes a single value", _where(given[key]))
        gains[key] = values[0]
    channels = PairChannels.from_db(**gains)
    system = SystemConfig(mode=mode, relay_power=relay_power, **budgets)
    return PairProblem(channels=channels, system=system)


def _summarize(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(loc) for loc in item["loc"])
        parts.append(f"{where}: {item['msg']}" if where else item["msg"])
    return "; ".join(parts)


def load_config(
    path: Union[str, Path], overrides: Sequence[str] = ()
) -> Union[Scenario, PairProblem]:
    """
    Read and parse a config file.

    Args:
        path: Config file path
        overrides: ``key=value`` strings applied on top of the file

    Returns:
        The parsed scenario or pair problem
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        logger.error(f"Error reading config file: {str(e)}")
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from e
    return parse_config(text, overrides)
