# core/utils.py
import json
import os
from typing import Any, Dict, Optional, Union

from core import calculus as lc
from core import values as sv
from core.effect_algebra import index_tokens
from core.errors import InputMismatch, ScopeError


def value_to_json(value) -> Any:
    if isinstance(value, sv.Unit):
        return "unit"
    if isinstance(value, sv.Bool):
        return value.value
    if isinstance(value, sv.IntMod):
        return value.k
    if isinstance(value, sv.Pair):
        return [value_to_json(value.fst), value_to_json(value.snd)]
    if isinstance(value, sv.Absent):
        return None
    if isinstance(value, sv.Fun):
        return "<fun>"
    raise TypeError(f"no JSON form for {value!r}")


def index_to_json(index) -> Optional[list]:
    return None if index is None else index_tokens(index)


def env_to_json(env: sv.Env) -> Dict[str, Any]:
    return {name: value_to_json(value) for name, value in sorted(env.items)}


def decode_value(data, t: lc.ObjType):
    """JSON value of a first-order type back into a semantic value."""
    if isinstance(t, lc.TUnit) and data in ("unit", None):
        return sv.UNIT
    if isinstance(t, lc.TBool) and isinstance(data, bool):
        return sv.Bool(data)
    if isinstance(t, lc.TIntMod) and isinstance(data, int) and not isinstance(data, bool):
        if 0 <= data < t.m:
            return sv.IntMod(data, t.m)
    if isinstance(t, lc.TProd) and isinstance(data, list) and len(data) == 2:
        return sv.Pair(decode_value(data[0], t.left), decode_value(data[1], t.right))
    raise InputMismatch(f"{json.dumps(data)} is not a value of {lc.format_type(t)}")


def load_inputs(source: Union[None, str, Dict[str, Any]], sig: lc.Signature) -> Dict[str, sv.Env]:
    """Read {"env": {...}, "store": {...}} from a file path or an already-parsed dict."""
    if source is None:
        return {"env": sv.EMPTY_ENV, "store": sv.EMPTY_ENV}
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except ValueError as e:
            raise InputMismatch(f"inputs file {source} is not valid JSON: {e}")
    else:
        data = source
    if not isinstance(data, dict) or set(data) - {"env", "store"}:
        raise InputMismatch('inputs must be an object with optional "env" and "store" keys')

    def decode(section, lookup):
        values = {}
        for name, raw in (data.get(section) or {}).items():
            values[name] = decode_value(raw, lookup(name))
        return sv.Env.of(values)

    try:
        return {"env": decode("env", sig.param_type), "store": decode("store", sig.region_type)}
    except ScopeError as e:
        raise InputMismatch(e.message)


def report_to_json(report) -> Dict[str, Any]:
    return {
        "instance": report.instance,
        "value": value_to_json(report.value),
        "writes": env_to_json(report.writes),
        "store": env_to_json(report.store),
        "trace": [[tag, value_to_json(value)] for tag, value in report.trace],
        "effect": index_to_json(report.effect),
        "coeffect": None if report.coeffect is None else index_tokens(report.coeffect)[0],
        "lets": [dict(entry) for entry in report.lets],
    }


def dump_json(data, indent: int = 2) -> str:
    return json.dumps(data, indent=indent, sort_keys=True, ensure_ascii=False) + "\n"
