# coding: utf-8
'''Run configuration: config files, defaults and parameter resolution

Every run parameter is resolved as built-in default < config file <
command-line flag. Config files use the same keys as the long flags, with
either dashes or underscores ("t-total" or "t_total").
'''

from __future__ import unicode_literals

import io
import json
import os
import re
from collections import OrderedDict

import yaml

from skinladder.common.errors import UsageError

OUTPUT_ROOT_ENV = "SKINLADDER_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = "skinladder-out"

DEFAULTS = OrderedDict([
    ("N", [10]),
    ("t", 1.0),
    ("delta", [0.01]),
    ("gamma", 0.5),
    ("dt", 0.05),
    ("t_total", "auto"),
    ("n_traj", 300),
    ("seed", 0),
    ("workers", 1),
    ("initial", "neel"),
    ("sample_interval", 1.0),
    ("out_dir", None),
    ("launcher", "auto"),
    ("order", 1),
    ("postselected", False),
    ("dump_trajectories", False),
])

# parameters that take comma separated lists
LIST_PARAMETERS = OrderedDict([("N", int), ("delta", float)])


def load_conf(fn):
    '''Load config file (in jsonc or yaml)

    This function parses a jsonc/yaml file. Unlike the builtin `json` module, it
    supports "//" like comments and preserves the key orders.

    Args:
        fn (str): Name of the file to parse.

    Returns:
        OrderedDict: A dict representing the file content.

    '''
    if not os.path.exists(fn):
        raise UsageError("Config file '%s' not found" % fn)
    with io.open(fn, encoding="utf-8") as f:
        content = f.read()
    try:
        if fn.endswith(".yaml") or fn.endswith(".yml"):
            data = yaml.safe_load(content)
            data = OrderedDict(data) if data is not None else OrderedDict()
        else:
            # json with "//" like line comments
            content = re.sub(r"//.*$", "", content, flags=re.MULTILINE)
            data = json.loads(content, object_pairs_hook=OrderedDict)
    except (ValueError, yaml.YAMLError) as e:
        raise UsageError("Invalid config file '%s': %s" % (fn, e))
    if not isinstance(data, dict):
        raise UsageError("Config file '%s' must hold a mapping" % fn)
    return data


def normalize_key(key):
    return key.replace("-", "_")


def parse_list(value, item_type):
    '''"10,20,30" (or a list, or a scalar) to a list of `item_type`'''
    if isinstance(value, (list, tuple)):
        items = list(value)
    elif isinstance(value, str):
        items = [x for x in value.split(",") if x.strip()]
    else:
        items = [value]
    try:
        return [item_type(x) for x in items]
    except (TypeError, ValueError):
        raise UsageError("Invalid list value '%s'" % value)


def resolve_parameters(config=None, flags=None, defaults=DEFAULTS):
    '''Merge defaults, config file values and flags

    Args:
        config (dict): values from `load_conf`; unknown keys are an error.
        flags (dict): parsed command-line values; None means "not given".

    Returns:
        OrderedDict: every key of `defaults`, list parameters as lists.
    '''
    params = OrderedDict(defaults)
    for source, values in (("config file", config), ("flags", flags)):
        for key, value in (values or {}).items():
            key = normalize_key(key)
            if key not in params:
                if source == "flags":
                    continue
                raise UsageError("Unknown config key '%s'" % key)
            if value is not None:
                params[key] = value
    for key, item_type in LIST_PARAMETERS.items():
        params[key] = parse_list(params[key], item_type)
        if not params[key]:
            raise UsageError("Empty list for parameter '%s'" % key)
    return params


def resolve_t_total(value, N):
    '''"auto" (or None) means 2N'''
    if value is None or value == "auto":
        return 2.0 * N
    try:
        return float(value)
    except ValueError:
        raise UsageError("Invalid total time '%s'" % value)


def output_dir(subcommand, out_dir=None):
    '''--out-dir, else $SKINLADDER_OUTPUT_ROOT/<subcommand>, else ./skinladder-out/<subcommand>'''
    if out_dir:
        return out_dir
    root = os.environ.get(OUTPUT_ROOT_ENV) or DEFAULT_OUTPUT_ROOT
    return os.path.join(root, subcommand)
