# coding: utf-8
#

import datetime
import io
import json
import os
from collections import OrderedDict

from skinladder import __version__
from skinladder.common.errors import UsageError
from skinladder.common.utils import write_json

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1


def timestamp():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class RunManifest(object):
    '''Record of one run, written as manifest.json into its output directory

    Holds the resolved parameters, the master seed, the code version, start
    and finish times, every output file with its CSV columns and the scalar
    results of the run.
    '''

    def __init__(self, out_dir, subcommand, parameters, seed=None):
        self.out_dir = out_dir
        self.subcommand = subcommand
        self.parameters = parameters
        self.seed = seed
        self.code_version = __version__
        self.started = timestamp()
        self.finished = None
        self.outputs = []
        self.csv_schemas = OrderedDict()
        self.results = OrderedDict()

    def path(self, name):
        '''Absolute path of output `name` inside the run directory'''
        return os.path.join(self.out_dir, name)

    def add_output(self, name, columns=None):
        if name not in self.outputs:
            self.outputs.append(name)
        if columns is not None:
            self.csv_schemas[name] = list(columns)
        return self.path(name)

    def as_dict(self):
        return OrderedDict([("version", MANIFEST_VERSION),
                            ("subcommand", self.subcommand),
                            ("parameters", self.parameters),
                            ("seed", self.seed),
                            ("code_version", self.code_version),
                            ("started", self.started),
                            ("finished", self.finished),
                            ("outputs", self.outputs),
                            ("csv_schemas", self.csv_schemas),
                            ("results", self.results)])

    def write(self):
        self.finished = timestamp()
        return write_json(self.path(MANIFEST_NAME), self.as_dict())


class ManifestReader(object):
    '''Load the manifest of an output directory'''

    def __init__(self, out_dir):
        self.out_dir = os.path.abspath(out_dir)
        fn = os.path.join(self.out_dir, MANIFEST_NAME)
        if not os.path.exists(fn):
            raise UsageError("Invalid run directory: %s" % out_dir)
        with io.open(fn, encoding="utf-8") as f:
            conf = json.load(f, object_pairs_hook=OrderedDict)
        version = conf.get("version", 1)
        if version != MANIFEST_VERSION:
            raise UsageError("Unsupported manifest version '%s': Only %d" %
                             (version, MANIFEST_VERSION))
        self.subcommand = conf["subcommand"]
        self.parameters = conf["parameters"]
        self.seed = conf["seed"]
        self.code_version = conf["code_version"]
        self.outputs = conf["outputs"]
        self.csv_schemas = conf["csv_schemas"]
        self.results = conf["results"]

    def check(self):
        '''Check that every listed output exists'''
        for name in self.outputs:
            if not os.path.exists(os.path.join(self.out_dir, name)):
                raise UsageError("Output '%s' of run '%s' not found" %
                                 (name, self.out_dir))
