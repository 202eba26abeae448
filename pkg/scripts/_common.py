"""Tiny helper shared by the experiment scripts: dataclass config <- argparse flags."""

import argparse
import dataclasses


def parse_config(cls, description: str):
    parser = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        if isinstance(default, (list, tuple)):
            parser.add_argument(f"--{f.name.replace('_', '-')}", type=type(default[0]), nargs="+", default=default)
        else:
            parser.add_argument(f"--{f.name.replace('_', '-')}", type=type(default), default=default)
    return cls(**vars(parser.parse_args()))
