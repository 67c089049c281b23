"""
Argument reading for the leafgrowth command line
Parses flags, merges config-file and environment settings and validates them
"""

import argparse
import sys
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

from config import (Config, OutputFormat, RunConfig, SpineMeasure, VerifySuite,
                    load_settings, settings_key)
from errors import UsageError


def _parse_bool(text: str) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int_list(text: str) -> List[int]:
    return [int(part) for part in str(text).split(",") if part.strip()]


def _float_list(text: str) -> List[float]:
    return [float(part) for part in str(text).split(",") if part.strip()]


@dataclass
class Param:
    """One command parameter: flag, converter, default and help text"""
    name: str
    convert: Callable[[str], Any]
    default: Any
    help: str
    choices: Optional[Sequence[str]] = None

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")

    @property
    def is_switch(self) -> bool:
        return self.convert is _parse_bool


COMMANDS: Dict[str, List[Param]] = {
    "sample": [
        Param("n", int, 10, "tree size (internal nodes)"),
        Param("measure", _parse_bool, False, "annotate leaves with their leaf-growth mass"),
        Param("density", _parse_bool, False, "emit the per-leaf density series instead of the tree"),
    ],
    "measure": [
        Param("input", str, "-", "file holding a parenthesis word, - for stdin"),
        Param("exact", _parse_bool, False, "also emit exact rational masses"),
    ],
    "grow": [
        Param("n", int, 1000, "target size of every chain"),
        Param("replicas", int, 10, "number of independent chains"),
        Param("checkpoints", _int_list, None, "comma list of sizes to record; default powers of ten and n"),
        Param("max_mass", _parse_bool, False, "also record the largest leaf mass at checkpoints"),
        Param("records", _parse_bool, False, "emit every record instead of the per-checkpoint summary"),
    ],
    "spectrum": [
        Param("alphas", _float_list, None, "comma list of alpha values; overrides the range"),
        Param("alpha_min", float, -1.0, "first alpha of the grid"),
        Param("alpha_max", float, 3.0, "last alpha of the grid"),
        Param("alpha_step", float, 0.25, "grid spacing"),
    ],
    "moments": [
        Param("alpha", float, 1.0, "moment exponent"),
        Param("n_max", int, 1024, "largest n of the recursion"),
        Param("window", _int_list, None, "slope window lo,hi; default [n_max/16, n_max]"),
    ],
    "spine": [
        Param("mode", str, "continuum", "continuum subordinators or the discrete size chain",
              choices=("continuum", "discrete")),
        Param("n", int, 10_000, "starting size of the discrete chain"),
        Param("replicas", int, 1000, "number of independent paths"),
        Param("eps_cut", float, None, "small-jump truncation of the continuum simulation"),
        Param("law", str, "nu", "leaf selection rule of the continuum spine",
              choices=tuple(m.value for m in SpineMeasure)),
        Param("eps_grid", _float_list, (), "comma list of eps for near-extinction exponents"),
        Param("bins", int, 0, "emit a height histogram with this many bins"),
    ],
    "verify": [],
}

DEFAULT_FORMAT = {
    "sample": OutputFormat.TEXT,
    "measure": OutputFormat.CSV,
    "grow": OutputFormat.CSV,
    "spectrum": OutputFormat.CSV,
    "moments": OutputFormat.CSV,
    "spine": OutputFormat.CSV,
    "verify": OutputFormat.TEXT,
}

ALLOWED_FORMATS = {
    "sample": {OutputFormat.TEXT, OutputFormat.DOT, OutputFormat.JSON, OutputFormat.CSV},
    "measure": {OutputFormat.CSV, OutputFormat.DOT, OutputFormat.JSON},
    "grow": {OutputFormat.CSV, OutputFormat.JSON, OutputFormat.JSONL, OutputFormat.TEXT},
    "spectrum": {OutputFormat.CSV, OutputFormat.JSON, OutputFormat.TEXT},
    "moments": {OutputFormat.CSV, OutputFormat.JSON, OutputFormat.TEXT},
    "spine": {OutputFormat.CSV, OutputFormat.JSON, OutputFormat.TEXT},
    "verify": {OutputFormat.TEXT, OutputFormat.JSON},
}


class Reader:
    """Class that reads the person's command line and input files"""

    def __init__(self):
        self.parser = self._build_parser()
        self.input_history = []

    def _build_parser(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--seed", type=int, default=None, help="master seed; drawn and recorded if absent")
        common.add_argument("--config", default=None, help="flat KEY=value settings file")
        common.add_argument("--threads", type=int, default=None, help="worker processes; default all cores")
        common.add_argument("--output", default=None, help="output path; default stdout")
        common.add_argument("--format", dest="output_format", default=None,
                            choices=[f.value for f in OutputFormat], help="output format")
        common.add_argument("--verbose", action="store_true", help="debug logging")
        common.add_argument("--quiet", action="store_true", help="silence progress messages")

        parser = argparse.ArgumentParser(
            prog="leafgrowth",
            description="Leaf-growth measure on random plane binary trees",
        )
        sub = parser.add_subparsers(dest="command", required=True)
        for command, params in COMMANDS.items():
            cmd = sub.add_parser(command, parents=[common])
            for param in params:
                if param.is_switch:
                    cmd.add_argument(param.flag, dest=param.name, action="store_true",
                                     default=None, help=param.help)
                else:
                    cmd.add_argument(param.flag, dest=param.name, default=None,
                                     choices=param.choices, help=param.help)
            if command == "verify":
                cmd.add_argument("suite", choices=[s.value for s in VerifySuite] + ["all"],
                                 help="invariant suite to run")
        return parser

    def parse(self, argv: Optional[Sequence[str]] = None) -> RunConfig:
        """
        Parse argv and merge with config file and environment

        Args:
            argv (list): Arguments without the program name; sys.argv when None

        Returns:
            RunConfig: validated settings of this invocation
        """
        args = self.parser.parse_args(argv)
        settings = load_settings(args.config)
        self._apply_overrides(settings)

        params: Dict[str, Any] = {}
        for param in COMMANDS[args.command]:
            params[param.name] = self._resolve(param, getattr(args, param.name), settings)
        if args.command == "verify":
            params["suite"] = args.suite
        params["verbose"] = args.verbose
        params["quiet"] = args.quiet

        seed = args.seed
        if seed is None and "SEED" in settings:
            seed = self._convert(int, "SEED", settings["SEED"])
        threads = args.threads
        if threads is None:
            threads = self._convert(int, "THREADS", settings["THREADS"]) if "THREADS" in settings else 0
        output = args.output if args.output is not None else settings.get("OUTPUT")

        fmt_text = args.output_format or settings.get("FORMAT")
        try:
            output_format = OutputFormat(fmt_text) if fmt_text else DEFAULT_FORMAT[args.command]
        except ValueError:
            raise UsageError(f"unknown format: {fmt_text}")

        config = RunConfig(command=args.command, seed=seed, output=output,
                           output_format=output_format, threads=threads, params=params)
        self.validate(config)
        return config

    def _resolve(self, param: Param, flag_value: Any, settings: Dict[str, str]) -> Any:
        if flag_value is not None:
            if param.is_switch:
                return bool(flag_value)
            return self._convert(param.convert, param.flag, flag_value)
        key = settings_key(param.flag)
        if key in settings:
            return self._convert(param.convert, key, settings[key])
        return param.default

    @staticmethod
    def _convert(convert: Callable, name: str, raw: Any) -> Any:
        try:
            return convert(raw)
        except (TypeError, ValueError):
            raise UsageError(f"invalid value for {name}: {raw!r}")

    @staticmethod
    def _apply_overrides(settings: Dict[str, str]) -> None:
        """Settings named after Config defaults (e.g. KERNEL_CACHE_CAP) replace them"""
        for key, raw in settings.items():
            if key.isupper() and hasattr(Config, key) and not callable(getattr(Config, key)):
                try:
                    Config.override(key, raw)
                except ValueError:
                    raise UsageError(f"invalid value for {key}: {raw!r}")

    def validate(self, config: RunConfig) -> None:
        """
        Check ranges that argparse cannot express

        Raises:
            UsageError: naming the offending parameter
        """
        command = config.command
        if config.output_format not in ALLOWED_FORMATS[command]:
            allowed = ", ".join(sorted(f.value for f in ALLOWED_FORMATS[command]))
            raise UsageError(f"{command} supports formats: {allowed}")
        if config.threads < 1:
            raise UsageError("--threads must be positive")

        get = config.get
        if "n" in config.params and get("n") < (1 if command == "spine" else 0):
            raise UsageError("--n is out of range")
        if "replicas" in config.params and get("replicas") < 1:
            raise UsageError("--replicas must be positive")
        if command == "sample":
            Config.check_cap("n", get("n"), "GROWTH_MAX")
            if get("measure") or get("density"):
                Config.check_cap("n", get("n"), "FULL_MEASURE_CAP")
            if config.output_format is OutputFormat.CSV and not get("density"):
                raise UsageError("csv output of sample needs --density")
        elif command == "grow":
            Config.check_cap("n", get("n"), "GROWTH_MAX")
            checkpoints = get("checkpoints")
            if checkpoints and (min(checkpoints) < 0 or max(checkpoints) > get("n")):
                raise UsageError("--checkpoints must lie in [0, n]")
        elif command == "spectrum":
            if get("alphas") is None and get("alpha_step") <= 0:
                raise UsageError("--alpha-step must be positive")
        elif command == "moments":
            Config.check_cap("n_max", get("n_max"), "MOMENT_CAP")
            window = get("window")
            if window is not None:
                if len(window) != 2:
                    raise UsageError("--window takes lo,hi")
                if window[0] < 2 or window[1] > get("n_max") or window[1] <= window[0]:
                    raise UsageError("--window must satisfy 2 <= lo < hi <= n_max")
        elif command == "spine":
            eps_cut = get("eps_cut")
            if eps_cut is not None and eps_cut <= 0:
                raise UsageError("--eps-cut must be positive")
            if any(not 0.0 < eps < 1.0 for eps in get("eps_grid")):
                raise UsageError("--eps-grid values must lie in (0, 1)")

    def read_tree_word(self, path: str = "-") -> str:
        """
        Read a parenthesis word from a file or stdin

        Args:
            path (str): File path, or - for stdin

        Returns:
            str: the word with surrounding whitespace removed
        """
        try:
            if path == "-":
                text = sys.stdin.read()
            else:
                with open(path, encoding="utf-8") as handle:
                    text = handle.read()
        except OSError as e:
            raise UsageError(f"cannot read tree from {path}: {e}")
        word = "".join(text.split())
        if word:
            self.input_history.append(word)
        return word
