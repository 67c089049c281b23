#!/usr/bin/env python3
"""
leafgrowth - leaf-growth measure on random plane binary trees
Main orchestration module that brings together all components
"""

import logging
import math
import sys
from typing import Optional, Sequence

import numpy as np

from config import Config, OutputFormat, RunConfig, SpineMeasure, VerifySuite
from errors import CapExceededError, DomainError, LeafGrowthError, TreeParseError, UsageError
from file_processor import FileProcessor
from growth_chain import grow_replicas, records_frame, summarize
from leaf_measure import compute_measure, to_csv_frame
from read import Reader
from spectrum import beta_grid, moment_recursion, slope_fit, spectrum_frame, max_mass_exponent
from spine_sim import histogram, simulate_discrete_spines, simulate_spines
from streams import StreamPurpose, make_rng
from tree_core import decode, remy_sample, to_dot
from verification import run_suite
from voice import Voice

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


class LeafGrowthCLI:
    """Main command-line class that dispatches one subcommand"""

    def __init__(self, config: RunConfig, reader: Optional[Reader] = None,
                 voice: Optional[Voice] = None, writer: Optional[FileProcessor] = None):
        self.config = config
        self.reader = reader or Reader()
        self.voice = voice or Voice(quiet=config.get("quiet", False))
        self.writer = writer or FileProcessor(config.output)

    @property
    def meta(self):
        return self.config.to_metadata()

    def run(self) -> int:
        """Run the configured command and return its exit code"""
        if self.config.seed_generated:
            self.voice.speak_info(f"seed {self.config.seed} (generated)")
        handler = getattr(self, f"handle_{self.config.command}")
        return handler()

    def handle_sample(self) -> int:
        """Uniform tree by Remy's algorithm, optionally with leaf masses"""
        n = self.config.get("n")
        rng = make_rng(self.config.seed, 0, StreamPurpose.TREE)
        tree = remy_sample(n, rng)
        fmt = self.config.output_format
        with_measure = self.config.get("measure") or self.config.get("density")
        measure = compute_measure(tree, exact=False) if with_measure else None

        if self.config.get("density") or fmt is OutputFormat.CSV:
            self.writer.write_frame(to_csv_frame(measure, tree), self.meta)
        elif fmt is OutputFormat.DOT:
            self.writer.write_dot(to_dot(tree, measure.masses() if measure else None), self.meta)
        elif fmt is OutputFormat.JSON:
            payload = {"n": n, "tree": tree.encode(), "height": tree.height,
                       "path_length": tree.path_length}
            if measure is not None:
                payload["masses"] = measure.mass_array()
            self.writer.write_json(payload, self.meta)
        else:
            self.writer.write_text(tree.encode())
        return EXIT_OK

    def handle_measure(self) -> int:
        """Leaf-growth measure of a tree read from a file or stdin"""
        word = self.reader.read_tree_word(self.config.get("input"))
        tree = decode(word)
        exact = self.config.get("exact")
        if exact:
            Config.check_cap("n", tree.n_internal, "EXACT_MEASURE_CAP")
        else:
            Config.check_cap("n", tree.n_internal, "FULL_MEASURE_CAP")
        measure = compute_measure(tree, exact=exact)
        fmt = self.config.output_format

        if fmt is OutputFormat.DOT:
            self.writer.write_dot(to_dot(tree, measure.masses()), self.meta)
            return EXIT_OK
        frame = to_csv_frame(measure, tree)
        if exact:
            frame["exact_mass"] = [str(measure.exact_mass[leaf]) for leaf in measure.leaves]
        if fmt is OutputFormat.JSON:
            self.writer.write_json({"n": tree.n_internal, "tree": tree.encode(),
                                    "leaves": frame.to_dict(orient="records")}, self.meta)
        else:
            self.writer.write_frame(frame, self.meta)
        self.voice.speak_info(f"total mass {measure.total():.15g} over {len(measure.leaves)} leaves")
        return EXIT_OK

    def _checkpoints(self, n: int):
        marks = self.config.get("checkpoints")
        if marks:
            return sorted(set(marks))
        marks = {n}
        power = 10
        while power < n:
            marks.add(power)
            power *= 10
        return sorted(marks)

    def handle_grow(self) -> int:
        """Growth chains from the single leaf to size n"""
        n = self.config.get("n")
        replicas = self.config.get("replicas")
        checkpoints = self._checkpoints(n)
        self.voice.speak_info(f"growing {replicas} chains to n={n} on {self.config.threads} workers")
        runs = grow_replicas(self.config.seed, replicas, n, checkpoints, threads=self.config.threads,
                             track_max_mass=self.config.get("max_mass"))
        fmt = self.config.output_format

        if fmt is OutputFormat.JSONL:
            frame = records_frame(runs)
            self.writer.write_jsonl(frame.to_dict(orient="records"), self.meta)
            return EXIT_OK
        summary = summarize(runs)
        if fmt is OutputFormat.CSV:
            self.writer.write_frame(records_frame(runs) if self.config.get("records") else summary, self.meta)
        elif fmt is OutputFormat.JSON:
            payload = {"summary": summary.to_dict(orient="records")}
            if self.config.get("max_mass"):
                records = [record for run in runs for record in run]
                try:
                    payload["max_mass_exponent"] = max_mass_exponent(records)
                except DomainError:
                    payload["max_mass_exponent"] = None
            self.writer.write_json(payload, self.meta)
        else:
            self.writer.write_text(summary.to_string(index=False))
        return EXIT_OK

    def _alphas(self):
        alphas = self.config.get("alphas")
        if alphas:
            return alphas
        lo, hi, step = (self.config.get(k) for k in ("alpha_min", "alpha_max", "alpha_step"))
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        if count < 1:
            raise UsageError("empty alpha grid")
        return [round(lo + i * step, 12) for i in range(count)]

    def handle_spectrum(self) -> int:
        """beta(alpha) over a grid of alpha"""
        results = beta_grid(self._alphas())
        fmt = self.config.output_format
        frame = spectrum_frame(results)
        if fmt is OutputFormat.JSON:
            diagnostics = [{"alpha": r.alpha, "beta": r.beta, "bracket": list(r.bracket),
                            "iterations": r.iterations, "residual": r.residual, "error": r.error}
                           for r in results]
            self.writer.write_json({"results": diagnostics}, self.meta)
        elif fmt is OutputFormat.CSV:
            self.writer.write_frame(frame, self.meta)
        else:
            self.writer.write_text(frame.to_string(index=False))
        return EXIT_OK

    def handle_moments(self) -> int:
        """e_n(alpha) by the profile recursion, with the slope fit"""
        alpha = self.config.get("alpha")
        n_max = self.config.get("n_max")
        table = moment_recursion(alpha, n_max)
        window = self.config.get("window") or [max(2, n_max // 16), n_max]
        fit = None
        try:
            fit = slope_fit(table, tuple(window))
            self.voice.speak_info(f"slope {fit.slope:.6f}, dyadic {fit.dyadic:.6f} on [{window[0]}, {window[1]}]")
        except DomainError as e:
            if self.config.get("window"):
                raise
            self.voice.speak_info(f"no slope fit: {e}")

        fmt = self.config.output_format
        if fmt is OutputFormat.JSON:
            payload = {"alpha": alpha, "n_max": n_max, "log_e": table.log_e}
            if fit is not None:
                payload["fit"] = {"slope": fit.slope, "intercept": fit.intercept, "dyadic": fit.dyadic,
                                  "dyadic_series": fit.dyadic_series, "window": list(fit.window)}
            self.writer.write_json(payload, self.meta)
        elif fmt is OutputFormat.CSV:
            self.writer.write_frame(table.to_frame(), self.meta)
        else:
            self.writer.write_text(table.to_frame().to_string(index=False))
        return EXIT_OK

    def handle_spine(self) -> int:
        """Continuum spine paths or the discrete size chain"""
        replicas = self.config.get("replicas")
        threads = self.config.threads
        if self.config.get("mode") == "discrete":
            n = self.config.get("n")
            frame = simulate_discrete_spines(n, replicas, self.config.seed, threads)
            heights = frame["height_scaled"]
        else:
            frame = simulate_spines(replicas, self.config.seed, eps_cut=self.config.get("eps_cut"),
                                    measure=SpineMeasure(self.config.get("law")),
                                    eps_grid=self.config.get("eps_grid"), threads=threads)
            heights = frame["extinction"]
            flagged = int((frame["tail_bound"] > 1e-4).sum())
            if flagged:
                self.voice.speak_info(f"{flagged} paths flagged for a large extinction tail")

        bins = self.config.get("bins")
        fmt = self.config.output_format
        if bins:
            output = histogram(heights.to_numpy(), bins=bins)
        else:
            output = frame
        if fmt is OutputFormat.JSON:
            summary = {column: float(np.nanmean(frame[column])) for column in frame.columns
                       if column != "replica"}
            self.writer.write_json({"means": summary, "rows": output.to_dict(orient="records")}, self.meta)
        elif fmt is OutputFormat.CSV:
            self.writer.write_frame(output, self.meta)
        else:
            self.writer.write_text(output.describe().to_string())
        return EXIT_OK

    def handle_verify(self) -> int:
        """Invariant suites; exit 1 if any check fails"""
        name = self.config.get("suite")
        suites = list(VerifySuite) if name == "all" else [VerifySuite(name)]
        reports = []
        for suite in suites:
            self.voice.speak_info(f"running {suite.value}")
            reports.append(run_suite(suite, seed=self.config.seed, threads=self.config.threads))
        passed = all(report.passed for report in reports)

        rows = [(report.suite, check.name, "ok" if check.passed else "FAIL", check.value, check.expected)
                for report in reports for check in report.checks]
        if self.config.output_format is OutputFormat.JSON:
            self.writer.write_json({"passed": passed, "suites": [r.to_dict() for r in reports]}, self.meta)
            self.voice.speak_table(rows, ["suite", "check", "status", "value", "expected"])
        else:
            lines = [f"{suite}\t{name}\t{status}\t{value}\t{expected}" for suite, name, status, value, expected in rows]
            self.writer.write_text("\n".join(lines))

        if passed:
            self.voice.speak_success("all checks passed")
            return EXIT_OK
        self.voice.speak_error("verification failed")
        return EXIT_FAILED


def run(argv: Optional[Sequence[str]] = None, voice: Optional[Voice] = None) -> int:
    """Parse, run and map errors to exit codes"""
    reader = Reader()
    voice = voice or Voice()
    try:
        config = reader.parse(argv)
    except UsageError as e:
        voice.speak_error(str(e))
        return EXIT_USAGE
    except CapExceededError as e:
        voice.speak_error(str(e))
        return EXIT_USAGE
    except SystemExit as e:
        # argparse reports its own usage errors
        return int(e.code) if e.code is not None else EXIT_OK

    _configure_logging(config.get("verbose", False))
    voice.quiet = config.get("quiet", False)
    try:
        return LeafGrowthCLI(config, reader=reader, voice=voice).run()
    except (UsageError, CapExceededError, TreeParseError) as e:
        voice.speak_error(str(e))
        return EXIT_USAGE
    except LeafGrowthError as e:
        voice.speak_error(str(e))
        return EXIT_FAILED


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main entry point"""
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
