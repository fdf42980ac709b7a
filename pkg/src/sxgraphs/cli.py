"""Command-line entry point: construct, analyze, reproduce.

Exit codes: 0 ok, 2 config error, 3 budget/size gate, 4 acceptance failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from . import io as rio
from .errors import BudgetExceeded, ConfigError, SizeGateError
from .experiments import NAMES, load_manifest, run_experiment
from .graphs import (
    RegularMultigraph, cayley_graph, is_bipartite, preset_graph, random_regular, schreier_graph,
)
from .groups import (
    GeneratorSet, PRESETS, generator_from_json, lps_generator_set, preset_generators,
    random_generator_set,
)
from .hecke import DEFAULT_PATH_BUDGET, closed_path_table, equivalence_chain, quotient_density_experiment
from .spectral import (
    DEFAULT_DENSE_LIMIT, bs_diagnostics, density_profile, eigenvalues, positive_only_profile,
    spectral_path_total,
)
from .walks import almost_diameter_stats, cutoff_profile
from .zeta import (
    DENSE_EDGE_LIMIT, cycle_table, hashimoto_build, hashimoto_spectrum_computed,
    hashimoto_spectrum_predicted, match_spectra,
)

log = logging.getLogger("sxgraphs")

FAMILIES = ("cayley_sl2", "schreier_p1", "random_regular", "preset", "lps")
ANALYSES = ("spectrum", "density", "paths", "zeta", "walk", "geometry", "bs", "equivalence",
            "quotient")
EXIT_OK, EXIT_CONFIG, EXIT_GATE, EXIT_ACCEPT = 0, 2, 3, 4


@dataclass
class ExperimentConfig:
    family: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    analyses: list = field(default_factory=list)
    budget_paths: int = DEFAULT_PATH_BUDGET
    dense_limit: int = DEFAULT_DENSE_LIMIT
    k_max: int = 10
    A: float = 1.0
    eps: float = 0.25
    source: int = 0
    threads: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "family" not in d:
            raise ConfigError("config needs a 'family'")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def randomized(self) -> bool:
        gens = self.params.get("generators")
        return self.family == "random_regular" or (isinstance(gens, dict) and "random" in gens)

    def validate(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        bad = [a for a in self.analyses if a not in ANALYSES]
        if bad:
            raise ConfigError(f"unknown analyses {bad}; expected a subset of {ANALYSES}")
        if self.randomized() and self.seed is None:
            raise ConfigError("randomized families need a seed")

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# ---------------------------------------------------------------------------
# construction

def _generators(cfg: ExperimentConfig) -> GeneratorSet:
    p = cfg.params
    if cfg.family == "lps":
        return lps_generator_set(int(p["q"]), int(p["t"]))
    t = int(p["t"])
    gen_spec = p.get("generators", "pm2")
    if isinstance(gen_spec, str):
        if gen_spec in PRESETS:
            return preset_generators(gen_spec, t)
        return generator_from_json(gen_spec)
    if "random" in gen_spec:
        return random_generator_set(t, int(gen_spec["random"]), cfg.seed)
    if "file" in gen_spec:
        return generator_from_json(gen_spec["file"])
    raise ConfigError(f"cannot read generator entry {gen_spec!r}")


def build_graph(cfg: ExperimentConfig) -> RegularMultigraph:
    p = cfg.params
    try:
        if cfg.family == "preset":
            g = preset_graph(p["name"])
        elif cfg.family == "random_regular":
            g = random_regular(int(p["n"]), int(p["degree"]), cfg.seed)
        else:
            gens = _generators(cfg)
            if cfg.family == "schreier_p1":
                g = schreier_graph(gens.t, gens)
            else:
                g = cayley_graph(None, gens)
            g.meta["generator_set"] = gens.to_json()
    except KeyError as exc:
        raise ConfigError(f"missing parameter {exc} for family {cfg.family}") from exc
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    g.meta.update({"family": cfg.family, "params": cfg.params, "seed": cfg.seed,
                   "tool_version": __version__})
    return g


def cmd_construct(cfg: ExperimentConfig, out) -> Path:
    g = build_graph(cfg)
    out = Path(out)
    path = out if out.suffix == ".json" else out / "graph.json"
    rio.write_json(path, g.to_json())
    log.info("wrote %s (n=%d, degree=%d)", path, g.n, g.degree)
    return path


# ---------------------------------------------------------------------------
# analysis

class _Lazy:
    def __init__(self, g, dense_limit):
        self.g, self.dense_limit, self._s = g, dense_limit, None

    @property
    def spectrum(self):
        if self._s is None:
            self._s = eigenvalues(self.g, self.dense_limit)
        return self._s

    def try_spectrum(self):
        try:
            return self.spectrum
        except SizeGateError:
            return None


def _analysis(name, g, lz, cfg, out):
    """Write the report(s) for one analysis; return the list of written paths."""
    out = Path(out)
    if name == "spectrum":
        p = out / "spectrum.csv"
        rio.write_csv(p, ["index", "lambda", "theta_abs", "inv_p"], lz.spectrum.to_rows())
        return [p]
    if name == "density":
        full, pos = density_profile(lz.spectrum), positive_only_profile(lz.spectrum)
        p = out / "density.csv"
        rio.write_csv(p, ["p", "count_at_least", "positive_count_at_least"],
                      [(a, c, d) for (a, c), (_, d) in zip(full.rows(), pos.rows())])
        return [p]
    if name == "paths":
        table = closed_path_table(g, cfg.k_max, cfg.budget_paths, threads=cfg.threads)
        s = lz.try_spectrum()
        rows = []
        for k in range(cfg.k_max + 1):
            brute = int(table[k].sum())
            spec = None if s is None else spectral_path_total(s, k)
            rows.append((k, brute, "" if spec is None else spec,
                         "" if spec is None else abs(brute - spec)))
        p = out / "paths.csv"
        rio.write_csv(p, ["k", "P_brute", "P_spectral", "delta"], rows)
        return [p]
    if name == "zeta":
        rows = cycle_table(g, cfg.k_max, lz.try_spectrum())
        p = out / "zeta.csv"
        rio.write_csv(p, ["k", "N", "pi", "residue"],
                      [(r["k"], r["N"], r["pi"], r["residue"]) for r in rows])
        written = [p]
        s = lz.try_spectrum()
        op = hashimoto_build(g)
        if s is not None and op.m <= DENSE_EDGE_LIMIT:
            match, dist = match_spectra(hashimoto_spectrum_predicted(s),
                                        hashimoto_spectrum_computed(op))
            p2 = out / "zeta_spectrum.json"
            rio.write_json(p2, {"max_distance": dist, "loop_convention": op.meta["loop_convention"],
                                "pairs": match})
            written.append(p2)
        return written
    if name == "walk":
        target = "pi_bipartite_adjusted" if is_bipartite(g).bipartite else "pi"
        k_max = max(cfg.k_max, 1)
        if g.q >= 2:
            center = (g.q + 1) / (g.q - 1) * math.log(g.n) / math.log(g.q)
            k_max = max(k_max, math.ceil(2 * center))
        prof = cutoff_profile(g, cfg.source, range(0, k_max + 1), target)
        p = out / "walk.csv"
        rio.write_csv(p, ["source", "k", "l1", "tv"], prof.rows())
        return [p]
    if name == "geometry":
        st = almost_diameter_stats(g, cfg.eps)
        p = out / "geometry.csv"
        rio.write_csv(p, ["source", "far_count", "n", "threshold"],
                      [(r.source, r.far_count, g.n, r.radius_threshold) for r in st["reports"]])
        return [p]
    if name == "bs":
        r = bs_diagnostics(g, lz.spectrum)
        p = out / "bs.json"
        rio.write_json(p, r)
        return [p]
    if name == "equivalence":
        r = equivalence_chain(g, cfg.A, lz.spectrum, cfg.budget_paths, cfg.dense_limit)
        p = out / "equivalence.json"
        rio.write_json(p, r)
        return [p]
    if name == "quotient":
        gj = g.meta.get("generator_set")
        if not gj or gj.get("group") != "SL2":
            raise ConfigError("quotient analysis needs a graph built from an SL2 generator set")
        gens = GeneratorSet.from_json(gj)
        res = quotient_density_experiment([gens.t], lambda t: gens, cfg.A,
                                          k_max=min(cfg.k_max, 6), budget=cfg.budget_paths,
                                          dense_limit=cfg.dense_limit)[0]
        res["witness_X"] = [(r["k"], r["P"], r["C"][0.0]) for r in res["witness_X"].rows]
        res["witness_Y"] = [(r["k"], r["P"], r["C"][0.0]) for r in res["witness_Y"].rows]
        p = out / "quotient.json"
        rio.write_json(p, res)
        return [p]
    raise ConfigError(f"unknown analysis {name!r}")


def cmd_analyze(graph_path, analyses, out, cfg: ExperimentConfig) -> dict:
    """Run each analysis; gate errors are collected so the remaining ones still run."""
    g = RegularMultigraph.load(graph_path)
    out = Path(out)
    lz = _Lazy(g, cfg.dense_limit)
    files, errors = [], {}
    for name in analyses:
        try:
            for p in _analysis(name, g, lz, cfg, out):
                files.append((name, p))
        except (SizeGateError, BudgetExceeded) as exc:
            errors[name] = f"{type(exc).__name__}: {exc}"
            log.warning("%s skipped: %s", name, exc)
    meta = {"tool_version": __version__, "config_hash": rio.config_hash(cfg.as_dict()),
            "graph_sha256": rio.sha256_file(graph_path), "analyses": list(analyses),
            "errors": errors}
    return rio.write_index(out, files, meta)


def cmd_reproduce(name: str, out, manifest: dict | None = None) -> dict:
    if name not in NAMES:
        raise ConfigError(f"unknown experiment {name!r}; expected one of {list(NAMES)}")
    manifest = load_manifest() if manifest is None else manifest
    out = Path(out)
    old = out / rio.INDEX_NAME
    if old.exists():
        prev = rio.read_json(old)
        if prev.get("manifest_version") != manifest["version"]:
            raise ConfigError(f"{old} was produced with manifest version "
                              f"{prev.get('manifest_version')}, current is {manifest['version']}")
    result = run_experiment(name, manifest)
    p_json = out / f"{name}.json"
    p_csv = out / f"{name}_checks.csv"
    rio.write_json(p_json, result)
    rio.write_csv(p_csv, ["check", "passed", "value", "threshold"],
                  [(c["check"], c["passed"], c["value"], c["threshold"]) for c in result["checks"]])
    meta = {"tool_version": __version__, "manifest_version": manifest["version"],
            "experiment": name, "config_hash": rio.config_hash(result["params"]),
            "passed": result["passed"]}
    rio.write_index(out, [(name, p_json), (name, p_csv)], meta)
    return result


# ---------------------------------------------------------------------------

def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _apply_overrides(d: dict, args) -> dict:
    d = dict(d)
    d["params"] = dict(d.get("params", {}))
    for key in ("seed", "budget_paths", "dense_limit", "threads", "eps", "k_max", "source"):
        v = getattr(args, key, None)
        if v is not None:
            d[key] = v
    if getattr(args, "t", None) is not None:
        d["params"]["t"] = args.t
    if getattr(args, "q", None) is not None:
        if d.get("family") == "lps":
            d["params"]["q"] = args.q
        elif d.get("family") == "random_regular":
            d["params"]["degree"] = args.q + 1
        else:
            if args.q % 2 == 0:
                raise ConfigError("random generator sets give odd q = 2l - 1")
            d["params"]["generators"] = {"random": (args.q + 1) // 2}
    return d


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sxgraphs", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--out", required=True, help="output directory (or .json file for construct)")
        p.add_argument("--seed", type=int)
        p.add_argument("--budget-paths", type=int, dest="budget_paths")
        p.add_argument("--dense-limit", type=int, dest="dense_limit")
        p.add_argument("--threads", type=int)
        p.add_argument("--t", type=int)
        p.add_argument("--q", type=int)
        p.add_argument("--eps", type=float)
        p.add_argument("--k-max", type=int, dest="k_max")

    p = sub.add_parser("construct", help="build a graph and write it as JSON")
    common(p)
    p = sub.add_parser("analyze", help="run analyses on a graph file")
    p.add_argument("graph")
    p.add_argument("--analyses", help=f"comma-separated subset of {','.join(ANALYSES)}")
    p.add_argument("--source", type=int)
    common(p)
    p = sub.add_parser("reproduce", help="run a frozen experiment from the manifest")
    p.add_argument("name", help="|".join(NAMES))
    p.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "construct":
            cfg = ExperimentConfig.from_dict(_apply_overrides(_load_config(args.config), args))
            print(cmd_construct(cfg, args.out))
            return EXIT_OK
        if args.command == "analyze":
            d = _load_config(args.config)
            d.setdefault("family", "preset")
            d = _apply_overrides(d, args)
            if args.analyses:
                d["analyses"] = [a.strip() for a in args.analyses.split(",") if a.strip()]
            cfg = ExperimentConfig.from_dict(d)
            if not cfg.analyses:
                raise ConfigError("no analyses requested")
            index = cmd_analyze(args.graph, cfg.analyses, args.out, cfg)
            for e in index["outputs"]:
                print(e["file"], e["sha256"][:12])
            if index["errors"]:
                for k, v in index["errors"].items():
                    print(f"gated {k}: {v}", file=sys.stderr)
                return EXIT_GATE
            return EXIT_OK
        result = cmd_reproduce(args.name, args.out)
        for c in result["checks"]:
            print(f"{'PASS' if c['passed'] else 'FAIL'} {c['check']}")
        return EXIT_OK if result["passed"] else EXIT_ACCEPT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetExceeded, SizeGateError) as exc:
        print(f"gate error: {exc}", file=sys.stderr)
        return EXIT_GATE
    except (FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
