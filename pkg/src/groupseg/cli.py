"""Command-line entry point.

    groupseg group    --config run.json    # fit the feature grouping
    groupseg segment  --config run.json    # per-group time segmentation
    groupseg explain  --config run.json    # players + Shapley values + cell map
    groupseg evaluate --config run.json    # deletion curves, ΔAUC, comparisons
    groupseg bench    --config run.json    # runtime vs budget
    groupseg synth    --kind planted_blocks --seed 0 --output-dir data/

Exit codes: 0 success, 1 invalid input or config, 2 runtime failure. Errors go
to stderr prefixed with ``ERROR <code>:``. All artifacts of a run are
computed first and written at the end (each atomically), so a failed run
leaves no partial output.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .attribution import MaskingBaseline, shapley_permutation
from .dataio import Dataset, IngestError, atomic_write_text, load_manifest, write_dataset
from .evaluation import (
    deletion_curve,
    delta_auc,
    grouping_comparison,
    robustness_cosine,
    runtime_bench,
    sensitivity_sweep,
)
from .grouping import GroupingConfig
from .pipeline import PipelineConfig, fit_grouping, make_players, project_to_cells
from .players import PlayerSet
from .predictors import PredictorError, build_predictor
from .segmentation import SegmentationConfig
from . import synthetic

log = logging.getLogger("groupseg")

COMMANDS = ("group", "segment", "explain", "evaluate", "bench")
PRESETS = {"har": (96, 10), "ettm1": (128, 13), "ptbxl": (1000, 100), "sp500": (20, 4)}

_seed = {"type": "integer", "minimum": 0, "maximum": 2**64 - 1}
_pos = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["run_id", "dataset", "grouping", "segmentation", "attribution"],
    "additionalProperties": False,
    "properties": {
        "run_id": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "output_dir": {"type": "string"},
        "dataset": {
            "type": "object",
            "required": ["manifest"],
            "additionalProperties": False,
            "properties": {
                "manifest": {"type": "string"},
                "background_manifest": {"type": "string"},
                "explain_windows": {"type": "array", "items": {"type": "integer", "minimum": 0},
                                    "minItems": 1},
            },
        },
        "predictor": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["linear", "player_additive", "player_interaction", "external"]},
            },
        },
        "players": {"type": "string"},
        "grouping": {
            "type": "object",
            "required": ["seed"],
            "additionalProperties": False,
            "properties": {
                "method": {"enum": ["hsic", "pearson", "random", "none"]},
                "k_hint": _pos,
                "seed": _seed,
                "n_hsic_subsample": {"type": "integer", "minimum": 4},
                "k_max": _pos,
                "quality_threshold": {"type": "number", "exclusiveMinimum": 0},
                "max_refine_depth": {"type": "integer", "minimum": 0},
            },
        },
        "segmentation": {
            "type": "object",
            "required": ["l_min", "seed"],
            "additionalProperties": False,
            "properties": {
                "l_min": {"type": "integer", "minimum": 2},
                "seed": _seed,
                "j_max": _pos,
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "num_permutations": _pos,
                "threshold_mode": {"enum": ["top_level", "per_interval"]},
            },
        },
        "attribution": {
            "type": "object",
            "required": ["M", "seed"],
            "additionalProperties": False,
            "properties": {
                "M": _pos,
                "seed": _seed,
                "baseline": {"enum": ["mean", "zero", "noise"]},
                "noise_seed": _seed,
            },
        },
        "evaluation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fractions": {"type": "array", "items": {"type": "number", "minimum": 0,
                                                         "maximum": 1}, "minItems": 1},
                "loss_mode": {"enum": ["output", "label"]},
                "task": {"enum": ["regression", "classification"]},
                "strategies": {"type": "array",
                               "items": {"enum": ["hsic", "pearson", "random", "none"]}},
                "schemes": {"type": "array", "items": {
                    "enum": ["group_segment", "cell", "timestep", "window", "subsequence"]}},
                "window_len": _pos,
                "n_subseq": _pos,
                "robustness": {
                    "type": "object",
                    "required": ["n_runs", "background_size", "seed"],
                    "additionalProperties": False,
                    "properties": {"n_runs": {"type": "integer", "minimum": 2},
                                   "background_size": _pos, "seed": _seed},
                },
                "sensitivity": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "l_min": {"type": "array", "items": {"type": "integer", "minimum": 2},
                                  "minItems": 1},
                        "masking_mode": {"type": "array",
                                         "items": {"enum": ["mean", "zero", "noise"]},
                                         "minItems": 1},
                    },
                },
            },
        },
        "bench": {
            "type": "object",
            "required": ["methods", "budgets"],
            "additionalProperties": False,
            "properties": {
                "methods": {"type": "array", "minItems": 1, "items": {
                    "enum": ["group_segment", "cell", "timestep", "window", "subsequence"]}},
                "budgets": {"type": "array", "items": _pos, "minItems": 1},
                "n_samples": _pos,
                "budget_unit": {"enum": ["permutations", "forward_calls"]},
                "window_len": _pos,
                "n_subseq": _pos,
            },
        },
    },
}


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _invalid(msg: str) -> CliError:
    return CliError(1, msg)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _map_csv(m: np.ndarray, names) -> str:
    return _csv(["t", *names], [[t + 1, *row] for t, row in enumerate(m)])


def _set_seeds(cfg: dict, seed: int) -> None:
    for section in ("grouping", "segmentation", "attribution"):
        if section in cfg:
            cfg[section]["seed"] = seed
    if "attribution" in cfg and "noise_seed" in cfg["attribution"]:
        cfg["attribution"]["noise_seed"] = seed
    rob = cfg.get("evaluation", {}).get("robustness")
    if rob is not None:
        rob["seed"] = seed


class Run:
    """A validated configuration with its data loaded."""

    def __init__(self, cfg: dict, base: Path, command: str):
        self.cfg = cfg
        self.base = base
        self.command = command
        self.run_id = cfg["run_id"]
        self.output_dir = self._path(cfg.get("output_dir", "."))
        ds = cfg["dataset"]
        self.data: Dataset = load_manifest(self._path(ds["manifest"]))
        if "background_manifest" in ds:
            self.background_data = load_manifest(self._path(ds["background_manifest"]))
            if self.background_data.D != self.data.D:
                raise _invalid("background and dataset differ in number of variables")
        else:
            self.background_data = self.data
        self.background = list(self.background_data.windows)
        self.explain_idx = ds.get("explain_windows", [0])
        for i in self.explain_idx:
            if i >= len(self.data.windows):
                raise _invalid(f"explain_windows index {i} out of range "
                               f"({len(self.data.windows)} windows)")
        self.pipeline = self._pipeline_config()
        self.fixed_players = None
        if "players" in cfg:
            ps = PlayerSet.from_json(self._path(cfg["players"]).read_text(encoding="utf-8"))
            if (ps.T, ps.D) != (self.data.T, self.data.D):
                raise _invalid(f"players are {ps.T}x{ps.D}, data is {self.data.T}x{self.data.D}")
            self.fixed_players = ps
        if command in ("explain", "evaluate", "bench") and "predictor" not in cfg:
            raise _invalid(f"config: 'predictor' is required for {command}")
        if command == "bench" and "bench" not in cfg:
            raise _invalid("config: 'bench' section is required for bench")
        ev = cfg.get("evaluation", {})
        if ev.get("loss_mode") == "label" and self.data.labels is None:
            raise _invalid("label loss needs labels in the dataset manifest")
        self._predictor = None

    def _path(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else self.base / q

    def _pipeline_config(self) -> PipelineConfig:
        g, s, a = self.cfg["grouping"], self.cfg["segmentation"], self.cfg["attribution"]
        ev = self.cfg.get("evaluation", {})
        try:
            kw = {}
            if "fractions" in ev:
                kw["fractions"] = tuple(float(f) for f in ev["fractions"])
            return PipelineConfig(
                grouping=GroupingConfig(
                    seed=g["seed"],
                    **{k: g[k] for k in ("n_hsic_subsample", "k_max", "quality_threshold",
                                         "max_refine_depth") if k in g}),
                segmentation=SegmentationConfig(
                    l_min=s["l_min"], seed=s["seed"],
                    **{k: s[k] for k in ("j_max", "alpha", "num_permutations",
                                         "threshold_mode") if k in s}),
                M=a["M"],
                attribution_seed=a["seed"],
                grouping_method=g.get("method", "hsic"),
                mask_mode=a.get("baseline", "mean"),
                noise_seed=a.get("noise_seed", a["seed"]),
                loss_mode=ev.get("loss_mode", "output"),
                **kw,
            )
        except ValueError as err:
            raise _invalid(f"config: {err}") from None

    @property
    def predictor(self):
        if self._predictor is None:
            spec = copy.deepcopy(self.cfg["predictor"])
            if isinstance(spec.get("players"), str):
                spec["players"] = json.loads(self._path(spec["players"]).read_text("utf-8"))
            try:
                self._predictor = build_predictor(spec)
            except (KeyError, ValueError, TypeError) as err:
                raise _invalid(f"config: bad predictor spec: {err}") from None
        return self._predictor

    def grouping(self):
        return fit_grouping(self.background, self.pipeline,
                            k_hint=self.cfg["grouping"].get("k_hint"),
                            variable_names=self.data.variable_names)

    def players_for(self, window, grouping):
        if self.fixed_players is not None:
            return self.fixed_players, ()
        return make_players(window, self.pipeline, grouping)

    def baseline(self, mode=None) -> MaskingBaseline:
        return MaskingBaseline.from_background(self.background, mode or self.pipeline.mask_mode,
                                               self.pipeline.noise_seed)

    def close(self):
        if self._predictor is not None and hasattr(self._predictor, "close"):
            self._predictor.close()


def _name(run: Run, artifact: str, ext: str) -> str:
    return f"{run.run_id}_{artifact}.{ext}"


def cmd_group(run: Run) -> dict:
    g = run.grouping()
    out = {_name(run, "grouping", "json"): _dump(g.to_dict())}
    if g.affinity is not None:
        names = list(g.variable_names)
        out[_name(run, "affinity", "csv")] = _csv(["variable", *names],
                                                  [[n, *row] for n, row in zip(names, g.affinity)])
    return out


def cmd_segment(run: Run) -> dict:
    g = run.grouping()
    out = {}
    for i in run.explain_idx:
        _, segs = make_players(run.data.windows[i], run.pipeline.with_(scheme="group_segment"), g)
        out[_name(run, f"w{i}_segmentation", "json")] = _dump([s.to_dict() for s in segs])
    return out


def _explain_all(run: Run):
    grouping = None if run.fixed_players is not None else run.grouping()
    baseline = run.baseline()
    for i in run.explain_idx:
        x = run.data.windows[i]
        ps, segs = run.players_for(x, grouping)
        res = shapley_permutation(run.predictor, x, ps, run.pipeline.M, baseline,
                                  run.pipeline.attribution_seed)
        yield i, grouping, ps, segs, res, project_to_cells(res, ps)


def cmd_explain(run: Run) -> dict:
    out = {}
    names = run.data.variable_names
    for i, grouping, ps, segs, res, imp in _explain_all(run):
        out[_name(run, f"w{i}_players", "json")] = _dump(ps.to_dict())
        out[_name(run, f"w{i}_attribution", "json")] = _dump(res.to_dict())
        out[_name(run, f"w{i}_importance", "json")] = _dump(
            {"T": ps.T, "D": ps.D, "variable_names": list(names), "values": imp.tolist()})
        out[_name(run, f"w{i}_importance", "csv")] = _map_csv(imp, names)
    if run.fixed_players is None:
        out[_name(run, "grouping", "json")] = _dump(grouping.to_dict())
    return out


def cmd_evaluate(run: Run) -> dict:
    ev = run.cfg.get("evaluation", {})
    cfg = run.pipeline
    task = ev.get("task", "regression")
    labels = run.data.labels if cfg.loss_mode == "label" else None
    out = {}
    rows = []
    for i, grouping, ps, segs, res, imp in _explain_all(run):
        curve = deletion_curve(run.predictor, run.data.windows[i], imp, cfg.fractions,
                               res.baseline, cfg.loss_mode,
                               None if labels is None else float(labels[i]), task)
        conservation = abs(float(imp.sum()) - float(res.phi.sum()))
        efficiency = abs(float(res.phi.sum()) - (res.f_full - res.f_empty))
        rows.append({"window": i, "delta_auc": delta_auc(curve), "n_players": len(ps),
                     "conservation_error": conservation, "efficiency_error": efficiency})
        out[_name(run, f"w{i}_deletion", "csv")] = curve.to_csv()
    out[_name(run, "deletion", "json")] = _dump({
        "fractions": list(cfg.fractions), "loss_mode": cfg.loss_mode, "windows": rows,
        "mean_delta_auc": float(np.mean([r["delta_auc"] for r in rows]))})
    out[_name(run, "deletion_table", "csv")] = _csv(
        ["window", "delta_auc", "n_players", "conservation_error", "efficiency_error"],
        [[r["window"], r["delta_auc"], r["n_players"], r["conservation_error"],
          r["efficiency_error"]] for r in rows])

    windows = [run.data.windows[i] for i in run.explain_idx]
    lab = None if labels is None else [float(labels[i]) for i in run.explain_idx]

    if ev.get("schemes"):
        scheme_rows = []
        grouping = None if run.fixed_players is not None else run.grouping()
        for scheme in ev["schemes"]:
            scfg = cfg.with_(scheme=scheme, window_len=ev.get("window_len"),
                             n_subseq=ev.get("n_subseq"))
            aucs = []
            for x, label in zip(windows, lab or [None] * len(windows)):
                if scheme == "group_segment" and run.fixed_players is not None:
                    ps = run.fixed_players
                else:
                    ps, _ = make_players(x, scfg, grouping)
                base = run.baseline()
                res = shapley_permutation(run.predictor, x, ps, cfg.M, base, cfg.attribution_seed)
                c = deletion_curve(run.predictor, x, project_to_cells(res, ps), cfg.fractions,
                                   base, cfg.loss_mode, label, task)
                aucs.append(delta_auc(c))
            scheme_rows.append({"scheme": scheme, "delta_auc": float(np.mean(aucs)),
                                "delta_auc_std": float(np.std(aucs))})
        out[_name(run, "schemes", "json")] = _dump(scheme_rows)
        out[_name(run, "schemes", "csv")] = _csv(
            ["scheme", "delta_auc", "delta_auc_std"],
            [[r["scheme"], r["delta_auc"], r["delta_auc_std"]] for r in scheme_rows])

    if ev.get("strategies"):
        if run.fixed_players is not None:
            raise _invalid("grouping strategies cannot be compared with fixed players")
        cmp_ = grouping_comparison(run.predictor, windows, run.background, ev["strategies"],
                                   cfg, labels=lab)
        out[_name(run, "grouping_comparison", "json")] = _dump({
            "table": cmp_["table"],
            "groupings": {k: v.to_dict() for k, v in cmp_["groupings"].items()},
            "curves": {k: v.to_dict() for k, v in cmp_["curves"].items()},
        })
        out[_name(run, "grouping_comparison", "csv")] = _csv(
            ["strategy", "delta_auc", "delta_auc_std"],
            [[r["strategy"], r["delta_auc"], r["delta_auc_std"]] for r in cmp_["table"]])

    if "robustness" in ev:
        rb = ev["robustness"]
        if rb["background_size"] > len(run.background):
            raise _invalid("robustness background_size exceeds the background pool")
        grouping = None if run.fixed_players is not None else run.grouping()
        results = {}
        for i in run.explain_idx:
            x = run.data.windows[i]
            r = robustness_cosine(run.predictor, x, run.background, rb["n_runs"], cfg,
                                  rb["background_size"], rb["seed"], grouping,
                                  player_set=run.fixed_players)
            r.pop("maps", None)
            for p in r["pairs"]:
                if np.isnan(p["cosine"]):
                    p["cosine"] = None
            results[str(i)] = r
        out[_name(run, "robustness", "json")] = _dump(results)

    for axis, values in ev.get("sensitivity", {}).items():
        if axis == "l_min" and run.fixed_players is not None:
            raise _invalid("an l_min sweep needs data-driven players, not fixed players")
        rows_s = _sensitivity(run, axis, values, windows, lab)
        out[_name(run, f"sensitivity_{axis}", "json")] = _dump(rows_s)
        out[_name(run, f"sensitivity_{axis}", "csv")] = _csv(
            [axis, "delta_auc", "delta_loss_at_0.60"],
            [[r["value"], r["delta_auc"], r["delta_loss_at_0.60"]] for r in rows_s])
    return out


def _sensitivity(run: Run, axis, values, windows, labels):
    if run.fixed_players is None:
        return sensitivity_sweep(run.predictor, windows, run.background, axis, values,
                                 run.pipeline, labels=labels, grouping=run.grouping())
    return sensitivity_sweep(run.predictor, windows, run.background, axis, values,
                             run.pipeline, labels=labels, player_set=run.fixed_players)


def cmd_bench(run: Run) -> dict:
    b = run.cfg["bench"]
    cfg = run.pipeline.with_(window_len=b.get("window_len"), n_subseq=b.get("n_subseq"))
    windows = [run.data.windows[i] for i in run.explain_idx]
    n = b.get("n_samples", len(windows))
    if n > len(windows):
        raise _invalid(f"bench n_samples={n} exceeds the {len(windows)} explain_windows")
    if "window" in b["methods"] and not b.get("window_len"):
        raise _invalid("bench method 'window' needs window_len")
    if "subsequence" in b["methods"] and not b.get("n_subseq"):
        raise _invalid("bench method 'subsequence' needs n_subseq")
    if "group_segment" in b["methods"] and run.fixed_players is not None:
        raise _invalid("bench measures player construction; remove the fixed 'players' entry")
    records = runtime_bench(run.predictor, windows, run.background, b["methods"], b["budgets"],
                            cfg, n_samples=n, budget_unit=b.get("budget_unit", "permutations"))
    calls = [{"method": r.method, "M": r.M, "n_samples": r.n_samples,
              "mean_calls": r.mean_calls, "mean_players": r.mean_players} for r in records]
    return {
        _name(run, "bench", "json"): _dump([r.to_dict() for r in records]),
        _name(run, "bench", "csv"): _csv(
            ["method", "M", "mean_seconds", "std_seconds", "n_samples", "mean_calls"],
            [[r.method, r.M, r.mean_seconds, r.std_seconds, r.n_samples, r.mean_calls]
             for r in records]),
        # timing-free companion: byte-identical across reruns
        _name(run, "bench_calls", "json"): _dump(calls),
    }


HANDLERS = {"group": cmd_group, "segment": cmd_segment, "explain": cmd_explain,
            "evaluate": cmd_evaluate, "bench": cmd_bench}


def load_config(path, seed_override=None, preset=None, output_dir=None) -> tuple[dict, Path]:
    path = Path(path)
    if not path.exists():
        raise _invalid(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise _invalid(f"config: invalid JSON: {err}") from None
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as err:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise _invalid(f"config: {where}: {err.message}") from None
    if seed_override is not None:
        _set_seeds(cfg, seed_override)
    if preset is not None:
        cfg["segmentation"]["l_min"] = PRESETS[preset][1]
    if output_dir is not None:
        cfg["output_dir"] = str(Path(output_dir).resolve())
    return cfg, path.parent


def run_subcommand(name: str, config_path, seed_override=None, preset=None,
                   output_dir=None) -> list[Path]:
    """Run one subcommand; returns the written artifact paths. Raises CliError."""
    cfg, base = load_config(config_path, seed_override, preset, output_dir)
    try:
        run = Run(cfg, base, name)
    except IngestError as err:
        raise _invalid(str(err)) from None
    if preset is not None and run.data.T != PRESETS[preset][0]:
        raise _invalid(f"preset {preset!r} expects T={PRESETS[preset][0]}, data has T={run.data.T}")
    try:
        artifacts = HANDLERS[name](run)
    except CliError:
        raise
    except (PredictorError, RuntimeError, MemoryError, OSError) as err:
        raise CliError(2, f"{type(err).__name__}: {err}") from None
    except ValueError as err:
        raise CliError(2, f"{err}") from None
    finally:
        run.close()
    written = []
    for fname, text in artifacts.items():
        p = run.output_dir / fname
        atomic_write_text(p, text)
        written.append(p)
    return written


SYNTH_KINDS = ("planted_blocks", "mean_shift", "player_fixture")


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise _invalid(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def synth(kind: str, seed: int, output_dir, params: dict | None = None) -> list[Path]:
    """Write a synthetic dataset (CSV windows + manifest + a record of the truth)."""
    params = dict(params or {})
    out = Path(output_dir)
    written = []
    try:
        if kind == "planted_blocks":
            if "block_sizes" in params:
                params["block_sizes"] = tuple(params["block_sizes"])
            pb = synthetic.planted_blocks(seed, **params)
            names = [f"x{d}" for d in range(pb.windows.shape[2])]
            written.append(write_dataset(out, pb.windows, names))
            record = {"kind": kind, "seed": seed, "params": params,
                      "groups": [list(g) for g in pb.groups]}
        elif kind == "mean_shift":
            x = synthetic.mean_shift(seed, **params)
            names = [f"x{d}" for d in range(x.shape[2])]
            written.append(write_dataset(out, x, names))
            record = {"kind": kind, "seed": seed, "params": params,
                      "shift_at": params.get("shift_at", 64)}
        elif kind == "player_fixture":
            for key in ("groups", "segments"):
                if key in params:
                    params[key] = tuple(tuple(map(tuple, s)) if key == "segments" else tuple(s)
                                        for s in params[key])
            fx = synthetic.player_fixture(seed, **params)
            names = [f"x{d}" for d in range(fx.player_set.D)]
            written.append(write_dataset(out, fx.windows, names))
            written.append(write_dataset(out, fx.background, names, stem="bg",
                                         manifest="background.json"))
            players_path = out / "players.json"
            atomic_write_text(players_path, _dump(fx.player_set.to_dict()))
            written.append(players_path)
            spec = fx.predictor.to_dict()
            spec["players"] = "players.json"
            pred_path = out / "predictor.json"
            atomic_write_text(pred_path, _dump(spec))
            written.append(pred_path)
            record = {"kind": kind, "seed": seed, "weights": fx.weights.tolist(),
                      "mu": fx.baseline.mu.tolist()}
            config = {
                "run_id": "fixture",
                "output_dir": "out",
                "dataset": {"manifest": "manifest.json", "background_manifest": "background.json"},
                "predictor": spec,
                "players": "players.json",
                "grouping": {"seed": seed},
                "segmentation": {"l_min": 4, "seed": seed},
                "attribution": {"M": 50, "seed": seed, "baseline": "mean"},
            }
            cpath = out / "config.json"
            atomic_write_text(cpath, _dump(config))
            written.append(cpath)
        else:
            raise _invalid(f"unknown synth kind {kind!r}")
    except TypeError as err:
        raise _invalid(f"synth parameters: {err}") from None
    except ValueError as err:
        raise _invalid(f"synth: {err}") from None
    rpath = out / "truth.json"
    atomic_write_text(rpath, _dump(record))
    written.append(rpath)
    return written


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="groupseg", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--output-dir", help="override the config's output_dir")
        p.add_argument("--seed-override", type=int, help="replace every seed in the config")
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="window-size preset; sets segmentation.l_min and checks T")
        p.add_argument("--quiet", action="store_true")
    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--kind", required=True, choices=SYNTH_KINDS)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="generator parameter, VALUE parsed as JSON when possible")
    p.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        if args.command == "synth":
            paths = synth(args.kind, args.seed, args.output_dir, _parse_params(args.param))
        else:
            paths = run_subcommand(args.command, args.config, args.seed_override, args.preset,
                                   args.output_dir)
    except CliError as err:
        print(f"ERROR {err.code}: {err}", file=sys.stderr)
        return err.code
    for p in paths:
        log.info("wrote %s", p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
