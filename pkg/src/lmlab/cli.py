"""Single entry point: every experiment is a seeded, config-driven subcommand.

Every run resolves its parameters as flag > config file > built-in default,
writes its artifacts (CSV/JSON) into --out, and finishes with manifest.json
echoing the fully resolved config, the source of each value, and the artifact
list. Identical resolved configs produce byte-identical artifacts: no
timestamps, no absolute paths, sorted JSON keys, repr-precision floats.

Exit codes: 0 success, 2 usage (argparse), 3 validation failure (bad
parameter values or a run whose own checks failed).

--trials N fans out independent child-seeded repetitions where the subcommand
supports it (gradcheck, capacity); --parallel runs those in processes. The
merge is by trial index, so parallel and serial runs emit identical bytes.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, attention, bpe, capacity, contexts, floatlab
from . import micrograd, numkit, uattention
from .activations import softmax_temperature

# ---------------------------------------------------------------------------
# parameter plumbing

_COMMON = {
    "seed": ("int", 0, "root seed; children are split from it"),
    "out": ("str", "lmlab_out", "output directory"),
    "trials": ("int", 1, "independent seeded repetitions (where supported)"),
}

_SPECS = {
    "gradcheck": {
        "vocab": ("int", 8, "vocabulary size V"),
        "dim": ("int", 6, "embedding width d"),
        "hidden": ("int", 5, "hidden width h"),
        "eps": ("float", 1e-5, "finite-difference step"),
        "tol": ("float", 1e-6, "max allowed relative gradient error"),
    },
    "attention-demo": {
        "n": ("int", 8, "sequence length"),
        "dim": ("int", 16, "model width d"),
        "heads": ("int", 2, "attention heads"),
        "layers": ("int", 1, "transformer blocks"),
    },
    "generate": {
        "vocab": ("int", 16, "vocabulary size"),
        "dim": ("int", 8, "model width d"),
        "heads": ("int", 2, "attention heads"),
        "layers": ("int", 1, "transformer blocks"),
        "prompt": ("intlist", [0, 1, 2], "comma-separated prompt token ids"),
        "steps": ("int", 8, "tokens to sample"),
        "temperature": ("float", 1.0, "sampling temperature"),
    },
    "bpe-train": {
        "corpus": ("str", "", "path to a corpus file (bytes)"),
        "text": ("str", "", "inline training text (instead of --corpus)"),
        "target-size": ("int", 300, "vocabulary size to train toward"),
    },
    "bpe-encode": {
        "vocab-file": ("str", "", "trained vocabulary (JSON-lines)"),
        "text": ("str", "", "text to encode"),
        "infile": ("str", "", "file with text to encode"),
    },
    "bpe-decode": {
        "vocab-file": ("str", "", "trained vocabulary (JSON-lines)"),
        "ids": ("intlist", [], "comma-separated token ids"),
        "infile": ("str", "", "ids.json produced by bpe-encode"),
    },
    "capacity": {
        "epsilon": ("float", 0.25, "pairwise |dot| threshold"),
        "dims": ("intlist", [32, 64, 128, 256], "dimensions for the curve"),
        "max-attempts": ("int", capacity.MAX_ATTEMPTS_DEFAULT,
                         "consecutive rejections before stopping"),
        "max-accept": ("int", capacity.MAX_ACCEPT_DEFAULT,
                       "accepted-vector budget"),
        "measure-n": ("int", 0, "if >= 2, also sample-and-measure this many vectors"),
    },
    "contexts": {
        "eigs-a": ("floatlist", [1.0, 2.0, 3.0], "eigenvalues on the standard basis"),
        "eigs-b": ("floatlist", [4.0, 5.0, 6.0], "eigenvalues on the rotated basis"),
    },
    "uattention": {
        "circuit": ("str", "", "JSON circuit file (empty: built-in demo circuit)"),
        "samples": ("int", 20000, "measurement repetitions"),
    },
    "floatlab": {
        "requests": ("int", 100, "number of requests in the corpus"),
        "length": ("int", 100, "elements per request"),
        "style": ("str", "spread", "corpus style: spread | integers"),
        "batch-sizes": ("intlist", [1, 2, 7, 64], "batch sizes to compare"),
        "fixed-chunk": ("int", 8, "chunk for the deterministic mode"),
        "decades": ("float", 12.0, "magnitude spread of the crafted corpus"),
    },
}


def _convert(name: str, kind: str, raw):
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return str(raw)
        if kind == "intlist":
            if isinstance(raw, (list, tuple)):
                return [int(x) for x in raw]
            return [int(x) for x in str(raw).split(",") if x.strip() != ""]
        if kind == "floatlist":
            if isinstance(raw, (list, tuple)):
                return [float(x) for x in raw]
            return [float(x) for x in str(raw).split(",") if x.strip() != ""]
    except (TypeError, ValueError):
        raise ValueError(f"invalid value for parameter {name!r}: {raw!r}")
    raise ValueError(f"unknown parameter kind {kind!r}")


def _spec_for(command: str) -> dict:
    spec = dict(_COMMON)
    spec.update(_SPECS[command])
    return spec


def _resolve(command: str, args: argparse.Namespace):
    """flag > config > default; returns (params, sources)."""
    spec = _spec_for(command)
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValueError("config file must hold a JSON object")
        for key in config:
            if key not in spec:
                raise ValueError(
                    f"unknown config parameter {key!r} for subcommand {command}"
                )
    params = {}
    sources = {}
    for name, (kind, default, _help) in spec.items():
        flag_val = getattr(args, name.replace("-", "_"), None)
        if flag_val is not None:
            params[name] = _convert(name, kind, flag_val)
            sources[name] = "flag"
        elif name in config:
            params[name] = _convert(name, kind, config[name])
            sources[name] = "config"
        else:
            params[name] = _convert(name, kind, default)
            sources[name] = "default"
    return params, sources


def _write_json(path: str, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _finish(out_dir: str, command: str, params: dict, sources: dict,
            outputs: list, results: dict) -> int:
    results_path = os.path.join(out_dir, "results.json")
    _write_json(results_path, results)
    outputs = sorted(set(outputs) | {"results.json"})
    manifest = {
        "subcommand": command,
        "parameters": params,
        "sources": sources,
        "rng_algorithm": numkit.RNG_ALGORITHM,
        "package_version": __version__,
        "outputs": outputs,
    }
    _write_json(os.path.join(out_dir, "manifest.json"), manifest)
    ok = results.get("ok", True)
    if not ok:
        print(f"{command}: checks failed, see {results_path}", file=sys.stderr)
        return 3
    return 0


def _csv_writerows(path: str, header, rows) -> None:
    import csv as _csv
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _fmt(x) -> str:
    return repr(float(x))


def _run_trials(worker, common_args: tuple, trials: int, parallel: bool):
    """worker(trial_index, *common_args) -> row; merged by trial order."""
    jobs = [(i,) + common_args for i in range(trials)]
    if parallel and trials > 1:
        with ProcessPoolExecutor(max_workers=min(trials, os.cpu_count() or 1)) as ex:
            return list(ex.map(worker, *zip(*jobs)))
    return [worker(*job) for job in jobs]


def _child_rng(seed: int, index: int) -> np.random.Generator:
    return numkit.spawn_rngs(seed, index + 1)[index]


# ---------------------------------------------------------------------------
# gradcheck


def _gradcheck_trial(index: int, seed: int, vocab: int, dim: int,
                     hidden: int, eps: float):
    rng = _child_rng(seed, index)
    params = micrograd.init_params(rng, vocab, dim, hidden)
    k = int(rng.integers(vocab))
    y = int(rng.integers(2))
    err = micrograd.gradient_check(params, k, y, eps)
    return index, k, y, err


def _cmd_gradcheck(p: dict, out_dir: str, parallel: bool):
    rows = _run_trials(
        _gradcheck_trial,
        (p["seed"], p["vocab"], p["dim"], p["hidden"], p["eps"]),
        p["trials"], parallel,
    )
    _csv_writerows(
        os.path.join(out_dir, "gradcheck.csv"),
        ["trial", "k", "y", "max_rel_error"],
        [(i, k, y, _fmt(e)) for i, k, y, e in rows],
    )
    worst = max(e for _, _, _, e in rows)
    results = {
        "worst_rel_error": worst,
        "tol": p["tol"],
        "trials": p["trials"],
        "ok": worst <= p["tol"],
    }
    return ["gradcheck.csv"], results


# ---------------------------------------------------------------------------
# attention-demo


def _cmd_attention_demo(p: dict, out_dir: str, parallel: bool):
    n, d, h, layers = p["n"], p["dim"], p["heads"], p["layers"]
    rngs = numkit.spawn_rngs(p["seed"], layers + 3)
    blocks = [attention.init_block_params(rngs[i], d, h) for i in range(layers)]
    x = rngs[layers].uniform(-0.5, 0.5, size=(n, d))

    q, k, _ = attention.qkv_project(x, blocks[0].heads[0])
    a = attention.attention_weights(q, k, causal=True)
    numkit.save_matrix_csv(os.path.join(out_dir, "attention_weights.csv"), a)
    causal_zeros_exact = bool(np.all(a[np.triu_indices(n, 1)] == 0.0))
    row_sum_dev = float(np.max(np.abs(a.sum(axis=1) - 1.0)))

    def run_stack(inp):
        z = inp
        for blk in blocks:
            z = attention.transformer_block(z, blk, causal=True)
        return z

    base = run_stack(x)
    bumped = x.copy()
    bumped[n - 1] += 1.0
    alt = run_stack(bumped)
    causality_exact = bool(np.all(base[: n - 1] == alt[: n - 1]))

    shared = rngs[layers + 1].uniform(-0.5, 0.5, size=d)
    ctx1 = rngs[layers + 1].uniform(-0.5, 0.5, size=(n - 1, d))
    ctx2 = rngs[layers + 2].uniform(-0.5, 0.5, size=(n - 1, d))
    out1 = run_stack(np.vstack([ctx1, shared]))
    out2 = run_stack(np.vstack([ctx2, shared]))
    polysemy_distance = numkit.norm(out1[-1] - out2[-1])

    results = {
        "causal_zeros_exact": causal_zeros_exact,
        "causality_exact": causality_exact,
        "row_sum_max_deviation": row_sum_dev,
        "polysemy_distance": polysemy_distance,
        "ok": causal_zeros_exact and causality_exact
              and row_sum_dev <= 1e-12 and polysemy_distance > 1e-3,
    }
    return ["attention_weights.csv"], results


# ---------------------------------------------------------------------------
# generate


def _cmd_generate(p: dict, out_dir: str, parallel: bool):
    vocab, d, h, layers = p["vocab"], p["dim"], p["heads"], p["layers"]
    prompt = p["prompt"]
    if not prompt:
        raise ValueError("parameter 'prompt' must name at least one token id")
    rngs = numkit.spawn_rngs(p["seed"], layers + 2)
    blocks = [attention.init_block_params(rngs[i], d, h) for i in range(layers)]
    e_in = rngs[layers].uniform(-0.5, 0.5, size=(vocab, d))
    e_out = rngs[layers].uniform(-0.5, 0.5, size=(vocab, d))
    ids = attention.generate(
        blocks, e_in, e_out, prompt, p["temperature"], p["steps"], rngs[layers + 1],
    )
    _write_json(os.path.join(out_dir, "tokens.json"),
                {"prompt": prompt, "tokens": ids})
    results = {"generated": len(ids) - len(prompt), "ok": True}
    return ["tokens.json"], results


# ---------------------------------------------------------------------------
# bpe


def _cmd_bpe_train(p: dict, out_dir: str, parallel: bool):
    if bool(p["corpus"]) == bool(p["text"]):
        raise ValueError("exactly one of 'corpus' or 'text' must be given")
    if p["corpus"]:
        with open(p["corpus"], "rb") as fh:
            payload = fh.read()
    else:
        payload = p["text"].encode("utf-8")
    vocab = bpe.train(payload, p["target-size"])
    bpe.save_vocab(os.path.join(out_dir, "vocab.jsonl"), vocab)
    results = {
        "vocab_size": vocab.size,
        "merges": len(vocab.merges),
        "exhausted": vocab.exhausted,
        "corpus_sha256": hashlib.sha256(payload).hexdigest(),
        "ok": True,
    }
    return ["vocab.jsonl"], results


def _load_vocab_param(p: dict) -> bpe.Vocabulary:
    if not p["vocab-file"]:
        raise ValueError("parameter 'vocab-file' is required")
    return bpe.load_vocab(p["vocab-file"])


def _cmd_bpe_encode(p: dict, out_dir: str, parallel: bool):
    vocab = _load_vocab_param(p)
    if bool(p["text"]) == bool(p["infile"]):
        raise ValueError("exactly one of 'text' or 'infile' must be given")
    text = p["text"]
    if p["infile"]:
        with open(p["infile"], encoding="utf-8") as fh:
            text = fh.read()
    ids = bpe.encode(vocab, text)
    _write_json(os.path.join(out_dir, "ids.json"), {"ids": ids})
    n_bytes = len(text.encode("utf-8"))
    results = {
        "tokens": len(ids),
        "bytes": n_bytes,
        "bytes_per_token": (n_bytes / len(ids)) if ids else 0.0,
        "ok": True,
    }
    return ["ids.json"], results


def _cmd_bpe_decode(p: dict, out_dir: str, parallel: bool):
    vocab = _load_vocab_param(p)
    ids = p["ids"]
    if p["infile"]:
        with open(p["infile"]) as fh:
            ids = [int(x) for x in json.load(fh)["ids"]]
    if not ids:
        raise ValueError("no token ids given (use 'ids' or 'infile')")
    text, valid = bpe.decode_ex(vocab, ids)
    with open(os.path.join(out_dir, "text.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    results = {"tokens": len(ids), "valid_utf8": valid, "ok": True}
    return ["text.txt"], results


# ---------------------------------------------------------------------------
# capacity


def _capacity_trial(index: int, seed: int, epsilon: float, dims: tuple,
                    max_attempts: int, max_accept: int, measure_n: int):
    rng = _child_rng(seed, index)
    curve = capacity.capacity_curve(
        rng, epsilon, list(dims),
        max_attempts=max_attempts, max_accept=max_accept,
    )
    packing = None
    if measure_n >= 2:
        report = capacity.measure_packing(rng, measure_n, dims[-1], epsilon)
        packing = (
            report.max_abs_dot, report.violating_pairs, report.fraction_violating,
            capacity.gaussian_tail_violation_estimate(epsilon, dims[-1]),
        )
    return index, curve, packing


def _cmd_capacity(p: dict, out_dir: str, parallel: bool):
    dims = p["dims"]
    rows = _run_trials(
        _capacity_trial,
        (p["seed"], p["epsilon"], tuple(dims),
         p["max-attempts"], p["max-accept"], p["measure-n"]),
        p["trials"], parallel,
    )
    csv_rows = []
    pooled = []
    slopes = []
    outputs = ["capacity.csv"]
    for index, curve, _ in rows:
        slopes.append(curve.fitted_slope)
        for (d, achieved), raw in zip(curve.points, curve.greedy_counts):
            pooled.append((d, achieved))
            csv_rows.append((
                index, d, _fmt(p["epsilon"]), raw, achieved,
                p["max-attempts"], p["max-accept"],
            ))
    _csv_writerows(
        os.path.join(out_dir, "capacity.csv"),
        ["trial", "d", "epsilon", "greedy_count", "achieved_n",
         "max_attempts", "max_accept"],
        csv_rows,
    )
    slope, _, r2 = capacity.fit_log_linear(pooled)
    results = {
        "fitted_slope": slope,
        "r_squared": r2,
        "per_trial_slopes": slopes,
        "ok": slope > 0.0,
    }
    if p["measure-n"] >= 2:
        packing_rows = [
            (index, p["measure-n"], dims[-1], _fmt(p["epsilon"]),
             _fmt(pk[0]), pk[1], _fmt(pk[2]), _fmt(pk[3]))
            for index, _, pk in rows if pk is not None
        ]
        _csv_writerows(
            os.path.join(out_dir, "packing.csv"),
            ["trial", "n", "d", "epsilon", "max_abs_dot",
             "violating_pairs", "fraction_violating", "gaussian_tail_estimate"],
            packing_rows,
        )
        outputs.append("packing.csv")
    return outputs, results


# ---------------------------------------------------------------------------
# contexts


def _cmd_contexts(p: dict, out_dir: str, parallel: bool):
    eigs_a = p["eigs-a"]
    eigs_b = p["eigs-b"]
    if len(eigs_a) != 3 or len(eigs_b) != 3:
        raise ValueError("'eigs-a' and 'eigs-b' must each list three values")
    graph = contexts.ef_pair()
    e_basis, f_basis = graph.bases
    a1 = contexts.make_observable(e_basis, eigs_a)
    a2 = contexts.make_observable(f_basis, eigs_b)
    comm = contexts.commutator_norm(a1, a2)
    a1_deg = contexts.make_observable(e_basis, [eigs_a[0], eigs_a[0], eigs_a[2]])
    a2_deg = contexts.make_observable(f_basis, [eigs_b[0], eigs_b[0], eigs_b[2]])
    comm_deg = contexts.commutator_norm(a1_deg, a2_deg)

    numkit.save_matrix_csv(os.path.join(out_dir, "observable_a.csv"), a1.matrix)
    numkit.save_matrix_csv(os.path.join(out_dir, "observable_b.csv"), a2.matrix)

    born_rows = []
    for label, state in (("e1", [1.0, 0.0, 0.0]),
                         ("e2", [0.0, 1.0, 0.0]),
                         ("e3", [0.0, 0.0, 1.0])):
        for basis in (e_basis, f_basis):
            probs = contexts.born_probabilities(np.array(state), basis)
            born_rows.append((label, basis.label, *[_fmt(x) for x in probs]))
    _csv_writerows(
        os.path.join(out_dir, "born_table.csv"),
        ["state", "basis", "p1", "p2", "p3"],
        born_rows,
    )

    bank = contexts.bank_graph()
    contexts.save_graph(os.path.join(out_dir, "bank_graph.json"), bank)
    report = contexts.intertwine_check(bank)
    ef_report = contexts.intertwine_check(graph)
    results = {
        "commutator_norm": comm,
        "degenerate_commutator_norm": comm_deg,
        "ef_shared_count": ef_report.shared_count,
        "bank_shared_count": report.shared_count,
        "bank_max_multiplicity": report.max_multiplicity,
        "ok": bool(report.ok and ef_report.ok and comm_deg <= 1e-12),
    }
    return ["observable_a.csv", "observable_b.csv", "born_table.csv",
            "bank_graph.json"], results


# ---------------------------------------------------------------------------
# uattention


def _demo_pipeline() -> uattention.Pipeline:
    basis = contexts.standard_basis(["w0", "w1", "w2"], label="readout")
    stages = [
        uattention.PlaneRotation(3, 0, 1, math.pi / 6.0),
        uattention.PlaneRotation(3, 1, 2, math.pi / 3.0, phase=0.7),
        uattention.Permutation(3, [2, 0, 1]),
    ]
    return uattention.Pipeline(stages=stages, output_basis=basis)


def _cmd_uattention(p: dict, out_dir: str, parallel: bool):
    samples = p["samples"]
    if samples < 1:
        raise ValueError("parameter 'samples' must be >= 1")
    if p["circuit"]:
        pipeline = uattention.load_pipeline(p["circuit"])
    else:
        pipeline = _demo_pipeline()
    dim = pipeline.output_basis.dim
    token_state = np.zeros(dim, dtype=np.complex128)
    token_state[0] = 1.0
    rng = _child_rng(p["seed"], 0)
    phi = pipeline.evolve(token_state)
    norm_dev = abs(numkit.norm(phi) - 1.0)
    probs = uattention.born_probabilities(phi, pipeline.output_basis)
    outcomes = uattention.sample_outcomes(phi, pipeline.output_basis, rng, samples)
    counts = np.bincount(outcomes, minlength=dim)
    rows = []
    within = True
    for i in range(dim):
        emp = counts[i] / samples
        se = math.sqrt(max(probs[i] * (1.0 - probs[i]), 1e-12) / samples)
        ok_i = abs(emp - probs[i]) <= 3.0 * se + 1.0 / samples
        within = within and ok_i
        rows.append((i, pipeline.output_basis.word_labels[i], int(counts[i]),
                     _fmt(emp), _fmt(probs[i])))
    _csv_writerows(
        os.path.join(out_dir, "histogram.csv"),
        ["outcome", "label", "count", "empirical", "born"],
        rows,
    )
    results = {
        "samples": samples,
        "norm_deviation": norm_dev,
        "within_three_se": bool(within),
        "ok": bool(within and norm_dev <= 1e-12),
    }
    return ["histogram.csv"], results


# ---------------------------------------------------------------------------
# floatlab


def _cmd_floatlab(p: dict, out_dir: str, parallel: bool):
    witness = floatlab.compare_plans(
        floatlab.NONASSOC_WITNESS,
        [
            floatlab.ReductionPlan("sequential"),
            floatlab.ReductionPlan("pairwise_tree"),
            floatlab.ReductionPlan("chunked", chunk_size=2),
            floatlab.ReductionPlan("shuffled", seed=1),
        ],
    )
    floatlab.report_to_csv(os.path.join(out_dir, "witness.csv"), witness)

    if p["style"] == "spread":
        corpus = floatlab.spread_requests(
            p["seed"], p["requests"], p["length"], decades=p["decades"],
        )
    elif p["style"] == "integers":
        corpus = floatlab.integer_requests(p["seed"], p["requests"], p["length"])
    else:
        raise ValueError("parameter 'style' must be 'spread' or 'integers'")

    batch = floatlab.batch_simulation(corpus, p["batch-sizes"])
    floatlab.report_to_csv(os.path.join(out_dir, "batch.csv"), batch)

    det_rows = []
    det_identical = True
    for ri, req in enumerate(corpus):
        vals = [
            ("batch=" + str(b),
             floatlab.deterministic_mode_reduce(req, p["fixed-chunk"]))
            for b in p["batch-sizes"]
        ]
        bits = {floatlab.float_bits_hex(v) for _, v in vals}
        det_identical = det_identical and len(bits) == 1
        det_rows.append((ri, _fmt(vals[0][1]),
                         floatlab.float_bits_hex(vals[0][1])))
    _csv_writerows(
        os.path.join(out_dir, "deterministic.csv"),
        ["request", "value", "bits_hex"],
        det_rows,
    )
    expect_batch_variation = p["style"] == "spread"
    results = {
        "witness_bitwise_identical": witness.bitwise_identical,
        "batch_bitwise_identical": batch.bitwise_identical,
        "batch_max_abs_diff": batch.max_abs_diff,
        "deterministic_bitwise_identical": det_identical,
        "lanes": floatlab.LANES,
        "ok": bool(
            (not witness.bitwise_identical)
            and det_identical
            and (batch.bitwise_identical != expect_batch_variation)
        ),
    }
    return ["witness.csv", "batch.csv", "deterministic.csv"], results


# ---------------------------------------------------------------------------
# driver

_RUNNERS = {
    "gradcheck": _cmd_gradcheck,
    "attention-demo": _cmd_attention_demo,
    "generate": _cmd_generate,
    "bpe-train": _cmd_bpe_train,
    "bpe-encode": _cmd_bpe_encode,
    "bpe-decode": _cmd_bpe_decode,
    "capacity": _cmd_capacity,
    "contexts": _cmd_contexts,
    "uattention": _cmd_uattention,
    "floatlab": _cmd_floatlab,
}

_TRIAL_COMMANDS = {"gradcheck", "capacity"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmlab",
        description="seeded experiments on the math inside language models",
    )
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    for command in sorted(_RUNNERS):
        spec = _spec_for(command)
        sp = sub.add_parser(command, help=f"run the {command} experiment")
        sp.add_argument("--config", default=None,
                        help="JSON file with parameter values")
        sp.add_argument("--parallel", action="store_true", default=False,
                        help="run --trials in worker processes")
        for name, (_kind, default, help_text) in sorted(spec.items()):
            sp.add_argument(f"--{name}", default=None, metavar="V",
                            help=f"{help_text} (default: {default})")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        params, sources = _resolve(args.command, args)
        if params["trials"] < 1:
            raise ValueError("parameter 'trials' must be >= 1")
        if params["trials"] > 1 and args.command not in _TRIAL_COMMANDS:
            raise ValueError(
                f"subcommand {args.command} does not support --trials > 1"
            )
        out_dir = params["out"]
        os.makedirs(out_dir, exist_ok=True)
        runner = _RUNNERS[args.command]
        outputs, results = runner(params, out_dir, args.parallel)
        return _finish(out_dir, args.command, params, sources, outputs, results)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
