"""Versioned text format for trained models.

Trees and forests serialize to nested s-expression records. Floats are
written with ``repr`` so every value round-trips to the identical
double; loading a saved model therefore reproduces forecasts exactly.
"""

from __future__ import annotations

import numpy as np

from .data import CovariateSpec
from .errors import DataError
from .forest import ForestConfig, ForestMember, SetarForest
from .linalg import LinearFit
from .split import SplitDecision
from .stopping import StoppingConfig
from .tree import Internal, Leaf, LeafModel, SetarTree, TrainingSummary

FORMAT_VERSION = 1


# --- writing ---------------------------------------------------------------


def _atom(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return repr(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"cannot serialize atom {value!r}")


def _node_sexp(node, indent: int) -> str:
    pad = "  " * indent
    if isinstance(node, Leaf):
        fit = node.model.fit
        beta = " ".join(repr(float(b)) for b in fit.beta)
        return (
            f"{pad}(leaf (rows {node.model.n_train_rows}) "
            f"(sse {repr(fit.sse)}) (beta {beta}))"
        )
    d = node.decision
    return (
        f"{pad}(split (column {d.column_index}) (threshold {repr(d.threshold)})\n"
        f"{pad}  (left-sse {repr(d.left_sse)}) (right-sse {repr(d.right_sse)})\n"
        f"{pad}  (left-count {d.left_count}) (right-count {d.right_count})\n"
        f"{_node_sexp(node.left, indent + 1)}\n"
        f"{_node_sexp(node.right, indent + 1)})"
    )


def _stopping_sexp(config: StoppingConfig) -> str:
    return (
        f"(stopping (criterion {_atom(config.criterion)}) "
        f"(alpha0 {repr(config.alpha0)}) "
        f"(divider {repr(config.significance_divider)}) "
        f"(error-threshold {repr(config.error_threshold)}) "
        f"(max-depth {config.max_depth}))"
    )


def _covariates_sexp(specs, indent: int) -> str:
    pad = "  " * indent
    lines = [f"{pad}(covariates"]
    for spec in specs:
        if spec.kind == "numeric":
            lines.append(f"{pad}  (covariate {_atom(spec.name)} numeric)")
        else:
            cats = " ".join(_atom(c) for c in spec.categories)
            lines.append(
                f"{pad}  (covariate {_atom(spec.name)} categorical ({cats}))"
            )
    return "\n".join(lines) + ")"


def tree_to_text(tree: SetarTree) -> str:
    columns = " ".join(_atom(c) for c in tree.column_names)
    rows_per_leaf = " ".join(str(r) for r in tree.training_summary.rows_per_leaf)
    parts = [
        "(setar-tree",
        f"  (version {FORMAT_VERSION})",
        f"  (lags {tree.n_lags})",
        f"  (grid-size {tree.grid_size})",
        f"  (columns {columns})",
        _covariates_sexp(tree.covariate_specs, 1),
        "  " + _stopping_sexp(tree.config),
        f"  (summary (depth {tree.training_summary.depth}) "
        f"(leaves {tree.training_summary.n_leaves}) "
        f"(rows {tree.training_summary.n_rows}) "
        f"(rows-per-leaf {rows_per_leaf}))",
        "  (root",
        _node_sexp(tree.root, 2) + "))",
    ]
    return "\n".join(parts) + "\n"


def forest_to_text(forest: SetarForest) -> str:
    cfg = forest.config
    columns = " ".join(_atom(c) for c in forest.column_names)
    parts = [
        "(setar-forest",
        f"  (version {FORMAT_VERSION})",
        f"  (lags {forest.n_lags})",
        f"  (columns {columns})",
        _covariates_sexp(forest.covariate_specs, 1),
        "  (config"
        f" (trees {cfg.n_trees})"
        f" (bagging-fraction {repr(cfg.bagging_fraction)})"
        f" (feature-fraction {repr(cfg.feature_fraction)})"
        f" (seed {cfg.seed})"
        f" (randomize {_atom(cfg.randomization)})"
        f" (alpha0-range {repr(cfg.alpha0_range[0])} {repr(cfg.alpha0_range[1])})"
        f" (divider-range {repr(cfg.divider_range[0])} {repr(cfg.divider_range[1])})"
        f" (error-threshold-range {repr(cfg.error_threshold_range[0])}"
        f" {repr(cfg.error_threshold_range[1])})"
        f" (grid-size {cfg.grid_size})"
        f" (stepwise-averaging {_atom(cfg.stepwise_averaging)})\n"
        "    " + _stopping_sexp(cfg.base) + ")",
    ]
    for i, member in enumerate(forest.members):
        features = " ".join(str(int(f)) for f in member.feature_sample)
        rows = " ".join(str(int(r)) for r in member.row_sample)
        parts.append(f"  (member (index {i})")
        parts.append(f"    (features {features})")
        parts.append(f"    (rows {rows})")
        parts.append("    " + _stopping_sexp(member.stopping))
        member_tree = tree_to_text(member.tree).rstrip("\n")
        indented = "\n".join("    " + line for line in member_tree.split("\n"))
        parts.append(indented + ")")
    return "\n".join(parts) + ")\n"


# --- parsing ---------------------------------------------------------------


def _tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            yield ch
            i += 1
        elif ch == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\":
                    j += 1
                out.append(text[j])
                j += 1
            if j >= n:
                raise DataError("model file: unterminated string")
            yield ("str", "".join(out))
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield ("atom", text[i:j])
            i = j


def _parse_atom(token: str):
    if token == "true":
        return True
    if token == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token  # bare symbol (record head)


def parse_sexp(text: str):
    stack = [[]]
    for token in _tokenize(text):
        if token == "(":
            stack.append([])
        elif token == ")":
            if len(stack) < 2:
                raise DataError("model file: unbalanced parentheses")
            done = stack.pop()
            stack[-1].append(done)
        elif token[0] == "str":
            stack[-1].append(token[1])
        else:
            stack[-1].append(_parse_atom(token[1]))
    if len(stack) != 1 or len(stack[0]) != 1:
        raise DataError("model file: expected exactly one top-level record")
    return stack[0][0]


def _fields(record):
    """Map sub-record heads to their tail lists."""
    out = {}
    for item in record[1:]:
        if isinstance(item, list) and item and isinstance(item[0], str):
            out.setdefault(item[0], []).append(item[1:])
    return out


def _one(fields, name):
    if name not in fields or len(fields[name]) != 1:
        raise DataError(f"model file: expected exactly one ({name} ...) record")
    return fields[name][0]


def _parse_stopping(tail) -> StoppingConfig:
    f = _fields(["stopping"] + tail)
    return StoppingConfig(
        criterion=_one(f, "criterion")[0],
        alpha0=float(_one(f, "alpha0")[0]),
        significance_divider=float(_one(f, "divider")[0]),
        error_threshold=float(_one(f, "error-threshold")[0]),
        max_depth=int(_one(f, "max-depth")[0]),
    )


def _parse_covariates(tails) -> tuple:
    specs = []
    for tail in tails:
        for item in tail:
            name, kind = item[1], item[2]
            if kind == "numeric":
                specs.append(CovariateSpec(name=name, kind="numeric"))
            else:
                cats = tuple(item[3])
                specs.append(
                    CovariateSpec(name=name, kind="categorical", categories=cats)
                )
    return tuple(specs)


def _parse_node(record):
    head = record[0]
    f = _fields(record)
    if head == "leaf":
        beta = np.array([float(b) for b in _one(f, "beta")], dtype=np.float64)
        rows = int(_one(f, "rows")[0])
        fit = LinearFit(
            beta=beta, sse=float(_one(f, "sse")[0]), n_obs=rows, n_params=beta.shape[0]
        )
        return Leaf(model=LeafModel(fit=fit, n_train_rows=rows))
    if head != "split":
        raise DataError(f"model file: unknown node kind {head!r}")
    children = [item for item in record[1:]
                if isinstance(item, list) and item[0] in ("leaf", "split")]
    if len(children) != 2:
        raise DataError("model file: split node needs exactly two children")
    left_sse = float(_one(f, "left-sse")[0])
    right_sse = float(_one(f, "right-sse")[0])
    decision = SplitDecision(
        column_index=int(_one(f, "column")[0]),
        threshold=float(_one(f, "threshold")[0]),
        left_sse=left_sse,
        right_sse=right_sse,
        total_sse=left_sse + right_sse,
        left_count=int(_one(f, "left-count")[0]),
        right_count=int(_one(f, "right-count")[0]),
    )
    return Internal(
        decision=decision, left=_parse_node(children[0]), right=_parse_node(children[1])
    )


def _tree_from_record(record) -> SetarTree:
    if record[0] != "setar-tree":
        raise DataError(f"not a tree model file (head {record[0]!r})")
    f = _fields(record)
    version = int(_one(f, "version")[0])
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported tree format version {version}")
    summary_f = _fields(["summary"] + _one(f, "summary"))
    rows_per_leaf = tuple(int(r) for r in summary_f.get("rows-per-leaf", [[]])[0])
    root_items = _one(f, "root")
    return SetarTree(
        root=_parse_node(root_items[0]),
        config=_parse_stopping(_one(f, "stopping")),
        n_lags=int(_one(f, "lags")[0]),
        column_names=tuple(_one(f, "columns")),
        covariate_specs=_parse_covariates(f.get("covariates", [])),
        grid_size=int(_one(f, "grid-size")[0]),
        training_summary=TrainingSummary(
            depth=int(_one(summary_f, "depth")[0]),
            n_leaves=int(_one(summary_f, "leaves")[0]),
            rows_per_leaf=rows_per_leaf,
            n_rows=int(_one(summary_f, "rows")[0]),
        ),
    )


def tree_from_text(text: str) -> SetarTree:
    return _tree_from_record(parse_sexp(text))


def forest_from_text(text: str) -> SetarForest:
    record = parse_sexp(text)
    if record[0] != "setar-forest":
        raise DataError(f"not a forest model file (head {record[0]!r})")
    f = _fields(record)
    version = int(_one(f, "version")[0])
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported forest format version {version}")
    cfg_f = _fields(["config"] + _one(f, "config"))
    config = ForestConfig(
        n_trees=int(_one(cfg_f, "trees")[0]),
        bagging_fraction=float(_one(cfg_f, "bagging-fraction")[0]),
        feature_fraction=float(_one(cfg_f, "feature-fraction")[0]),
        seed=int(_one(cfg_f, "seed")[0]),
        randomization=_one(cfg_f, "randomize")[0],
        alpha0_range=tuple(float(v) for v in _one(cfg_f, "alpha0-range")),
        divider_range=tuple(float(v) for v in _one(cfg_f, "divider-range")),
        error_threshold_range=tuple(
            float(v) for v in _one(cfg_f, "error-threshold-range")
        ),
        base=_parse_stopping(_one(cfg_f, "stopping")),
        grid_size=int(_one(cfg_f, "grid-size")[0]),
        stepwise_averaging=bool(_one(cfg_f, "stepwise-averaging")[0]),
    )
    members = []
    for tail in f.get("member", []):
        mf = _fields(["member"] + tail)
        tree_record = next(
            item for item in tail if isinstance(item, list) and item[0] == "setar-tree"
        )
        index = int(_one(mf, "index")[0])
        members.append(
            (
                index,
                ForestMember(
                    tree=_tree_from_record(tree_record),
                    row_sample=np.array(
                        [int(r) for r in mf.get("rows", [[]])[0]], dtype=np.int64
                    ),
                    feature_sample=np.array(
                        [int(c) for c in mf.get("features", [[]])[0]], dtype=np.int64
                    ),
                    stopping=_parse_stopping(_one(mf, "stopping")),
                ),
            )
        )
    members.sort(key=lambda pair: pair[0])
    members = [m for _, m in members]
    return SetarForest(
        members=tuple(members),
        config=config,
        n_lags=int(_one(f, "lags")[0]),
        column_names=tuple(_one(f, "columns")),
        covariate_specs=_parse_covariates(f.get("covariates", [])),
    )


def save_model(model, path: str) -> None:
    from .io import atomic_write

    if isinstance(model, SetarTree):
        atomic_write(path, tree_to_text(model))
    elif isinstance(model, SetarForest):
        atomic_write(path, forest_to_text(model))
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")


def load_model(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    record = parse_sexp(text)
    if record[0] == "setar-tree":
        return _tree_from_record(record)
    if record[0] == "setar-forest":
        return forest_from_text(text)
    raise DataError(f"unknown model file head {record[0]!r}")
