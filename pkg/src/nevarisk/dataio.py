"""Reading and writing networks and result tables, and synthetic networks.

On disk a network is two CSV tables::

    institutions.csv   id,is_fund,external_assets,external_liabilities
    holdings.csv       holder_id,issuer_id,amount

or one JSON document with the same rows under the keys ``institutions`` and
``holdings``. Floats are written with ``repr`` so a save/load round trip is
exact.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import FinancialNetwork, Institution, NetworkValidationError, validate

INSTITUTION_COLUMNS = ("id", "is_fund", "external_assets", "external_liabilities")
HOLDING_COLUMNS = ("holder_id", "issuer_id", "amount")
RESULT_COLUMNS = (
    "shock", "param_name", "param_value", "direct_defaults", "indirect_defaults",
    "total_defaults", "converged", "iterations", "final_delta_r", "total_final_equity",
)

_TRUE = {"true", "1", "yes", "y", "t"}
_FALSE = {"false", "0", "no", "n", "f", ""}


class NetworkFormatError(ValueError):
    """A network file could not be parsed."""

    def __init__(self, message, source=None, line=None, column=None):
        self.source, self.line, self.column = source, line, column
        where = ""
        if source is not None:
            where += f"{source}"
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}" if where else message)


def _bool(text, ctx):
    key = str(text).strip().lower()
    if key in _TRUE:
        return True
    if key in _FALSE:
        return False
    raise NetworkFormatError(f"expected a boolean, got {text!r}", *ctx)


def _number(text, ctx):
    if isinstance(text, bool):
        raise NetworkFormatError(f"expected a number, got {text!r}", *ctx)
    try:
        return float(text)
    except (TypeError, ValueError):
        raise NetworkFormatError(f"expected a number, got {text!r}", *ctx) from None


def _read_csv(path, columns):
    """Rows of a CSV file as (line number, {column: (text, column number)})."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise NetworkFormatError(f"cannot read file: {exc.strerror}", str(path)) from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise NetworkFormatError("empty file, header required", str(path), 1) from None
    header = [h.strip() for h in header]
    missing = [c for c in columns if c not in header]
    if missing:
        raise NetworkFormatError(
            f"missing column(s) {', '.join(missing)}; header is {','.join(header)}",
            str(path), 1,
        )
    pos = {c: header.index(c) for c in columns}
    rows = []
    for rec in reader:
        line = reader.line_num
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != len(header):
            raise NetworkFormatError(
                f"expected {len(header)} fields, found {len(rec)}", str(path), line
            )
        rows.append((line, {c: (rec[pos[c]].strip(), pos[c] + 1) for c in columns}))
    return rows


def _build(inst_rows, hold_rows, inst_src, hold_src) -> FinancialNetwork:
    """Assemble a network from parsed rows, collecting every violation."""
    problems = []
    ids, funds, ext_a, ext_l = [], [], [], []
    for line, row in inst_rows:
        ctx = lambda c: (inst_src, line, row[c][1])  # noqa: E731
        ids.append(str(row["id"][0]).strip())
        funds.append(_bool(row["is_fund"][0], ctx("is_fund")))
        ext_a.append(_number(row["external_assets"][0], ctx("external_assets")))
        ext_l.append(_number(row["external_liabilities"][0], ctx("external_liabilities")))
    index = {}
    for k, i in enumerate(ids):
        if not i:
            problems.append(f"{inst_src}: empty institution id (row {k + 1})")
        elif i in index:
            problems.append(f"{inst_src}: duplicate institution id {i!r}")
        else:
            index[i] = k

    n = len(ids)
    matrix = np.zeros((n, n))
    seen = {}
    for line, row in hold_rows:
        holder, issuer = str(row["holder_id"][0]).strip(), str(row["issuer_id"][0]).strip()
        amount = _number(row["amount"][0], (hold_src, line, row["amount"][1]))
        where = f"{hold_src} line {line}" if line is not None else f"{hold_src} row"
        if holder == issuer:
            problems.append(f"self-holding {holder} -> {issuer} (amount {amount!r}) at {where}")
            continue
        unknown = [x for x in (holder, issuer) if x not in index]
        if unknown:
            problems.append(f"unknown institution id(s) {', '.join(map(repr, unknown))} at {where}")
            continue
        if (holder, issuer) in seen:
            problems.append(
                f"duplicate holding {holder} -> {issuer} at {where} "
                f"(first at line {seen[(holder, issuer)]})"
            )
            continue
        seen[(holder, issuer)] = line
        if amount < 0:
            problems.append(f"negative holding {holder} -> {issuer} = {amount!r} at {where}")
            continue
        matrix[index[holder], index[issuer]] = amount

    net = FinancialNetwork(
        tuple(Institution(i, f) for i, f in zip(ids, funds)), matrix, ext_a, ext_l
    )
    problems += [p for p in validate(net) if not p.startswith("duplicate institution ids")]
    if problems:
        raise NetworkValidationError(problems)
    return net


def load_network_csv(institutions_path, holdings_path=None) -> FinancialNetwork:
    institutions_path = Path(institutions_path)
    if holdings_path is None:
        holdings_path = institutions_path.with_name("holdings.csv")
    holdings_path = Path(holdings_path)
    inst = _read_csv(institutions_path, INSTITUTION_COLUMNS)
    hold = _read_csv(holdings_path, HOLDING_COLUMNS) if holdings_path.exists() else []
    return _build(inst, hold, str(institutions_path), str(holdings_path))


def _rows_from_json(items, columns, src, key):
    if not isinstance(items, list):
        raise NetworkFormatError(f"{key!r} must be a list", src)
    rows = []
    for k, item in enumerate(items):
        if not isinstance(item, dict):
            raise NetworkFormatError(f"{key}[{k}] must be an object", src)
        missing = [c for c in columns if c not in item]
        if missing:
            raise NetworkFormatError(f"{key}[{k}] lacks {', '.join(missing)}", src)
        row = {c: (item[c], None) for c in columns}
        rows.append((None, row))
    return rows


def load_network_json(source) -> FinancialNetwork:
    """Load a JSON bundle from a path or a text stream."""
    if hasattr(source, "read"):
        text, src = source.read(), getattr(source, "name", "<stream>")
    else:
        src = str(source)
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise NetworkFormatError(f"cannot read file: {exc.strerror}", src) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(exc.msg, src, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict) or "institutions" not in doc:
        raise NetworkFormatError("expected an object with key 'institutions'", src)
    inst = _rows_from_json(doc["institutions"], INSTITUTION_COLUMNS, src, "institutions")
    hold = _rows_from_json(doc.get("holdings", []), HOLDING_COLUMNS, src, "holdings")
    return _build(inst, hold, src, src)


def load_network(source) -> FinancialNetwork:
    """Load a network from a directory of CSVs, an institutions CSV, a JSON
    bundle, or a JSON text stream."""
    if hasattr(source, "read"):
        return load_network_json(source)
    path = Path(source)
    if path.is_dir():
        return load_network_csv(path / "institutions.csv", path / "holdings.csv")
    if path.suffix.lower() == ".json":
        return load_network_json(path)
    if not path.exists():
        raise NetworkFormatError("no such file or directory", str(path))
    return load_network_csv(path)


def network_to_dict(network: FinancialNetwork) -> dict:
    ids = network.ids
    A = network.internal_assets
    return {
        "institutions": [
            {"id": inst.id, "is_fund": inst.is_fund,
             "external_assets": float(a), "external_liabilities": float(l)}
            for inst, a, l in zip(network.institutions, network.external_assets,
                                  network.external_liabilities)
        ],
        "holdings": [
            {"holder_id": ids[i], "issuer_id": ids[j], "amount": float(A[i, j])}
            for i, j in zip(*np.nonzero(A))
        ],
    }


def _write_atomic(path: Path, text: str):
    # Write then rename so a failure never leaves a half-written file.
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8", newline="")
        os.replace(tmp, path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def save_network(network: FinancialNetwork, path) -> Path:
    """Write ``network`` as a JSON bundle (``*.json``) or as
    ``institutions.csv`` and ``holdings.csv`` inside directory ``path``."""
    path = Path(path)
    doc = network_to_dict(network)
    if path.suffix.lower() == ".json":
        _write_atomic(path, json.dumps(doc, indent=2) + "\n")
        return path
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {path}: {exc.strerror}") from exc
    inst = [(r["id"], "true" if r["is_fund"] else "false",
             repr(r["external_assets"]), repr(r["external_liabilities"]))
            for r in doc["institutions"]]
    hold = [(r["holder_id"], r["issuer_id"], repr(r["amount"])) for r in doc["holdings"]]
    _write_atomic(path / "institutions.csv", _csv_text(INSTITUTION_COLUMNS, inst))
    _write_atomic(path / "holdings.csv", _csv_text(HOLDING_COLUMNS, hold))
    return path


def result_rows(table) -> list[tuple]:
    """Flatten sweep rows (or bare scenario results) into CSV records."""
    out = []
    for row in table:
        res = getattr(row, "result", row)
        name = getattr(row, "param_name", "")
        value = getattr(row, "param_value", "")
        out.append((
            repr(float(res.shock)), name, value,
            res.direct_defaults, res.indirect_defaults, res.total_defaults,
            "true" if res.converged else "false", res.iterations_used,
            repr(float(res.final_delta_r)), repr(res.total_final_equity),
        ))
    return out


def results_csv(table) -> str:
    return _csv_text(RESULT_COLUMNS, result_rows(table))


def save_results(table, path) -> Path:
    path = Path(path)
    _write_atomic(path, results_csv(table))
    return path


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a synthetic holdings network.

    ``concentration`` is the fraction of all internal assets held by the
    funds; within banks and within funds, holdings follow
    ``rank ** -exponent``. ``internal_share`` sets total internal assets as
    a fraction of ``scale`` before final normalisation. ``capital_ratio`` and
    ``fund_capital_ratio`` bound the equity-to-assets ratio of banks and of
    funds.
    """

    n: int = 20
    n_funds: int = 5
    exponent: float = 1.0
    concentration: float = 0.75
    scale: float = 1e6
    internal_share: float = 0.05
    capital_ratio: tuple[float, float] = (0.04, 0.12)
    fund_capital_ratio: tuple[float, float] = (0.5, 0.9)
    max_internal_fraction: float = 0.6
    seed: int = 0

    def problems(self) -> list[str]:
        out = []
        if self.n < 2:
            out.append("n must be at least 2 (no self-holdings possible otherwise)")
        if not 1 <= self.n_funds < self.n:
            out.append("n_funds must satisfy 1 <= n_funds < n")
        if not 0 < self.concentration < 1:
            out.append("concentration must lie in (0, 1)")
        if not self.exponent > 0:
            out.append("exponent must be positive")
        if not self.scale > 0:
            out.append("scale must be positive")
        if not 0 < self.internal_share < 1:
            out.append("internal_share must lie in (0, 1)")
        for name in ("capital_ratio", "fund_capital_ratio"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi < 1:
                out.append(f"{name} must satisfy 0 < low <= high < 1")
        if not 0 < self.max_internal_fraction < 1:
            out.append("max_internal_fraction must lie in (0, 1)")
        if not 0 <= int(self.seed) < 2**64:
            out.append("seed must be a 64-bit unsigned integer")
        return out


def _power_law(count, exponent):
    w = np.arange(1, count + 1, dtype=np.float64) ** -exponent
    return w / w.sum()


def generate_synthetic(spec: SyntheticSpec) -> FinancialNetwork:
    """Generate a solvent network with power-law holdings.

    Random draws use numpy's PCG64 bit generator seeded with ``spec.seed``.
    Funds come first (``F01``...), then banks (``B01``...), each group in
    descending order of internal assets.
    """
    problems = spec.problems()
    if problems:
        raise ValueError("invalid synthetic spec: " + "; ".join(problems))
    rng = np.random.Generator(np.random.PCG64(int(spec.seed)))
    n, nf = spec.n, spec.n_funds
    total_internal = spec.internal_share * spec.scale

    held = np.empty(n)
    held[:nf] = spec.concentration * total_internal * _power_law(nf, spec.exponent)
    held[nf:] = (1 - spec.concentration) * total_internal * _power_law(n - nf, spec.exponent)

    # Funds issue little debt compared with banks.
    issuer_w = rng.lognormal(0.0, 0.75, size=n)
    issuer_w[:nf] *= 0.2
    matrix = np.zeros((n, n))
    for i in range(n):
        w = issuer_w.copy()
        w[i] = 0.0
        matrix[i] = held[i] * w / w.sum()
    owed = matrix.sum(axis=0)

    kappa = np.concatenate([
        rng.uniform(*spec.fund_capital_ratio, size=nf),
        rng.uniform(*spec.capital_ratio, size=n - nf),
    ])
    base = spec.scale / n * rng.lognormal(0.0, 0.5, size=n)
    total = np.maximum.reduce([
        base,
        held / spec.max_internal_fraction,
        # Room for internal debt with equity kappa * total left over.
        owed / (1 - kappa) * 1.01,
    ])
    ext_assets = total - held
    equity = kappa * total
    ext_liab = np.maximum(total - equity - owed, 0.0)

    factor = spec.scale / total.sum()
    ids = [f"F{k + 1:02d}" for k in range(nf)] + [f"B{k + 1:02d}" for k in range(n - nf)]
    net = FinancialNetwork.from_arrays(
        matrix * factor, ext_assets * factor, ext_liab * factor,
        ids=ids, is_fund=[k < nf for k in range(n)],
    )
    return net.checked()


def load_synthetic_spec(doc: dict) -> SyntheticSpec:
    """Build a spec from a mapping, rejecting unknown keys."""
    known = set(SyntheticSpec.__dataclass_fields__)
    aliases = {"N": "n", "funds": "n_funds"}
    kw = {}
    for key, val in doc.items():
        key = aliases.get(key, key)
        if key not in known:
            raise ValueError(f"unknown synthetic spec field {key!r}")
        kw[key] = tuple(val) if key.endswith("capital_ratio") else val
    try:
        return SyntheticSpec(**kw)
    except TypeError as exc:
        raise ValueError(str(exc)) from None
