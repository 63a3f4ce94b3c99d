"""Result files: CSV tables, JSON sidecars and a digest manifest.

Every file is written to a temporary name in the target directory and then
renamed, so an interrupted run never leaves a half-written artifact.
"""

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .. import __version__
from ..spectra import SffEstimate

CSV_COLUMNS = ("t", "tau", "m", "K_mean", "K_stderr", "kappa", "kappa_stderr")
CSV_NAME = "sff.csv"
META_NAME = "sff.json"
SPACINGS_NAME = "spacings.npy"
MANIFEST_NAME = "manifest.json"


def write_atomic(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x):
    # repr gives the shortest string that round-trips
    return repr(float(x))


def estimate_to_csv(est):
    lines = [",".join(CSV_COLUMNS)]
    tau = est.tau
    kap, kse = est.kappa, est.kappa_stderr
    for i, m in enumerate(est.orders):
        for j, t in enumerate(est.times):
            lines.append(",".join([
                str(int(t)), _fmt(tau[j]), str(int(m)),
                _fmt(est.mean[i, j]), _fmt(est.stderr[i, j]),
                _fmt(kap[i, j]), _fmt(kse[i, j]),
            ]))
    return "\n".join(lines) + "\n"


def csv_to_arrays(text):
    rows = [ln.split(",") for ln in text.strip().split("\n")]
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {rows[0]}")
    body = np.array([[float(v) for v in r] for r in rows[1:]])
    orders = tuple(int(m) for m in dict.fromkeys(body[:, 2].astype(int)))
    times = body[body[:, 2] == orders[0], 0].astype(np.int64)
    mean = np.stack([body[body[:, 2] == m, 3] for m in orders])
    stderr = np.stack([body[body[:, 2] == m, 4] for m in orders])
    return times, orders, mean, stderr


def digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(outdir, names):
    outdir = Path(outdir)
    entries = {n: {"sha256": digest(outdir / n), "bytes": (outdir / n).stat().st_size}
               for n in sorted(names)}
    write_atomic(outdir / MANIFEST_NAME, json.dumps({"files": entries}, indent=2, sort_keys=True) + "\n")
    return entries


def save_estimate(est, outdir, wall_time=None, extra=None):
    """Write CSV, JSON sidecar, optional spacings and the manifest."""
    outdir = Path(outdir)
    names = [CSV_NAME, META_NAME]
    write_atomic(outdir / CSV_NAME, estimate_to_csv(est))
    meta = {
        "spec": est.spec,
        "N": est.N,
        "L": est.L,
        "realizations": est.realizations,
        "orders": list(est.orders),
        "version": __version__,
        "wall_time_s": wall_time,
    }
    if extra:
        meta.update(extra)
    write_atomic(outdir / META_NAME, json.dumps(meta, indent=2, sort_keys=True) + "\n")
    if est.spacings is not None:
        import io as _io

        buf = _io.BytesIO()
        np.save(buf, est.spacings)
        write_atomic(outdir / SPACINGS_NAME, buf.getvalue())
        names.append(SPACINGS_NAME)
    write_manifest(outdir, names)
    return outdir


def load_estimate(outdir):
    outdir = Path(outdir)
    try:
        meta = json.loads((outdir / META_NAME).read_text())
        text = (outdir / CSV_NAME).read_text()
    except OSError as exc:
        raise OSError(f"cannot read results in {outdir}: {exc}") from exc
    times, orders, mean, stderr = csv_to_arrays(text)
    sp = outdir / SPACINGS_NAME
    return SffEstimate(
        times=times, orders=orders, mean=mean, stderr=stderr,
        N=int(meta["N"]), L=int(meta["L"]), realizations=int(meta["realizations"]),
        spacings=np.load(sp) if sp.exists() else None, spec=meta.get("spec", {}),
    )


def theory_curves_to_csv(curves):
    """Long-format table ``x,value,tag`` of one or more theory curves."""
    xname = curves[0].xname if curves else "t"
    lines = [f"{xname},value,tag"]
    for c in curves:
        for x, v in zip(c.x, c.values):
            lines.append(f"{_fmt(x)},{_fmt(v)},{c.tag}")
    return "\n".join(lines) + "\n"


def write_dat(path, columns, header):
    """Whitespace-separated columns with a ``#`` header line."""
    arr = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    lines = ["# " + " ".join(header)]
    lines += [" ".join(_fmt(v) for v in row) for row in arr]
    return write_atomic(path, "\n".join(lines) + "\n")
