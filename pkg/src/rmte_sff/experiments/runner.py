"""Run an ensemble and persist the estimate."""

import hashlib
import json
import time
from pathlib import Path

from ..spectra import estimate_sff
from .io import META_NAME, load_estimate, save_estimate


def spec_key(spec):
    """Short content hash of a spec, ignoring the output location."""
    d = spec.to_dict()
    d.pop("out", None)
    return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def run(spec, out=None, workers=1, progress=None):
    """Estimate the form factor moments of ``spec`` and write them to
    ``out`` (default ``spec.out``).  Returns ``(estimate, outdir)``."""
    t0 = time.perf_counter()
    est = estimate_sff(spec, workers=workers, progress=progress)
    wall = time.perf_counter() - t0
    outdir = out if out is not None else spec.out
    if outdir is not None:
        save_estimate(est, outdir, wall_time=wall)
    return est, outdir


def run_cached(spec, root, workers=1, progress=None):
    """Like :func:`run` but reuses a previous result for an identical spec
    stored under ``root/<spec hash>``."""
    outdir = Path(root) / spec_key(spec)
    if (outdir / META_NAME).exists():
        try:
            return load_estimate(outdir), outdir
        except (OSError, ValueError, KeyError):
            pass
    return run(spec, outdir, workers, progress)
