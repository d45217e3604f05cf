import sys
from pathlib import Path

import numpy as np
import pytest

from dermalab import ingest, synth
from dermalab.cvxeda.model import bateman_discretization


@pytest.fixture(scope="session")
def bateman10():
    return bateman_discretization(2.0, 0.7, 10.0)


def make_pulse_trace(times, amp=0.5, duration_s=120.0, fs=10.0, noise_std=0.0,
                     level=1.0, drift=0.0, seed=0):
    """RawEdaTrace with known pulse times through the synthetic generator."""
    spec = synth.SynthSpec(
        duration_s=duration_s, sample_rate=fs, tonic_level=level,
        tonic_drift=drift, scr_times=tuple(times),
        scr_amplitudes=tuple([amp] * len(times)), noise_std=noise_std, seed=seed,
    )
    return synth.gen_eda(spec)


def write_csv(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def run_cli(args, env=None):
    """Run the command line in a subprocess; returns (exit_code, stdout, stderr)."""
    import os
    import subprocess

    merged = dict(os.environ)
    if env:
        merged.update(env)
    proc = subprocess.run(
        [sys.executable, "-m", "dermalab.cli", *map(str, args)],
        capture_output=True, text=True, env=merged,
    )
    return proc.returncode, proc.stdout, proc.stderr


def dir_digest(path):
    """Stable content digest of a directory tree."""
    import hashlib

    h = hashlib.sha256()
    for p in sorted(Path(path).rglob("*")):
        if p.is_file():
            h.update(p.name.encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def simple_env_trace(duration_s, value=400.0, rate=1.0):
    n = int(duration_s * rate)
    channels = {name: np.full(n, value) for name in ingest.ENV_CHANNELS}
    return ingest.EnvTrace(start_time=0, sample_rate=rate, channels=channels)
