"""Pilot run: rejection power of the dCov test on the linear forms built
from standard normal variables, over a ladder of sample sizes."""

import sys

import numpy as np

from sechlab.sech_core import control_sample
from sechlab.simulate import sample_forms
from sechlab.stats_tests import dcov_test
from sechlab.streams import trial_rng

SEED = 20240601
TRIALS = 20
PERMUTATIONS = 200
ALPHA = 0.05


def power(n):
    rejections = 0
    for trial in range(TRIALS):
        rng = trial_rng(SEED, trial, 0)
        pairs = sample_forms(rng, lambda r, k: control_sample(r, "normal", k).values, n)
        report = dcov_test(pairs, PERMUTATIONS, trial_rng(SEED, trial, 1), alpha=ALPHA)
        rejections += report.reject
    return rejections / TRIALS


if __name__ == "__main__":
    sizes = [int(a) for a in sys.argv[1:]] or [500, 1000, 2000, 4000, 8000]
    for n in sizes:
        print(f"n={n:6d} power={power(n):.2f}", flush=True)
