"""Expected real zeros of random binary forms, against the closed form.

Samples Kostlan forms at a few degrees, counts projective zeros, and
prints the empirical means next to sqrt(d).  Then does the same for the
union of a quartic and a cubic, where the prediction is sqrt(4)+sqrt(9).
"""

import math

from arrangelab.sampling import RngState, binary_form, mix_seed, sample_kostlan
from arrangelab.varieties import arrangement_zeros_detail, ekss_leading_term

TRIALS = 5000


def mean_zero_count(degrees, seed):
    total = 0
    kept = 0
    for i in range(TRIALS):
        rng = RngState(mix_seed(seed, i))
        forms = [binary_form(sample_kostlan(rng, 1, d)) for d in degrees]
        zeros, flagged = arrangement_zeros_detail(forms)
        if flagged:
            continue
        total += zeros
        kept += 1
    return total / kept, kept


if __name__ == "__main__":
    print(f"{TRIALS} trials per row")
    print("degrees      mean    predicted")
    for degrees in ([1], [2], [4], [9], [16]):
        mean, kept = mean_zero_count(degrees, seed=degrees[0])
        print(f"{str(degrees):<12} {mean:.3f}   {ekss_leading_term(degrees, 1):.3f}")
    mean, kept = mean_zero_count([4, 9], seed=77)
    print(f"{'[4, 9]':<12} {mean:.3f}   {ekss_leading_term([4, 9], 1):.3f}")
    print()
    print("a single odd-degree form always has a zero; even degrees")
    print(f"sometimes miss the circle entirely, e.g. sqrt(4) = {math.sqrt(4):.0f}")
    print("is an average over trials with 0, 2, or 4 crossings")
