"""Calibration and power of the scale-tail goodness-of-fit test.

Two experiments: (a) size -- samples drawn from a true power law should be
rejected at close to the nominal rate; (b) power -- lognormal samples of
matched scale should be rejected much more often. Prints rejection rates
with binomial standard errors.
"""

import argparse

import numpy as np

from fcnets.nullmodels import powerlaw_fit, sample_powerlaw


def rejection_rate(draw, runs, bootstrap_reps, alpha):
    rejected = 0
    for r in range(runs):
        x = draw(np.random.default_rng(r))
        fit = powerlaw_fit(x, bootstrap_reps=bootstrap_reps, seed=r)
        rejected += fit.gof_p <= alpha
    rate = rejected / runs
    se = np.sqrt(rate * (1 - rate) / runs)
    return rate, se


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=50)
    ap.add_argument("--size", type=int, default=300)
    ap.add_argument("--alpha-true", type=float, default=2.5)
    ap.add_argument("--bootstrap-reps", type=int, default=99)
    ap.add_argument("--level", type=float, default=0.05)
    args = ap.parse_args()

    rate, se = rejection_rate(
        lambda rng: sample_powerlaw(args.alpha_true, 2, args.size, rng),
        args.runs, args.bootstrap_reps, args.level,
    )
    print(
        f"size (true power law, alpha={args.alpha_true}): "
        f"rejection {rate:.3f} +/- {se:.3f} at nominal {args.level}"
    )

    def lognormal(rng):
        return 2 * np.exp(0.9 * rng.standard_normal(args.size))

    rate, se = rejection_rate(lognormal, args.runs, args.bootstrap_reps, args.level)
    print(f"power (lognormal alternative): rejection {rate:.3f} +/- {se:.3f}")


if __name__ == "__main__":
    main()
