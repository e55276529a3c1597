"""Write a seeded CT-RNN weight file: dx/dt = -x/tau + W tanh(x) + b."""

import argparse

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--seed", type=int, default=2021)
    ap.add_argument("--gain", type=float, default=0.6, help="scale of the recurrent weights")
    ap.add_argument("--tau-min", type=float, default=0.05)
    ap.add_argument("--tau-max", type=float, default=2.0)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    n = args.dim
    # Spread time constants so the flow contracts at different rates per direction.
    tau = np.geomspace(args.tau_min, args.tau_max, n)
    w = rng.normal(0.0, args.gain / np.sqrt(n), size=(n, n))
    b = rng.normal(0.0, 0.2, size=n)

    def row(v):
        return " ".join(f"{x:.17g}" for x in v)

    with open(args.out, "w") as fh:
        fh.write(f"# CT-RNN weights: dim {n}, seed {args.seed}, gain {args.gain}, tau {args.tau_min}..{args.tau_max}\n")
        fh.write(f"dim = {n}\n")
        fh.write(f"tau = {row(tau)}\n")
        fh.write("W = " + row(w[0]) + "\n")
        for r in w[1:]:
            fh.write("    " + row(r) + "\n")
        fh.write(f"b = {row(b)}\n")


if __name__ == "__main__":
    main()
