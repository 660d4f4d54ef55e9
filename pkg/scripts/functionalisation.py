"""Check term-matching reduction against rewriting with the functionalised rules."""
import argparse

from hornlp.experiments import functionalisation_check, random_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--bound", type=int, default=200)
    args = ap.parse_args()

    corpus = random_corpus(args.n, args.seed, existential=False, var_rate=0.15)
    bad = empty = 0
    for i, (p, q) in enumerate(corpus):
        r = functionalisation_check(p, q, args.bound)
        empty += r.tm_empty
        if not r.ok:
            bad += 1
            print(f"{i}: {q}  {r}")
    print(f"{len(corpus)} pairs, {empty} reach the empty goal, {bad} mismatches")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
