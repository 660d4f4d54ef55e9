"""Run every corpus query on its program and on the realizability transform and compare."""
import argparse
import time

from hornlp.experiments import CORPUS_SEED, CORPUS_SIZE, random_corpus, realizability_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=CORPUS_SIZE)
    ap.add_argument("--seed", type=int, default=CORPUS_SEED)
    ap.add_argument("--nodes", type=int, default=2000, help="search nodes per query")
    args = ap.parse_args()

    t0 = time.time()
    failures, depths = 0, []
    for i, (p, q) in enumerate(random_corpus(args.n, args.seed)):
        r = realizability_check(p, q, nodes=args.nodes)
        depths.append(r.depth)
        if not r.ok:
            failures += 1
            print(f"{i}: {r}")
    shallow = sum(d < 200 for d in depths)
    print(f"{len(depths)} programs, {failures} failures, {shallow} compared below depth 200 "
          f"(min {min(depths)}), {time.time() - t0:.1f}s")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
