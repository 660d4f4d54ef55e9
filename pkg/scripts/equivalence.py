"""Compare unification and structural resolution over the random corpus and the fixtures."""
import argparse
import time

from hornlp import fixture_names, load_fixture
from hornlp.experiments import CORPUS_SEED, CORPUS_SIZE, FIXTURE_QUERIES, equivalence_check, random_corpus
from hornlp.syntax import parse_query
from hornlp.transform import realizability_transform, transform_query


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=CORPUS_SIZE)
    ap.add_argument("--seed", type=int, default=CORPUS_SEED)
    ap.add_argument("--depth", type=int, default=200)
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()

    t0 = time.time()
    cases = [(f"corpus {i}", p, [q], None) for i, (p, q) in enumerate(random_corpus(args.n, args.seed))]
    for name in fixture_names():
        p, goals = load_fixture(name), parse_query(FIXTURE_QUERIES[name])
        cases.append((name, p, goals, 2000))
        cases.append((f"F({name})", realizability_transform(p), [transform_query(a) for a in goals], 2000))

    admitted = exact = bad = 0
    for tag, p, goals, nodes in cases:
        kw = {"nodes": nodes} if nodes else {}
        r = equivalence_check(p, goals, args.depth, **kw)
        if not r.admitted:
            if args.verbose:
                print(f"{tag}: skipped ({r.reason})")
            continue
        admitted += 1
        exact += r.exact
        if not r.ok:
            bad += 1
            print(f"{tag}: COUNTEREXAMPLE {r.detail}")
        elif args.verbose:
            print(f"{tag}: ok at depth {r.depth}, {len(r.unif)} answers")
    print(f"{admitted} admitted of {len(cases)}, {exact} identical answer sets, {bad} counterexamples, "
          f"{time.time() - t0:.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
