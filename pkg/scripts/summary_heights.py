"""Heights of summaries and iterated summaries for growing words over a flow closure."""
import argparse
import random
from dataclasses import dataclass

from seqflow.flow_algebra import generate_closure, sharp
from seqflow.instance import load_instance
from seqflow.mm_algebra import product
from seqflow.semigroup import FiniteSemigroup, build_sharp_summary, build_summary, regular_j_length


@dataclass
class Config:
    instance: str = "tests/fixtures/intro.json"
    lengths: tuple = (4, 16, 64, 256, 1024)
    samples: int = 20
    seed: int = 0


def run(cfg: Config):
    inst = load_instance(cfg.instance)
    F = generate_closure(inst.generators())
    S = FiniteSemigroup(F.elements, product)
    sh = lambda i: S.index[sharp(S.elements[i])] if S.is_idempotent(i) else i
    gens = [S.index[x] for x in inst.generators().values()]
    rng = random.Random(cfg.seed)
    print(f"|S| = {len(S)}, regular J-length = {regular_j_length(S)}")
    print(f"{'length':>7} {'max height':>11} {'max iter height':>16} {'max iter/branch':>16}")
    for n in cfg.lengths:
        h = hs = u = 0
        for _ in range(cfg.samples):
            word = [rng.choice(gens) for _ in range(n)]
            h = max(h, build_summary(S, word).height)
            t = build_sharp_summary(S, word, sh)
            hs = max(hs, t.height)
            u = max(u, t.max_unstable_per_branch())
        print(f"{n:>7} {h:>11} {hs:>16} {u:>16}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instance", default=Config.instance)
    ap.add_argument("--samples", type=int, default=Config.samples)
    ap.add_argument("--seed", type=int, default=Config.seed)
    args = ap.parse_args()
    run(Config(instance=args.instance, samples=args.samples, seed=args.seed))


if __name__ == "__main__":
    main()
