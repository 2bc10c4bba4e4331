"""Random instances: verdict counts, and exact optima checked against brute force."""
import argparse
import random
from collections import Counter
from dataclasses import dataclass

from seqflow.instance import make_instance
from seqflow.mm_algebra import OMEGA
from seqflow.oracle import brute_optimal
from seqflow.quantitative import optimal_value


@dataclass
class Config:
    count: int = 200
    max_n: int = 4
    letters: int = 2
    max_cap: int = 2
    omega_weight: float = 0.2
    zero_weight: float = 0.45
    brute_len: int = 6
    seed: int = 1


def random_instance(rng, cfg: Config):
    n = rng.randint(2, cfg.max_n)
    caps = {}
    for a in "abcdefgh"[:rng.randint(1, cfg.letters)]:
        rows = [[0] * n for _ in range(n)]
        for i in range(n - 1):
            for j in range(1, n):
                r = rng.random()
                if r < cfg.zero_weight:
                    continue
                rows[i][j] = OMEGA if r < cfg.zero_weight + cfg.omega_weight else rng.randint(1, cfg.max_cap)
        caps[a] = rows
    return make_instance(n, caps)


def run(cfg: Config):
    rng = random.Random(cfg.seed)
    stats = Counter()
    values = Counter()
    for _ in range(cfg.count):
        inst = random_instance(rng, cfg)
        res = optimal_value(inst)
        brute = brute_optimal(inst, cfg.brute_len)
        if res.value is OMEGA:
            stats["unbounded"] += 1
            continue
        stats["bounded"] += 1
        values[res.value] += 1
        if brute.best == res.value:
            stats["attained by brute force"] += 1
        elif brute.best < res.value:
            stats["needs longer words"] += 1
        else:
            stats["MISMATCH"] += 1
    for k, v in sorted(stats.items()):
        print(f"{k:<26}{v}")
    print("bounded optima:", dict(sorted(values.items())))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=Config.count)
    ap.add_argument("--max-n", type=int, default=Config.max_n)
    ap.add_argument("--seed", type=int, default=Config.seed)
    args = ap.parse_args()
    run(Config(count=args.count, max_n=args.max_n, seed=args.seed))


if __name__ == "__main__":
    main()
