"""Solve every fixture instance and print verdicts, optima and witnesses."""
import argparse
import pathlib
import time

from seqflow.instance import load_instance
from seqflow.mm_algebra import OMEGA
from seqflow.quantitative import optimal_value

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

CASES = [
    ("fig1.json", ["c"]), ("fig1.json", ["d"]), ("fig1.json", ["e"]),
    ("fig1.json", ["c", "d"]), ("fig1.json", ["c", "e"]),
    ("intro.json", None), ("nested.json", None),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mode", choices=["bfs", "dichotomic"], default="bfs")
    args = ap.parse_args()
    print(f"{'instance':<14}{'letters':<10}{'value':>7}  {'time':>7}  witness / word")
    for name, letters in CASES:
        inst = load_instance(FIXTURES / name)
        if letters:
            inst = inst.restrict(letters)
        t0 = time.perf_counter()
        res = optimal_value(inst, mode=args.mode)
        dt = time.perf_counter() - t0
        if res.value is OMEGA:
            value, extra = "omega", res.verdict.witness.serialize()
        else:
            value, extra = str(res.value), "".join(res.word or ())
        print(f"{name:<14}{','.join(inst.letters):<10}{value:>7}  {dt:6.3f}s  {extra}")


if __name__ == "__main__":
    main()
