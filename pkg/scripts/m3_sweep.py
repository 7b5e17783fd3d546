"""Run mc sweeps of the bump-sum construction over a grid of (beta, eps) values.

    python3 scripts/m3_sweep.py --alpha 3 --beta 7/2 --beta 4 --eps 1/2 --eps 1/4 --level 4
"""

import argparse
import json
import time

from mcalpha.config import SweepConfig
from mcalpha.exact import parse_rat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=parse_rat, default=parse_rat("3"))
    ap.add_argument("--beta", type=parse_rat, action="append")
    ap.add_argument("--eps", type=parse_rat, action="append")
    ap.add_argument("--depth", type=int, default=8)
    ap.add_argument("--level", type=int, default=4, help="use endpoints of intervals of levels <= LEVEL")
    ap.add_argument("--construction", choices=["m3", "m4"], default="m3")
    ap.add_argument("--sample", type=int, default=None)
    args = ap.parse_args()
    rule = f"{args.construction}-proof-delta"
    for beta in args.beta or [parse_rat("7/2"), parse_rat("4")]:
        for eps in args.eps or [parse_rat("1/2"), parse_rat("1/4")]:
            cfg = SweepConfig(
                args.construction, args.alpha, beta, args.depth, (eps,), args.level, rule, sample=args.sample
            )
            start = time.perf_counter()
            rep = cfg.run()
            summary = {k: v for k, v in rep.to_json().items() if k != "details"}
            record = {"config": json.loads(cfg.to_json()), "report": summary, "seconds": round(time.perf_counter() - start, 2)}
            print(json.dumps(record, sort_keys=True), flush=True)


if __name__ == "__main__":
    main()
