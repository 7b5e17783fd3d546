"""Show the staircase's gap oscillations diverging while its increments stay summable.

Prints the least level reaching each target M, and the exact partial sums
of |F(b) - F(a)| over gaps of levels 1..K for a staircase built to depth K.

    python3 scripts/m4_divergence.py --targets 1/2,1,3/2,2 --levels 6
"""

import argparse
import json

from mcalpha.config import DivergenceConfig
from mcalpha.constructions import m4_build
from mcalpha.exact import fmt_rat, parse_rat
from mcalpha.verify import osc_sum


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--targets", default="1/2,1,3/2,2")
    ap.add_argument("--levels", type=int, default=6)
    ap.add_argument("--cap", type=int, default=4096)
    args = ap.parse_args()
    cfg = DivergenceConfig(targets=tuple(parse_rat(t) for t in args.targets.split(",")), cap=args.cap)
    for M, K in cfg.run():
        print(json.dumps({"target": fmt_rat(M), "level": K}, sort_keys=True))
    t = m4_build(args.levels)
    total = 0
    for k in range(1, args.levels + 1):
        total += osc_sum(t, t.system.gaps(k))
        print(json.dumps({"levels": f"1-{k}", "osc_sum": fmt_rat(total)}, sort_keys=True))


if __name__ == "__main__":
    main()
