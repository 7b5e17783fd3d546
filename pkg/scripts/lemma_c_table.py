"""Tabulate the weight inequality on ternary gaps, level by level.

For each eta, prints the gap weight Q_k, the smallest right-hand side over the
level-k gaps, and how many gaps violate the inequality.  The last column is the
least level from which the inequality holds for every gap (computed exactly).

    python3 scripts/lemma_c_table.py --max-level 10 --eta 1/2 --eta 1/8
"""

import argparse
import json

from mcalpha.config import LemmaCConfig, _jsonable
from mcalpha.exact import fmt_rat, parse_rat


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-level", type=int, default=12)
    ap.add_argument("--eta", action="append", type=parse_rat)
    ap.add_argument("--json", action="store_true", help="emit one JSON object per row")
    args = ap.parse_args()
    cfg = LemmaCConfig(tuple(args.eta) if args.eta else LemmaCConfig.etas, args.max_level)
    rows = cfg.rows()
    if args.json:
        for row in rows:
            print(json.dumps(_jsonable(row), sort_keys=True))
        return
    print(f"{'eta':>6} {'k':>3} {'Q_k':>14} {'min rhs':>14} {'bad':>6}/{'gaps':<6} {'holds from':>10}")
    for r in rows:
        print(
            f"{fmt_rat(r['eta']):>6} {r['level']:>3} {fmt_rat(r['weight']):>14} {fmt_rat(r['min_rhs']):>14}"
            f" {r['violations']:>6}/{r['gaps']:<6} {r['threshold']:>10}"
        )


if __name__ == "__main__":
    main()
