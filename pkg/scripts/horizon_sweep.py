"""Methods 2, 5, 6, 7 over several horizons with a 200-point fit window.

    python3 scripts/horizon_sweep.py [--data CSV] [--n 700] [--seed 0]
                                       [--horizons 22,54,77,98,120]

The bundled series is too short for a 200-point window plus the previous
window used to fit combination weights, so by default a longer synthetic
series is generated with the same recipe. Models are refit for every
horizon. Each horizon block is ranked on its own.
"""
import argparse
import sys
from pathlib import Path

from hybridfx import pipeline as pl
from hybridfx.config import RunConfig
from hybridfx.evaluate_rank import HEADLINE
from hybridfx.series_store import load_csv

sys.path.insert(0, str(Path(__file__).parent))
from make_synthetic_series import synthesize  # noqa: E402

METHODS = (2, 5, 6, 7)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--data", type=Path, default=None)
    ap.add_argument("--n", type=int, default=700, help="length of the generated series")
    ap.add_argument("--series-seed", type=int, default=20111115)
    ap.add_argument("--sample", type=int, default=200)
    ap.add_argument("--horizons", default="22,54,77,98,120")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    frame = load_csv(args.data) if args.data else synthesize(args.n, args.series_seed)
    cfg = RunConfig()
    print(f"{'h':>4} {'method':>6}" + "".join(f"{h:>13}" for h in HEADLINE) + "   R1 R2 R3  R")
    for h in (int(v) for v in args.horizons.split(",")):
        rep = pl.run(frame, METHODS, args.sample, h, cfg, seed=args.seed, two_stage=False)
        r = rep.ranks.get("methods")
        for i, mid in enumerate(METHODS):
            rec = rep.performance[str(mid)]
            line = f"{h:4d} {mid:6d}" + "".join(f"{v:13.4f}" for v in rec.headline())
            if r is not None:
                line += f"   {r.r1[i]:2d} {r.r2[i]:2d} {r.r3[i]:2d} {r.comprehensive[i]:2d}"
            elif i == 0:
                line += "   unranked: a criterion is zero for every method"
            print(line)


if __name__ == "__main__":
    main()
