"""Generate the bundled EUR/USD-like daily OHLC series.

    python3 scripts/make_synthetic_series.py [--n 300] [--seed 20111115] [--out PATH]

Close follows a log random walk with a slow cyclical drift; open, high and
low are built around it so every row is OHLC-consistent. Quotes are
rounded to 4 decimals like interbank rates.
"""
import argparse
import datetime as dt
from pathlib import Path

import numpy as np

from hybridfx.series_store import OhlcFrame, write_csv

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "hybridfx" / "data" / "eurusd_synthetic.csv"


def business_days(start: dt.date, n: int):
    out, d = [], start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def synthesize(n: int, seed: int) -> OhlcFrame:
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    drift = 0.0008 * np.sin(2 * np.pi * t / 90.0)
    ret = drift + 0.006 * rng.standard_normal(n)
    close = np.round(1.35 * np.exp(np.cumsum(ret)), 4)
    prev = np.concatenate([[close[0]], close[:-1]])
    open_ = np.round(prev + 0.0008 * rng.standard_normal(n), 4)
    spread = np.abs(0.004 * rng.standard_normal((2, n)))
    high = np.round(np.maximum(open_, close) + spread[0], 4)
    low = np.round(np.minimum(open_, close) - spread[1], 4)
    return OhlcFrame(business_days(dt.date(2010, 9, 1), n), open_, high, low, close,
                     name="eurusd_synthetic")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--seed", type=int, default=20111115)
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    args = ap.parse_args()
    frame = synthesize(args.n, args.seed)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_csv(frame, args.out)
    print(f"wrote {len(frame)} rows to {args.out}")


if __name__ == "__main__":
    main()
