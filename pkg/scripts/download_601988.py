"""Fetch Bank of China (601988.SH) daily bars into the CSV layout attclx reads.

The data is not redistributable, so it is not shipped with the repository.
Needs the ``tushare`` package and a Tushare Pro token:

    pip install tushare
    TUSHARE_TOKEN=... python3 scripts/download_601988.py tests/data/601988.SH.csv

With the file in place (or ATTCLX_601988_CSV pointing at it) the real-data
acceptance check runs instead of skipping.
"""
import argparse
import os
import sys

COLUMNS = ["trade_date", "open", "high", "low", "close", "vol", "amount"]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out", help="destination CSV")
    parser.add_argument("--code", default="601988.SH")
    parser.add_argument("--start", default="20070101")
    parser.add_argument("--end", default="20220331")
    args = parser.parse_args(argv)

    token = os.environ.get("TUSHARE_TOKEN")
    if not token:
        sys.exit("set TUSHARE_TOKEN to a Tushare Pro token")
    import tushare as ts

    pro = ts.pro_api(token)
    # the daily endpoint caps rows per call, so page by year
    frames = []
    for year in range(int(args.start[:4]), int(args.end[:4]) + 1):
        lo, hi = max(args.start, f"{year}0101"), min(args.end, f"{year}1231")
        frames.append(pro.daily(ts_code=args.code, start_date=lo, end_date=hi))
    import pandas as pd

    df = pd.concat(frames, ignore_index=True).drop_duplicates("trade_date")
    df = df.sort_values("trade_date")[COLUMNS]
    df.to_csv(args.out, index=False)
    print(f"wrote {len(df)} rows to {args.out}")


if __name__ == "__main__":
    main()
