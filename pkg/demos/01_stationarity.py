"""
Is the price series stationary?
===============================

A unit-root check on the bundled daily bars, then the correlograms that
pick the autoregressive order.
"""

import numpy as np
from attclx import adf_test, acf, pacf, load_ohlcv_csv
from attclx.io import fixture_path
from attclx.stats import difference

frame = load_ohlcv_csv(fixture_path("stand_in_daily.csv"))
close = frame.close
print(f"{close.size} bars from {frame.dates[0]} to {frame.dates[-1]}")

# Levels: a random walk should not reject the unit root
print("\nclose levels")
print(adf_test(close).as_text())

# First differences should reject it hard
d1 = difference(close, 1)
print("first difference")
print(adf_test(d1).as_text())

# The PACF of the differenced series cuts off early, which is what an AR(p)
# on differences needs
band = 1.96 / np.sqrt(d1.values.size)
print(f"lag  acf       pacf      (95% band +-{band:.3f})")
for k, (a, p) in enumerate(zip(acf(d1, 10), pacf(d1, 10))):
    flag = "*" if k and abs(p) > band else ""
    print(f"{k:3d}  {a:+.4f}  {p:+.4f} {flag}")
