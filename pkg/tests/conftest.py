from datetime import date, timedelta

import numpy as np

from randfnn.timeseries import SeasonalSequence


def make_sequences(start: date, days: int, n: int = 24, rng=None, omit=()):
    """Toy daily sequences: distinct non-constant values per day, optional
    omitted dates (simulating exclusions/gaps)."""
    rng = rng or np.random.default_rng(0)
    out = []
    for i in range(days):
        d = start + timedelta(days=i)
        if d in omit:
            continue
        values = 100.0 + 10.0 * i + 5.0 * np.sin(2 * np.pi * np.arange(n) / n) \
            + rng.normal(0, 0.5, n)
        out.append(SeasonalSequence(values, d, d.weekday(), i))
    return out
