"""Independent reference computations used by the tests.

Nothing here imports hpc_carbon code paths that the tests check; the
formulas are written out longhand and the searches are exhaustive.
"""

import statistics
from datetime import timedelta, timezone


def processor_manufacturing(fpa, gpa, mpa, die_area, fab_yield):
    emissions_per_cm2 = fpa + gpa + mpa
    return emissions_per_cm2 * die_area / fab_yield


def capacity_manufacturing(epc, capacity):
    return epc * capacity


def ic_packaging(ic_count):
    return 150 * ic_count


def operational_carbon(kwh, intensity):
    return intensity * kwh


def blended_energy_kwh(count, hours, pue, allocation, usage, active_w, idle_w):
    watts = usage * active_w + (1 - usage) * idle_w
    return count * hours * pue * allocation * watts / 1000


def population_stats(values):
    mean = statistics.fmean(values)
    std = statistics.pstdev(values)
    return {
        "mean": mean,
        "median": statistics.median(values),
        "std": std,
        "cov_percent": 100 * std / mean if mean > 0 else 0.0,
        "min": min(values),
        "max": max(values),
    }


def winners_by_exhaustion(traces, reference_offset_minutes):
    """Per-instant argmin over every UTC hour spanned by any trace.

    Traces must be hourly and aligned to the top of the hour.
    Returns (counts[hour][region], ties[hour]).
    """
    regions = [t.region_id for t in traces]
    counts = {h: {r: 0 for r in regions} for h in range(24)}
    ties = {h: 0 for h in range(24)}
    first = min(t.samples[0][0] for t in traces)
    last = max(t.samples[-1][0] for t in traces)
    zone = timezone(timedelta(minutes=reference_offset_minutes))
    lookup = [dict(t.samples) for t in traces]
    instant = first
    while instant <= last:
        values = []
        for by_time in lookup:
            if instant not in by_time:
                break
            values.append(by_time[instant])
        else:
            low = min(values)
            best = [r for r, v in zip(regions, values) if v == low]
            hour = instant.astimezone(zone).hour
            if len(best) == 1:
                counts[hour][best[0]] += 1
            else:
                ties[hour] += 1
        instant += timedelta(hours=1)
    return counts, ties


def step_average(pieces):
    """Time-weighted mean of [(hours, value), ...]."""
    total = sum(h for h, _ in pieces)
    return sum(h * v for h, v in pieces) / total
