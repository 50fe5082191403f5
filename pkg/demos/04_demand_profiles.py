"""
Hourly heat demand from annual values
=====================================

Annual demands become hourly series through temperature-driven
standard load profiles: a sigmoid daily factor, weekday factors and
hour-of-day shapes per temperature band. One normalization constant
pins the series sum to the annual demand.
"""

import numpy as np

from dhforge.demand import (
    DEFAULT_SLP_PARAMS,
    WeatherSeries,
    build_profile,
    nominal_load,
    sigmoid_h,
)

# synthetic weather year: seasonal wave plus a day/night swing
hours = np.arange(8760)
temps = 9.5 - 11.0 * np.cos(2 * np.pi * hours / 8760) + 4.0 * np.sin(2 * np.pi * (hours % 24) / 24)
weather = WeatherSeries(temps)

print("daily sigmoid factor h(theta), residential coefficients:")
residential = DEFAULT_SLP_PARAMS["residential"]
for theta in (-15, -5, 5, 15, 25):
    print(f"  {theta:+3d} degC -> h = {sigmoid_h(theta, residential):5.2f}")

print()
annual = 18_000.0  # kWh/a, a typical single-family home
profile = build_profile(annual, weather, residential, calendar_year=2023)
print(f"annual demand {annual:.0f} kWh distributed over 8760 h")
print(f"  sum:  {profile.values.sum():12.4f} kWh (matches the annual value)")
print(f"  peak: {nominal_load(profile):8.2f} kW")
print(f"  mean: {profile.values.mean():8.2f} kW")

january = profile.values[: 31 * 24].sum()
july = profile.values[181 * 24 : 212 * 24].sum()
print(f"  january energy: {january:8.0f} kWh")
print(f"  july energy:    {july:8.0f} kWh  (ratio {january / july:.1f}x)")

print()
print("usage types differ in shape, not in total:")
for usage, params in DEFAULT_SLP_PARAMS.items():
    p = build_profile(annual, weather, params, 2023)
    print(f"  {usage:<12} peak {nominal_load(p):6.2f} kW, load factor {p.values.mean() / p.values.max():.2f}")

# optional: plot one winter week per usage type
try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("\nmatplotlib not installed; skipping the plot")
else:
    week = slice(24 * 14, 24 * 21)
    fig, ax = plt.subplots(figsize=(10, 4))
    for usage, params in DEFAULT_SLP_PARAMS.items():
        p = build_profile(annual, weather, params, 2023)
        ax.plot(np.arange(24 * 7) / 24.0, p.values[week], label=usage, lw=1)
    ax.set_xlabel("day of a January week")
    ax.set_ylabel("heat demand [kW]")
    ax.legend(ncol=2, fontsize=8)
    fig.tight_layout()
    fig.savefig("demo_profiles.png", dpi=120)
    print("\nwrote demo_profiles.png")
