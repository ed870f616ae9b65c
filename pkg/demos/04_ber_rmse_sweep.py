"""BER and sensing RMSE across the power split, with the resolution floor drawn in.

Trials are kept low so this finishes in a couple of minutes; raise
TRIALS to 100 for smooth curves.
"""

from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from dualdomain import STEADY_TARGETS, SweepSpec, reference_scenario, resolutions, run_sweep
from dualdomain.config import REFERENCE_CASES, SystemConfig
from dualdomain.experiments import default_beta_grid

OUT = Path(__file__).with_name("output")
OUT.mkdir(exist_ok=True)
TRIALS = 10

spec = SweepSpec(
    beta_grid=default_beta_grid(8),
    cases=REFERENCE_CASES,
    trials_per_point=TRIALS,
    scenario=reference_scenario(),
    options=STEADY_TARGETS,
    output_path=OUT / "sweep.csv",
)
result = run_sweep(spec)

fig, (a, b, c) = plt.subplots(1, 3, figsize=(14, 4))
for M, N in result.cases:
    curve = result.curve(M, N)
    beta = np.array([-p.beta for p in curve])
    res = resolutions(SystemConfig(M=M, N=N))
    (line,) = a.semilogy(beta, [p.mean_ber for p in curve], "o-", label=f"{M}x{N}")
    b.semilogy(beta, [p.rmse_range_m for p in curve], "o-", color=line.get_color())
    b.axhline(res.delta_R / np.sqrt(12), ls=":", color=line.get_color())
    c.semilogy(beta, [p.rmse_velocity_ms for p in curve], "o-", color=line.get_color())
    c.axhline(res.delta_V / np.sqrt(12), ls=":", color=line.get_color())
for ax, title in ((a, "mean BER"), (b, "RMSE range [m]"), (c, "RMSE velocity [m/s]")):
    ax.set(xscale="log", xlabel="-beta", title=title)
a.legend()
fig.tight_layout()
fig.savefig(OUT / "sweep.png", dpi=120)
print(f"saved {OUT / 'sweep.png'} and {spec.output_path}")
