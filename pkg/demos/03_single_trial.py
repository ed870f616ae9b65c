"""One trial end to end: the superimposed transmit grid and the sensing DD map.

In FT the UE blocks stand out above a flat floor laid down by the sensing
pulse. In DD the echoes show as three peaks next to the pulse origin,
above a spread-out floor from the communication symbols.
"""

from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from dualdomain import STEADY_TARGETS, SystemConfig, reference_scenario
from dualdomain.experiments import evaluate_trial, prepare_trial, received_sensing_dd, transmit_grid

OUT = Path(__file__).with_name("output")
OUT.mkdir(exist_ok=True)
BETA = -5e-3

config = SystemConfig(M=1024, N=128)
scenario = reference_scenario()
ctx = prepare_trial(config, scenario, trial_index=0, options=STEADY_TARGETS)
result = evaluate_trial(ctx, BETA)

for u, user in enumerate(scenario.users):
    print(
        f"UE{u}: R {user.range_m:.1f} -> {result.range_hat[u]:.2f} m, "
        f"V {user.velocity_ms:.1f} -> {result.velocity_hat[u]:.2f} m/s, BER {result.ber[u]:.2e}"
    )

x_ft = transmit_grid(ctx, BETA)
y_dd = received_sensing_dd(ctx, BETA)
l0, k0 = ctx.pulse_origin

fig, (a, b) = plt.subplots(1, 2, figsize=(11, 4))
im = a.imshow(10 * np.log10(np.abs(x_ft) ** 2 / 1e-3), aspect="auto", origin="lower")
a.set(title="|X_FT|^2 [dBm]", xlabel="symbol n", ylabel="subcarrier m")
fig.colorbar(im, ax=a)
window = np.roll(y_dd, (-l0, -k0 + 16), axis=(0, 1))[:64, :48]
im = b.imshow(10 * np.log10(np.abs(window) ** 2 / 1e-3), aspect="auto", origin="lower")
b.set(title="|Y_DD|^2 near the pulse [dBm]", xlabel="Doppler bin (origin at 16)", ylabel="delay bin")
fig.colorbar(im, ax=b)
fig.tight_layout()
fig.savefig(OUT / "single_trial.png", dpi=120)
print(f"saved {OUT / 'single_trial.png'}")
