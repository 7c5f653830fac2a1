"""
How the initial coupling shapes the schedule
============================================

The hold value kappa1_init decides when the reflection first cancels and
how much energy is lost before that.  This scan runs the capture of the
Gaussian-pump microwave zero mode over a range of hold values and reports
the efficiency, the balance time and whether the resulting schedule dips
(falls and then rises again) anywhere.

Once balanced, kappa1(t) = P(t) / S(t), where S is the stored energy and
S' = P.  At any turning point of kappa1 the slope of d(ln kappa1)/dt is
d^2(ln P)/dt^2, so for a log-concave power envelope kappa1 cannot turn
upward again: the scan is a direct check of that statement.

Run:  python demos/coupling_schedule_scan.py
"""
import numpy as np

from eqtcatch import GaussianPump, ModeModel, TimeGrid, biphoton_kernel, reference_params
from eqtcatch.catcher import InputPhoton, capture_report, catch, has_dip
from eqtcatch.errors import NoBalanceError
from eqtcatch.model import TWO_PI
from eqtcatch.schmidt import schmidt_decompose, zero_mode_profile

grid = TimeGrid(0.0, 600e-9, 241)
K = biphoton_kernel(ModeModel(reference_params(), GaussianPump(6.5, 40e-9, 120e-9), grid))
mode = zero_mode_profile(schmidt_decompose(K), "microwave")
photon = InputPhoton.from_samples(grid, mode.amplitude)

# second difference of ln|f|^2 on the bulk of the pulse; negative means log-concave there
power = np.abs(mode.amplitude) ** 2
bulk = power > 1e-4 * power.max()
curv = np.diff(np.log(power[bulk]), 2)
print(f"max d2 ln P over the bulk: {curv.max():.3e}  (log-concave up to roundoff: {curv.max() <= 1e-12})")

print("\nkappa1_init [2pi MHz]   t_b [ns]   eta_final   dip")
for k_mhz in (0.5, 1, 2, 4, 6, 10, 20):
    try:
        run = catch(photon, kappa1_init=TWO_PI * k_mhz * 1e6)
    except NoBalanceError as exc:
        print(f"{k_mhz:20.1f}   no balance (min |d_out| = {exc.min_abs_dout:.2e})")
        continue
    rep = capture_report(run)
    print(f"{k_mhz:20.1f} {rep.t_balance * 1e9:10.1f} {rep.eta_final:11.5f}   {has_dip(run.schedule.kappa1)}")
