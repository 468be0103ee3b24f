"""
Physical units and the validation suite
=======================================

Dimensionless results are converted to SI using μ₁ = 2π × 85 MHz and a
cavity frequency of 2π × 5.09 GHz. The quick validation run executes every
module invariant except the master-equation checks.
"""

# %%
from cavity_phase_gate.experiments import RunConfig, physical_units_report, run_validation_suite

rep = physical_units_report(gamma=2e-4)
print(f"gate time      = {rep.gate_time_s * 1e9:.1f} ns")
print(f"mu / 2pi       = {rep.mu_rad_s / 6.283185307179586 / 1e6:.1f} MHz")
print(f"kappa / 2pi    = {rep.kappa_hz / 1e6:.3f} MHz")
print(f"Q              = {rep.quality_factor:.1f}")
print(f"1/gamma        = {rep.decoherence_time_s * 1e6:.2f} us")

# %%
report = run_validation_suite(RunConfig(mode="validate", fock_cutoff=1), include_slow=False)
for c in report.checks:
    measured = c["measured"]
    if isinstance(measured, float):
        measured = f"{measured:.3e}"
    elif isinstance(measured, dict):
        measured = "per-state table"
    print(f"{c['status']:4s}  {c['check']:38s} {measured}")
print("all passed" if report.passed else "some checks failed (see README)")
