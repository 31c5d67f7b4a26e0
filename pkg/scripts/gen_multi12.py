#!/usr/bin/env python3
"""Generate the multi12 fixture: a synthetic 12-level system standing in for
a large ro-vibrational manifold.

Design targets (at the documented reference amplitude F0_REF):

* sigma_tot^2 = 0.2 exactly, split 0.19 over seven alpha-side perturbers
  and 0.01 over three beta-side ones. Leakage then rides mostly on the
  alpha population, which starts empty, so even a square pulse switches
  the strongly-coupled perturbers on adiabatically.
* alpha-side detunings come in near-cancelling +/- pairs so the net
  first-order carrier shift stays small against the Rabi rate and the
  first-order chirp is accurate at sigma_tot^2 = 0.2.
* every detuning is >= 450x the envelope rate of a full-oscillation sine
  pulse at F0_REF, keeping non-adiabatic edge residues below the loss
  envelope threshold near the pulse edges.

Run from the repo root:  python scripts/gen_multi12.py
"""

import json
from pathlib import Path

W_AB = 0.017671  # driven transition frequency, matches hf3's beta-alpha gap
MU_AB = 0.073
E_ALPHA = 0.0
E_BETA = W_AB

F0_REF = 3.5e-4  # documented reference amplitude: sigma_tot^2 = 0.2 here

# (detuning d = w_ab - w_perturber, sigma^2 at F0_REF)
ALPHA_SIDE = [
    (+0.9e-3, 0.035),
    (-0.9e-3, 0.035),
    (+1.2e-3, 0.030),
    (-1.2e-3, 0.030),
    (+1.5e-3, 0.025),
    (-1.5e-3, 0.025),
    (+1.0e-3, 0.010),
]
BETA_SIDE = [
    (+2.0e-3, 0.004),
    (-2.2e-3, 0.004),
    (+2.5e-3, 0.002),
]


def main():
    levels = [
        {"id": 0, "label": "a", "energy_au": E_ALPHA},
        {"id": 1, "label": "b", "energy_au": E_BETA},
    ]
    dipoles = [{"i": 0, "j": 1, "mu_au": MU_AB}]
    next_id = 2

    for k, (d, s2) in enumerate(ALPHA_SIDE, start=1):
        w = W_AB - d  # perturbing transition frequency to alpha
        mu = 2.0 * abs(d) * (s2 ** 0.5) / F0_REF
        levels.append({"id": next_id, "label": f"q{k}", "energy_au": E_ALPHA + w})
        dipoles.append({"i": 0, "j": next_id, "mu_au": mu})
        next_id += 1

    for k, (d, s2) in enumerate(BETA_SIDE, start=1):
        w = W_AB - d
        mu = 2.0 * abs(d) * (s2 ** 0.5) / F0_REF
        levels.append({"id": next_id, "label": f"p{k}", "energy_au": E_BETA + w})
        dipoles.append({"i": 1, "j": next_id, "mu_au": mu})
        next_id += 1

    sig_tot = sum(s2 for _, s2 in ALPHA_SIDE + BETA_SIDE)
    doc = {
        "comment": (
            "Synthetic 12-level system: selected pair (0,1) plus seven perturbers "
            f"of alpha and three of beta, tuned so sigma_tot^2 = {sig_tot} at "
            f"F0 = {F0_REF} a.u. Generated by scripts/gen_multi12.py."
        ),
        "f0_ref_au": F0_REF,
        "levels": levels,
        "dipoles": dipoles,
    }
    out = Path(__file__).resolve().parents[1] / "src" / "rabichirp" / "fixtures" / "multi12.json"
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
