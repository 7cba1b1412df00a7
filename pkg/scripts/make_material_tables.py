"""Regenerate the bundled n,k tables in src/optomemristor/data/materials/.

The measured ellipsometry data for the sputtered films is not public, so each
table is evaluated from a closed-form dispersion model and written on a 2 nm
grid.  Re-run after changing a model:

    python scripts/make_material_tables.py
"""

from pathlib import Path

import numpy as np

HC_EV_NM = 1239.84193
OUT = Path(__file__).resolve().parents[1] / "src" / "optomemristor" / "data" / "materials"
GRID = np.arange(300.0, 1600.0 + 1e-9, 2.0)


def nk_from_eps(eps):
    # principal root, k >= 0
    root = np.sqrt(eps.astype(complex))
    return root.real, np.abs(root.imag)


def drude(lam, eps_inf, wp, gamma):
    e = HC_EV_NM / lam
    return eps_inf - wp**2 / (e**2 + 1j * gamma * e)


def lorentz(lam, eps_inf, strength, e0, gamma):
    e = HC_EV_NM / lam
    return eps_inf + strength * e0**2 / (e0**2 - e**2 - 1j * gamma * e)


def sellmeier_sio2(lam):
    um2 = (lam / 1000.0) ** 2
    n2 = (1 + 0.6961663 * um2 / (um2 - 0.0684043**2)
          + 0.4079426 * um2 / (um2 - 0.1162414**2)
          + 0.8974794 * um2 / (um2 - 9.896161**2))
    return n2.astype(complex)


TABLES = {
    "Air": ("Vacuum/air, n = 1 exactly.", lambda lam: np.ones_like(lam, dtype=complex)),
    "SiO2": ("Fused silica, Sellmeier coefficients of Malitson (1965); lossless.",
             sellmeier_sio2),
    "Ag": ("Silver, Drude model eps_inf=3.7, hbar*wp=8.9 eV, hbar*gamma=0.04 eV "
           "(fit to Johnson & Christy 1972 in the visible/NIR, damping raised for sputtered films).",
           lambda lam: drude(lam, 3.7, 8.9, 0.04)),
    "Pt": ("Platinum, effective Drude model eps_inf=1, hbar*wp=12.5 eV, hbar*gamma=2.95 eV "
           "(matched to n~2.3, k~4.1 at 637 nm, Rakic et al. 1998); approximate.",
           lambda lam: drude(lam, 1.0, 12.5, 2.95)),
    "Ta": ("Tantalum, effective Drude model eps_inf=1, hbar*wp=8.35 eV, hbar*gamma=3.1 eV "
           "(matched to n~1.6, k~2.6 near 637 nm); approximate, adhesion layer only.",
           lambda lam: drude(lam, 1.0, 8.35, 3.1)),
    "GeSe3": ("Sputtered amorphous GeSe3, single Lorentz oscillator eps_inf=1.0, f=4.5, "
              "E0=3.8 eV, Gamma=0.8 eV; n(637 nm)=2.65, k(637 nm)=0.17. Broadband loss "
              "stands in for embedded Ag nanoparticles.",
              lambda lam: lorentz(lam, 1.0, 4.5, 3.8, 0.8)),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, (source, model) in TABLES.items():
        n, k = nk_from_eps(model(GRID))
        lines = [f"# {name}", f"# source: {source}",
                 "# generated by scripts/make_material_tables.py", "wavelength_nm,n,k"]
        lines += [f"{lam:.1f},{nn:.6f},{kk:.6f}" for lam, nn, kk in zip(GRID, n, k)]
        (OUT / f"{name}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote {name}.csv ({len(GRID)} rows)")


if __name__ == "__main__":
    main()
