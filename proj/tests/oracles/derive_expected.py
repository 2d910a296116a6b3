"""Independent high-precision evaluation of the closed-form values frozen into
the C++ unit tests. Uses mpmath only; shares no code with the library."""
from mpmath import mp, mpf, pi, cosh, sinh, exp, log10, sqrt, atan

mp.dps = 40

two_pi = 2 * pi
kappa = two_pi * mpf("22.2e6")
omega_m = two_pi * mpf("8.68e6")
gamma = two_pi * mpf("200")
gamma_m = two_pi * mpf("22")
g0 = two_pi * mpf("170")
n_th = mpf(10)
n_c = mpf("0.17")
eta_in = mpf("0.47")
eta_det = mpf("0.03")

weight = 1 + 4 * (omega_m / kappa) ** 2
print("weight_denominator", weight)
print("photons_for_C1", kappa * gamma / (4 * g0**2))


def ct(c):
    return 4 * c / weight


print("Ctilde(70)", ct(70))
print("scatter_rate_hz(C=220)", 220 * gamma / weight / two_pi)


def quad_var(r, theta, psi, nc=n_c, ein=eta_in):
    # variance of the quadrature at LO angle psi, squeeze phase theta
    return (1 + 2 * nc) * (1 - ein + ein * (cosh(2 * r) - mp.cos(theta - 2 * psi) * sinh(2 * r))) / 4


print("excess_db_r0", 10 * log10(quad_var(0, 0, 0) * 4))
print("vxx_rel_r1_theta0", quad_var(1, 0, 0) * 4)
print("det_r0", quad_var(0, 0, 0) ** 2)


def n_imp(c, vyy, eta=eta_det):
    return (1 - eta + 4 * eta * vyy) / (4 * eta * ct(c))


def n_ba(c, vxx):
    return ct(c) * vxx


print("n_imp(C=70,coh,eta=.03)", n_imp(70, mpf(1) / 4))
print("n_ba(C=70,coh)", n_ba(70, mpf(1) / 4))
print("n_total(C=70,coh)", n_imp(70, mpf(1) / 4) + n_ba(70, mpf(1) / 4) + n_th + mpf(1) / 2)
print("n_ba(C=70,r=1,theta=0,S1)", n_ba(70, quad_var(1, 0, 0)))
# impure bundled-parameter product at r=1 theta=0, eta_det=0.03, C=70
vx, vy = quad_var(1, 0, 0), quad_var(1, 0, mp.pi / 2)
print("heis_S1_r1", n_imp(70, vy) * n_ba(70, vx))

# cooling: Gamma_m=22, n_bath=95, Gamma_+=178, Gamma_-=0
print("n_f_cooling", (22 * 95) / (22 + 178))
# with sideband-resolved Stokes fraction for a drive detuned by -1.5 Omega_m
ka2 = (kappa / 2) ** 2
ratio = (ka2 + (mpf("0.5") * omega_m) ** 2) / (ka2 + (mpf("2.5") * omega_m) ** 2)
gp = 178 / (1 - ratio)
print("stokes_ratio_1p5", ratio, "G+", gp, "G-", gp * ratio, "n_f", (22 * 95 + gp * ratio) / 200)
print("cooling_condition_ratio", mpf("1.5") * 230 / (10 * 22))

# eta_det_om at C=250
c = 250
nba_coh = c / weight
nimp = n_imp(c, mpf(1) / 4)
eta_om = 1 / (1 + (n_th + nimp) / nba_coh)
print("nba_coh(250)", nba_coh, "n_imp", nimp, "eta_om", eta_om, "simplified", 1 / (1 + n_th / nba_coh),
      "ratio_to_0.03", eta_om / mpf("0.03"))

# tomography ideal sweep minimum, C=250, r=1, heterodyne imprecision from r=0 drive
v0 = quad_var(0, 0, 0)
# heterodyne: mean of both quadratures, each detected at half efficiency; the
# mechanical signal appears only in the phase-quadrature half
nimp_het = (1 - eta_det / 2 + eta_det * 2 * v0) / (eta_det * ct(250))
eta_om_sweep = ct(250) * v0 / (n_th + nimp_het + ct(250) * v0)
eta_eff = eta_in * eta_om_sweep
print("sweep eta_om", eta_om_sweep, "eta_eff", eta_eff, "min_r1", 1 - eta_eff * (1 - exp(-2)))
print("C_inf min r=1", 1 - eta_in * (1 - exp(-2)))
print("band_fraction_5gamma", 2 / pi * atan(mpf("2.5")))
