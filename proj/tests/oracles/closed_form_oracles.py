#!/usr/bin/env python3
"""Extended-precision reference values for the closed-form unit tests.

Evaluates the overdamped Brownian oscillator line-broadening function and the
response-function exponents with mpmath at 40 significant digits. The numbers
printed here are frozen into tests/test_bath.cpp, tests/test_cumulant.cpp and
tests/test_propagator.cpp.
"""
import mpmath as mp

mp.mp.dps = 40

C_CM_PER_FS = mp.mpf("2.99792458e-5")
KB_CM_PER_K = mp.mpf("0.6950348")


def cm_to_rad_fs(nu):
    return 2 * mp.pi * C_CM_PER_FS * mp.mpf(nu)


LAM = cm_to_rad_fs(100)
TAU_C = mp.mpf(100)
THETA = cm_to_rad_fs(KB_CM_PER_K * 300)


def g(t):
    t = mp.mpf(t)
    return (LAM * THETA * TAU_C**2 - 1j * LAM * TAU_C) * (mp.exp(-t / TAU_C) - 1 + t / TAU_C)


def gdot(t):
    t = mp.mpf(t)
    return (LAM * THETA * TAU_C - 1j * LAM) * (1 - mp.exp(-t / TAU_C))


def show(name, z):
    z = mp.mpc(z)
    print(f"{name}: {mp.nstr(z.real, 17)} {mp.nstr(z.imag, 17)}")


conj = mp.conj

show("obo_g(100)", g(100))
show("obo_gdot(inf)", LAM * THETA * TAU_C - 1j * LAM)
show("egcf(0)", LAM * THETA - 1j * LAM / TAU_C)

w = cm_to_rad_fs(10000)
show("linear_coherence(w=10000cm, t=200)", mp.exp(-1j * w * 200 - g(200)))


def r2_exact(tau, T, t):
    return mp.exp(-conj(g(tau + T)) - g(T + t) + conj(g(t + T + tau))
                  - conj(g(t)) - conj(g(tau)) + g(T))


show("r2_exact(tau=100,T=0,t=100)", r2_exact(100, 0, 100))
show("r2_rdm(tau=100,t=100)", mp.exp(-conj(g(100)) - g(100)))
show("r2_initial(tau=50,T=100)", r2_exact(50, 100, 0))
show("k3(t=100,T=100,tau=100)", -conj(gdot(100)) + conj(gdot(300)) - gdot(200))
show("k2(c=0,T=100,tau=100)", -conj(gdot(200)) - gdot(100))
show("coeff_I(t=0,T=100,tau=50)", gdot(100) - conj(gdot(150)))
show("coeff_M(t=100)", gdot(100))
