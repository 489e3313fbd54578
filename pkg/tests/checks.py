"""Shared sample-wise checks of the bracketing inequalities."""

import numpy as np


def sample_violations(table, br, tol=1e-9):
    """Count sampled eigenvalues violating any of the four bracketing inequalities."""
    ng = br.graph
    nu, nu_D, nu_N = ng.nu, ng.nu_D, ng.nu_N
    lam = table.values
    lN, lD = br.spectra.lambdaN, br.spectra.lambdaD
    bad = 0
    for n in range(1, nu + 1):
        col = lam[:, n - 1]
        bad += np.sum(col < lN[n - 1] - tol)
        bad += np.sum(col > lN[n + nu_N - nu - 1] + tol)
        if n <= nu_D:
            bad += np.sum(col > lD[n - 1] + tol)
        if n > nu - nu_D:
            bad += np.sum(col < lD[n - nu + nu_D - 1] - tol)
    return int(bad)


def envelope_violations(table, qsorted, kappa_plus, tol=1e-9):
    lam = table.values
    return int(np.sum(lam < np.asarray(qsorted) - tol) + np.sum(lam > np.asarray(qsorted) + 2 * kappa_plus + tol))
