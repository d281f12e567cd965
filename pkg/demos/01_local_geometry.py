"""Where the whole toolkit starts: near a fixed distribution, KL divergence
is a squared Euclidean norm in the right coordinates.

Perturb P along a zero-sum direction J and compare the exact divergence
against the quadratic rule eps^2/2 * ||J||_P^2; the gap shrinks like the
cube of the step.
"""

import numpy as np

from infocoupling import (
    Distribution,
    Perturbation,
    apply_perturbation,
    kl_divergence,
    local_kl,
    to_weighted,
)

P = Distribution([0.5, 0.25, 0.25])
J = np.array([0.5, -0.25, -0.25])

psi = to_weighted(J, P)
print(f"direction J = {J},  weighted form psi = {psi.coords.round(6)}")
print(f"weighted norm ||psi|| = {psi.norm:.6f}  (exactly 1 for this pair)\n")

print(f"{'eps':>8} | {'exact KL':>12} | {'quadratic':>12} | {'gap':>9}")
for eps in (0.2, 0.1, 0.05, 0.025):
    pert = Perturbation(P, J, eps)
    exact = kl_divergence(P, apply_perturbation(pert))
    approx = local_kl(pert)
    print(f"{eps:8.3f} | {exact:12.3e} | {approx:12.3e} | {exact - approx:9.2e}")

print("\nHalving eps divides the gap by ~8: the remainder is cubic.")

full = apply_perturbation(Perturbation(P, J, 1.0))
print(f"\nAt full scale the same direction reaches the vertex: {full.probs}")
