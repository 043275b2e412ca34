"""Pushing a sample toward N(0, I) with a learned density-ratio field.

A logistic discriminator is trained to tell the current particles from
standard-normal reference draws; its input gradient defines a residual
map that moves every particle a small step toward the reference law.
Iterating the (retrain, push) cycle transports the sample.

Run:  python3 demos/02_gaussianization.py
"""

import numpy as np

from sufrep import density_ratio, draw_reference, push_particles, train_discriminator

rng = np.random.default_rng(0)
n, d = 2000, 2

# start away from the reference: shifted and stretched
particles = rng.standard_normal((n, d)) * np.array([1.6, 0.6]) + np.array([3.0, -1.0])

# one retrain + one modest push per round, as in the representation trainer
print("round |  mean vector      | var vector       | median ratio")
for it in range(30):
    ref = draw_reference(n, d, seed=100 + it)
    disc = train_discriminator(particles, ref, steps=300, seed=it)
    if it % 5 == 0:
        r = np.median(density_ratio(disc, particles))
        m = particles.mean(axis=0)
        v = particles.var(axis=0)
        print(f"{it:5d} | [{m[0]:+.3f}, {m[1]:+.3f}] | [{v[0]:.3f}, {v[1]:.3f}]   | {r:.3f}")
    particles = push_particles(disc, particles, 0.4)

m, v = particles.mean(axis=0), particles.var(axis=0)
print(f"final | [{m[0]:+.3f}, {m[1]:+.3f}] | [{v[0]:.3f}, {v[1]:.3f}]")
print("\nA well-transported sample has mean ~0, variance ~1, and density ratios ~1.")
