"""Tour of the norm family and its subdifferential.

Computes Ky Fan p-k norms and their duals on a small matrix, inspects the
subdifferential descriptor at a point with a singular value tie, and checks
the directional derivative against a finite difference.
"""

import numpy as np

from kyfan.norms import NormSpec, dual_norm, norm
from kyfan.subdiff import descriptor, dir_derivative, sample_extreme


def main():
    rng = np.random.default_rng(7)
    a = np.diag([3.0, 2.0, 2.0, 0.5]).astype(complex)
    print("A = diag(3, 2, 2, 0.5)")
    for spec in (NormSpec.spectral(), NormSpec.trace(), NormSpec.schatten(2),
                 NormSpec.kyfan(2, 2), NormSpec.kyfan(3, 2)):
        print("  %-18s norm %.6f   dual %.6f"
              % (spec.label(), norm(a, spec), dual_norm(a, spec)))

    # sigma_2 = sigma_3 ties across the k = 2 boundary: many extreme points
    p, k = 3.0, 2
    desc = descriptor(a, p, k)
    q = p / (p - 1.0)
    print("\nsubdifferential of the (p=%g, k=%d) norm:" % (p, k))
    print("  singleton:", desc.singleton)
    print("  boundary block dim %d, required %d"
          % (desc.boundary.dim, desc.boundary.required))
    for i, g in enumerate(sample_extreme(desc, seed=1, count=3)):
        pair = np.real(np.trace(g.conj().T @ a))
        print("  extreme %d: ||G||_q = %.9f, Re tr(G*A) = %.9f (norm %.9f)"
              % (i, norm(g, NormSpec.schatten(q)), pair, norm(a, NormSpec.kyfan(p, k))))

    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    d = dir_derivative(a, x, p, k)
    t = 1e-6
    fd = (norm(a + t * x, NormSpec.kyfan(p, k)) - norm(a, NormSpec.kyfan(p, k))) / t
    print("\ndirectional derivative along a random X:")
    print("  analytic %.9f   finite difference %.9f   gap %.2e"
          % (d, fd, abs(d - fd)))


if __name__ == "__main__":
    main()
