"""From a depth profile (density omega, elasticity nu) to the impedance on [0, pi].

The travel-time coordinate x(z) = int sqrt(omega / nu) dz is rescaled to
end at pi and the impedance is rho = sqrt(omega nu).  With omega = nu = e^z
on [0, 2 pi] the result is exactly exp(2 x), the c = 1 exponential model.
"""

import math

import numpy as np

from periodic_wave import from_seismic, spectral_constants
from periodic_wave.coefficient import eta_rho

coeff = from_seismic(np.exp, np.exp, 2 * math.pi)
x = np.linspace(0.2, math.pi - 0.2, 7)
print(f"rescale factor {coeff.info['rescale']:.6f}")
print("rho / exp(2x):", np.round(coeff.rho(x) / np.exp(2 * x), 8))
print("potential    :", np.round(eta_rho(coeff, x), 5))
k = spectral_constants(coeff)
print(f"eta_inf={k.eta_inf:.5f} eta_mean2={k.eta_mean2:.5f} positive={k.positive}")

layered = from_seismic(lambda z: 2 + np.tanh(4 * (z - 1)), lambda z: 3 + z, 2.0)
k = spectral_constants(layered)
print(f"layered profile: eta_inf={k.eta_inf:.4f} at x={k.argmin:.3f}; "
      f"{'admissible' if k.positive else 'not admissible (potential not positive)'}")
