# # Revivals under T + T^dagger
#
# The hopping Hamiltonian H = 2 - T - T^dagger moves amplitude k sites at a
# time with a site-dependent phase. When all level spacings are commensurate
# the evolution revives exactly.

# In[1]:

import numpy as np

from torusqm.dynamics import (
    build_hamiltonian,
    evolve,
    fit_closed_form,
    spectral_period,
    survival_grid_period,
    translated_revival,
)
from torusqm.states import MusSpec, lambda_roots, mus_state, random_state

# In[2]:

for n, k in [(2, 1), (8, 2), (8, 4), (12, 2), (16, 1)]:
    rep = spectral_period(build_hamiltonian(n, k))
    print(n, k, rep.kind, rep.period)

# In[3]:

# the grid scan on the survival amplitude agrees with the spectrum
h = build_hamiltonian(12, 2)
print(survival_grid_period(h, random_state(12, np.random.default_rng(0))).period / np.pi)

# In[4]:

roots = lambda_roots(100, 1.5)
psi = mus_state(MusSpec.from_mu(100, 1.5, int(np.argmin(np.abs(roots - (-1.497 + 0.094j))))))
h = build_hamiltonian(100, 25)
print(survival_grid_period(h, psi).period / np.pi)
# halfway through, the packet sits on the opposite side of the ring
print(translated_revival(h, psi, np.pi / 2))

# In[5]:

# with short hops the same packet spreads; its width dips first because it is chirped
tr = evolve(build_hamiltonian(100, 2), psi, np.arange(6) * np.pi / 2)
print(np.round(tr.widths, 2))

# In[6]:

for ratio in (2, 4, 6):
    fit = fit_closed_form(ratio)
    print(ratio, fit.scale, fit.residual, fit.period)
