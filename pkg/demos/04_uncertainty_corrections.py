# # How far above 1/4?
#
# On a ring of N sites the position and momentum spreads of a packet cannot
# multiply to exactly 1/4. The leftover shrinks with N, and a power law fit
# over a sweep of sizes estimates how fast.

# In[1]:

import numpy as np

from torusqm.states import gaussian_state
from torusqm.uncertainty import InsufficientPositiveExcess, gaussian_probe, gup_excess, gup_scaling_sweep, mus_probe

sweep = [64, 128, 256, 512, 1024]

# In[2]:

r = gup_excess(gaussian_state(1024, 512, np.sqrt(0.5)))
print(r.dq2, r.dp2, r.product)

# In[3]:

fit = gup_scaling_sweep(sweep)
print("exponent", fit.exponent, "r2", fit.r_squared)
for rep in fit.reports:
    print(rep.n, rep.excess, rep.predicted_excess, rep.excess / rep.predicted_excess)

# In[4]:

# doubling the momentum spread roughly doubles the amplitude
fit2 = gup_scaling_sweep(sweep, mus_probe(1.0))
print(fit2.amplitude / fit.amplitude)

# In[5]:

# a wrapped Gaussian sits at or just below 1/4, so there is nothing to fit
try:
    gup_scaling_sweep(sweep, gaussian_probe(0.5))
except InsufficientPositiveExcess as err:
    print("gaussian probe:", err)
