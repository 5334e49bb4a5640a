"""Two-layer network with symmetric initialization.

The duplicated-and-negated initialization makes the network the exact zero
function, so training starts from loss log 2 with every residual at 1/2.
Full-batch gradient descent then drives the functional-gradient norm down,
and the dual smooth CE along the trajectory never exceeds it.
"""

import math

import numpy as np

from smoothcal import NnConfig, gen_mirrored_toy, nn_forward, nn_init_symmetric, nn_train
from smoothcal.bounds import BoundInputs, nn_training_bound
from smoothcal.two_layer_nn import ACTIVATIONS, admissibility_report

params = nn_init_symmetric(m=300, d=2, init_std=1.0, seed=0)
probe = np.random.default_rng(0).normal(0, 1, (5, 2))
print("logits at symmetric init:", nn_forward(params, probe), "(exactly zero)")

train = gen_mirrored_toy(200, seed=1)
config = NnConfig(T=120, w=0.01, m=300, beta=0.0, activation="tanh")
model = nn_train(train, config, seed=2)

print("\nt    loss     grad_l1  dual_smce  smce")
for row in model.trace[:: max(1, config.T // 8)]:
    print(f"{row.t:<4d} {row.log_loss:.5f}  {row.grad_l1:.5f}  {row.dual_smce:.5f}    {row.smce:.5f}")

print(f"\nCesaro mean of grad_l1^2 = {model.cesaro_sq_grad_l1:.6f}")
print(f"min-over-t dual smCE     = {model.min_dual_smce:.6f} <= sqrt(Cesaro) = {math.sqrt(model.cesaro_sq_grad_l1):.6f}")

# The published admissibility conditions on (m, w, T) are reported, not
# enforced; with a hypothetical margin gamma the closed-form bound reads:
act = ACTIVATIONS[config.activation]
print("\nadmissibility:", admissibility_report(config, n=train.n, gamma=1.0))
bound = nn_training_bound(
    BoundInputs(gamma=1.0, w=config.w, T=config.T, m=config.m, beta=config.beta, K1=act.K1, K2=act.K2)
)
print(f"training bound at gamma=1: {bound:.5f}  [uncertified]")
