"""Reference values for the reward tests: group-relative advantages with the
population standard deviation, the k3 KL estimator, and the clipped surrogate.

Run: python3 tests/oracles/reward_oracle.py
"""
import numpy as np

groups = {
    "comp_rewards": [1.0, 0.5, 0.1, 0.25],
    "two": [0.0, 1.0],
    "hybrid": [1.0 + 0.8, 0.5 + 0.2, 0.2 + 1.0],
}
for name, r in groups.items():
    r = np.array(r)
    mean, std = r.mean(), r.std()
    print(name, "mean=%.15f std=%.15f adv=%s" % (mean, std, ["%.15f" % a for a in (r - mean) / std]))

for ratio in (0.5, 2.0, 1.0):
    print("kl(%g)=%.15f" % (ratio, ratio - np.log(ratio) - 1))

rho = np.array([1.5, 0.7, 1.1, 0.9])
adv = np.array([1.0, -1.0, 0.5, -0.5])
kl = np.array([1.2, 0.8, 1.0, 1.1])
beta = 0.04
clipped = np.clip(rho, 0.8, 1.2)
terms = np.minimum(rho * adv, clipped * adv) - beta * (kl - np.log(kl) - 1)
print("surrogate=%.15f" % terms.mean())
