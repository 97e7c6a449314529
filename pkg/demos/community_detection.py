"""
Self-reliant communities on a flow graph
========================================

Edges carry the DC power flow between neighbours.  Communities should be
dense in flow and close to power balanced; ``lam`` sets how strongly
imbalance is punished.
"""

import numpy as np

from gridqopt import srcd
from gridqopt.grid import random_network
from gridqopt.solvers import brute_force, simulated_annealing

net = random_network(10, np.random.default_rng(3), "mesh").with_flows()
print("node powers (negative = producer):", np.round(net.p, 2))

for lam in (0.0, 0.1, 1.0):
    inst = srcd.SrcdInstance.from_network(net, K=2, lam=lam)

    # single-problem QUBO: one-hot over K communities, 20 variables
    q = srcd.build_onehot_qubo(inst)
    labels = srcd.decode_onehot(inst, brute_force(q).best_x)
    one_hot = srcd.assignment(inst, labels)

    # divisive route: repeated bipartitions, no fixed K
    div = srcd.divisive(inst, lambda sub: simulated_annealing(sub, seed=0))
    lv = srcd.louvain(inst, use_self_reliance=True)

    print(f"\nlam = {lam}")
    for name, a in (("one-hot K=2", one_hot), ("divisive SA", div), ("louvain", lv)):
        sums = [round(float(net.p[b].sum()), 2) for b in a.blocks()]
        print(f"  {name:12s} Q={a.modularity:.3f} SR={a.self_reliance:.4f} "
              f"communities={a.n_communities} net power={sums}")

print("\nLouvain estimate of K:", srcd.estimate_k(srcd.SrcdInstance.from_network(net)))
