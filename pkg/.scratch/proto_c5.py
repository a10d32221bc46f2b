import numpy as np, time, json
from isoqc.network import LatticeSpec, build_network
from isoqc.hamiltonians import build_tfi, ground_eigenpairs
from isoqc.optimize import run_vqe
from isoqc.exact_sim import physical_state

h = build_tfi(4, 4, 3.5, 1.0)
spec = ground_eigenpairs(h, k=4, cache_dir='.scratch/cache')
gs = spec.ground_subspace()
print('E0, E1:', spec.eigenvalues[:2], flush=True)
net = build_network(LatticeSpec('square', 4, 4, n_bq=1, n_bl=4))
for seed in range(3):
    t0 = time.time()
    tr = run_vqe(net, h, steps=500, seed=seed)
    fid = physical_state(net, tr.params).fidelity(gs)
    row = dict(seed=seed, final_E=tr.final_energy, min_E=tr.min_energy,
               fid=fid, wall=time.time() - t0)
    print(json.dumps(row), flush=True)
    np.save(f'.scratch/c5_params_{seed}.npy', tr.params)
    np.save(f'.scratch/c5_energies_{seed}.npy', tr.energies)
print('DONE', flush=True)
