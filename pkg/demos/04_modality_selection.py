"""Conditional modality selection: which additional modality is worth it?

X is already selected.  Candidates U, V, W are trained jointly with X
under cross-independence penalties, then scored against the response.
In generator case 2, U carries the missing latent coordinate, V repeats
what X already knows, and W is pure noise, so the utilities should rank
U far above V and W, and the permutation threshold should keep V and W
out of the active set.

Run:  python3 demos/04_modality_selection.py   (about two minutes)
"""

from sufrep import SelectionConfig, SynthConfig, TrainConfig, conditional_select, gen_dataset

bundle = gen_dataset(SynthConfig(scenario=2, case=2, n=2000, seed=0))

report = conditional_select(
    bundle.dataset,
    preselected=[0],            # X
    candidates=[1, 2, 3],       # U, V, W
    train_cfg=TrainConfig(outer_iters=60, seed=0),
    sel_cfg=SelectionConfig(threshold="permutation", level=0.05, num_perms=199, seed=0),
)

print(f"mode: {report.mode}   preselected: {report.preselected}")
print("candidate |   utility (v_n) |    dcor |     tau | active")
for c in report.candidates:
    print(f"{c.name:9s} | {c.utility:15.6f} | {c.dcor:7.4f} | {c.tau:7.4f} | {c.active}")
print("\nranking:", " > ".join(report.ranking))
print("selected (argmax utility):", report.selected)
print("active set:", report.active_set)
print("\nJSON form:\n" + report.to_json())
