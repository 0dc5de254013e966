"""Subset dual ascent on f1 = (x+1)^2/2, f2 = 0, f3 = (x-1)^2/2.

Pairwise subsets {0,1}, {1,2} never leave y = 0 because the middle conjugate
is not smooth; adding the full subset reaches the optimum y = (1, 0, -1).
"""

from dykstra_net.dual_ascent import (allocation_objective, check_smooth_overlap, detect_stuck,
                                     init_allocation, run_allocation)
from dykstra_net.instances import three_node_stall


def main() -> None:
    funcs = three_node_stall()
    pairs = [(0, 1), (1, 2)]
    print("overlap check:", check_smooth_overlap(pairs, [f.conj_smooth for f in funcs]))
    s, tr = run_allocation(init_allocation(funcs), pairs, 100)
    rep = detect_stuck(s, pairs)
    print(f"pairs: status={tr.status} y={s.y.ravel()} G={allocation_objective(funcs, s.y)}")
    print(f"       subset x values={[float(x[0]) for x in rep.x_values]} flagged={rep.flagged}")
    s, tr = run_allocation(init_allocation(funcs), pairs + [(0, 1, 2)], 100)
    print(f"with full subset: status={tr.status} y={s.y.ravel()} "
          f"G={allocation_objective(funcs, s.y)}")


if __name__ == "__main__":
    main()
