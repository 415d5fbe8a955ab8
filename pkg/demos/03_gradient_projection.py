"""Anatomy of one projected update, at a size where you can read the numbers.

A proposed gradient step that would increase loss on a remembered domain
gets corrected to the nearest step (in Euclidean distance) whose dot
product with every memory gradient is nonnegative. The correction is
solved in the dual: one multiplier per remembered domain, a QP small
enough to enumerate by hand.
"""

import numpy as np

from streamcl.strategies import GemConfig, project_gradient


def main() -> None:
    rng = np.random.default_rng(4)
    dim = 6
    proposed = rng.normal(size=dim)
    memory_grads = rng.normal(size=(3, dim))

    print("proposed step g:", np.round(proposed, 3))
    before = memory_grads @ proposed
    print("dot with each memory gradient:", np.round(before, 3))
    print("negative entries mean the step would raise that domain's loss.\n")

    exact = project_gradient(proposed, memory_grads, GemConfig(lambda_margin=0.0, ridge=0.0))
    after = memory_grads @ exact
    print("projected step:", np.round(exact, 3))
    print("dot after projection:", np.round(after, 3), "(all >= 0)")
    print(f"distance moved: {np.linalg.norm(exact - proposed):.3f}\n")

    # lambda_margin > 0 pushes the duals off the boundary: the corrected
    # step actively descends on memory domains instead of just not
    # ascending. Training uses 0.5 (plus a tiny ridge for conditioning).
    biased = project_gradient(proposed, memory_grads, GemConfig(lambda_margin=0.5, ridge=0.0))
    print("with memory strength 0.5:", np.round(biased, 3))
    print("dot with memory gradients:", np.round(memory_grads @ biased, 3))
    print(f"distance moved: {np.linalg.norm(biased - proposed):.3f}")


if __name__ == "__main__":
    main()
