"""AdaBoost rounds to zero training error against ln m on the majority-of-5 task."""
import math

import numpy as np

from qsmoothboost.boost_classical import adaboost_run
from qsmoothboost.dataset import SyntheticTask, draw_sample
from qsmoothboost.weak_learn import StumpLearner

TASK = SyntheticTask("majority", 20, 5)


def main(seeds=20):
    for m in (32, 64, 128, 256, 512):
        rounds = [adaboost_run(StumpLearner(), draw_sample(TASK, m, s), 500, seed=s)[1].T
                  for s in range(seeds)]
        print(f"m={m:>4}  mean rounds {np.mean(rounds):5.2f}  rounds/ln m {np.mean(rounds) / math.log(m):.3f}")


if __name__ == "__main__":
    main()
