"""
Release triplets and the two tree learners
==========================================

Load one triplet, train CART and a random forest with default settings,
and score them on the third release.
"""
from dataclasses import replace

import numpy as np

from defecttune.dataset import load_bundled
from defecttune.evaluation import evaluate
from defecttune.learner import predict, train
from defecttune.params import CART, RF, ParamVector

manifest = load_bundled()
ant = manifest.triplet("antV0")
for role, ds in zip(("train", "tune", "test"), ant):
    print(f"{role:5s} {ds.name:10s} {ds.defective_count:4d} / {len(ds)} defective")

# defaults: every attribute per split, unbounded depth, 100 trees for RF
for kind in (CART, RF):
    model = train(ant.train, ParamVector.default(kind), seed=1)
    s = evaluate(ant.test.y, predict(model, ant.test))
    sizes = [t.n_leaves for t in model.trees]
    print(f"{kind:4s} trees={len(model.trees):3d} median leaves={np.median(sizes):.0f} "
          f"pd={s.pd:.3f} pf={s.pf:.3f} precision={s.precision:.3f} f={s.f:.3f}")

# the decision threshold trades detection against false alarms
model = train(ant.train, ParamVector.default(RF), seed=1)
for t in (0.2, 0.5, 0.8):
    s = evaluate(ant.test.y, predict(replace(model, threshold=t), ant.test))
    print(f"threshold {t:.1f}: pd={s.pd:.3f} pf={s.pf:.3f}")
