"""Matching-rate evaluation across the three model variants.

Trains a without-weighting model (V) and a with-weighting model (R) briefly,
then scores all three evaluation modes on held-out motifs: V and R decode
every label with the network; RR reuses the R model but routes StR and TrR
through the exact rule branches, which pins those two rates at 1.00.

A short demo run keeps the neural rates modest; the acceptance suite trains
longer and checks the RR >= R >= V ordering.
"""

from motifrep.dataset import build_dataset, split
from motifrep.evaluate import evaluate_variant
from motifrep.model import ModelConfig, train
from motifrep.synthetic import synthetic_corpus

corpus = synthetic_corpus(songs_per_type=60, seed=0)
train_set, test_set = split(build_dataset(corpus).samples, holdout_songs=40, seed=0)
motifs = [s.input for s in test_set]
print(f"{len(train_set)} training samples, {len(motifs)} evaluation motifs")

config = ModelConfig(layers=2, hidden=32, feed_forward=128,
                     embedding_sizes=(8, 16, 4, 4, 32, 8, 8), label_embedding=16,
                     max_steps=250, batch_size=32, learning_rate=1e-3, seed=0)
model_v, _ = train(train_set, config, "V")
model_r, _ = train(train_set, config, "R")

for tag, model in (("V", model_v), ("R", model_r), ("RR", model_r)):
    report = evaluate_variant(tag, model, motifs)
    print()
    print(report.table())
