"""Full 4-variant ablation at the candidate criterion-6 config, 1 seed."""
import sys
import time

from hanfix.corpus import make_toy_benchmark
from hanfix.evaluation import DEFAULT_VARIANTS, run_ablation
from hanfix.training import TrainConfig

d = int(sys.argv[1]) if len(sys.argv) > 1 else 16
epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 60
seeds = tuple(int(s) for s in sys.argv[3].split(",")) if len(sys.argv) > 3 else (0,)
homophones = int(sys.argv[4]) if len(sys.argv) > 4 else 3
filler = float(sys.argv[5]) if len(sys.argv) > 5 else 0.2
lr = float(sys.argv[6]) if len(sys.argv) > 6 else 2e-3
fcp = float(sys.argv[7]) if len(sys.argv) > 7 else 0.5
gb = float(sys.argv[8]) if len(sys.argv) > 8 else 2.0

t0 = time.time()
bench = make_toy_benchmark(seed=0, holdout_confusors=False,
                           homophones=homophones, filler_rate=filler,
                           fuzzy_confusion_prob=fcp)
print(f"benchmark {time.time()-t0:.1f}s", flush=True)

over = {
    "d_c": d, "d_w": 16, "layers": 1, "heads": 2, "ffn_dim": 2 * d,
    "gate_dim": 16, "m_max": 8, "max_len": 64, "gate_bias_init": gb,
}
tconf = TrainConfig(lr=lr, batch_size=64, epochs=epochs)

rows = run_ablation(
    DEFAULT_VARIANTS,
    list(bench.train_pairs), list(bench.test_pairs),
    bench.lexicon, bench.ptable, bench.fuzzy,
    seeds=seeds, tconf=tconf, model_overrides=over,
    log=lambda m: print(f"  {m} [{time.time()-t0:.0f}s]", flush=True),
)
for row in rows:
    if row.error:
        print(f"{row.variant.name:12s} ERROR {row.error}")
        continue
    dp, dr, df = row.mean_detection
    cp, cr, cf = row.mean_correction
    print(f"{row.variant.name:12s} det P/R/F {dp:.3f}/{dr:.3f}/{df:.3f}  "
          f"corr P/R/F {cp:.3f}/{cr:.3f}/{cf:.3f}")
print(f"total {time.time()-t0:.0f}s")
