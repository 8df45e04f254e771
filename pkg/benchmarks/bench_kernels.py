"""Time each hot kernel on the compiled extension and on the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Shapes match one desk-scale training batch (64 sentences of 8 words).
"""

import argparse
import timeit

import numpy as np

from s2vaudit import kernels


def cases(rng):
    P, T, S, H, E, K = 384, 14, 14, 50, 50, 100
    z = rng.normal(size=(P, 4 * H))
    c = rng.normal(size=(P, H))
    acts, _, tc, _ = kernels.python.lstm_forward(z, c)
    dh = rng.normal(size=(P, H))
    mem = rng.normal(size=(P, T, K))
    memA = rng.normal(size=(P, T, E))
    lengths = rng.integers(6, 15, size=P)
    steps = np.sort(rng.integers(6, 15, size=P))[::-1].copy()
    h = rng.normal(size=(P, S, E))
    alpha, ctx = kernels.python.attention_forward(memA, mem, lengths, h, steps)
    x = rng.normal(size=(60, 60))
    sym = x + x.T

    def att_bwd(mod):
        return lambda: mod.attention_backward(memA, mem, lengths, h, alpha, ctx, np.zeros_like(mem), np.zeros_like(memA), steps)

    return [
        ("lstm_forward", lambda m: (lambda: m.lstm_forward(z, c))),
        ("lstm_backward", lambda m: (lambda: m.lstm_backward(dh, dh, acts, c, tc))),
        ("attention_forward", lambda m: (lambda: m.attention_forward(memA, mem, lengths, h, steps))),
        ("attention_backward", att_bwd),
        ("jacobi_eigh 60x60", lambda m: (lambda: m.jacobi_eigh(sym, 1e-12, 100))),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if kernels.native is None:
        raise SystemExit("compiled extension not built; reinstall with Cython available")
    kernels.tune_allocator()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}  in use")
    for name, make in cases(rng):
        t = {}
        for label, mod in (("python", kernels.python), ("cython", kernels.native)):
            fn = make(mod)
            fn()
            t[label] = min(timeit.repeat(fn, number=1, repeat=args.repeat)) * 1e3
        attr = name.split()[0]
        used = "cython" if getattr(kernels, attr) is getattr(kernels.native, attr) else "python"
        print(f"{name:<20} {t['python']:>10.3f} {t['cython']:>10.3f} {t['python'] / t['cython']:>7.2f}x  {used}")


if __name__ == "__main__":
    main()
