"""Utilities for torch

Seeded sampling streams for the Monte Carlo rules and randomized checks.
Batches are drawn from one torch.Generator per stream, so a stream is
reproduced exactly from its seed regardless of how it is consumed.
"""
import logging
import torch

LOGGER = logging.getLogger(__name__)

STREAM_STRIDE = 1000003


def torch_settings(seed=1, use_gpu=False):
    """Pytorch settings"""
    if torch.cuda.is_available() and use_gpu:
        device = torch.device("cuda")
        torch.cuda.manual_seed(seed)
    else:
        device = torch.device("cpu")

    torch.manual_seed(seed)
    return device


def generator(seed, stream=0):
    """Generator of an independent stream keyed by (seed, stream)"""
    gen = torch.Generator()
    gen.manual_seed(int(seed) * STREAM_STRIDE + int(stream))
    return gen


def _batch_sizes(samples, batch_size):
    full, rest = divmod(int(samples), int(batch_size))
    return [batch_size] * full + ([rest] if rest else [])


def uniform_batches(samples, dim, seed, batch_size=100000, stream=0):
    """Yield numpy arrays (b, dim) of uniform samples on [0, 1)^dim"""
    gen = generator(seed, stream)
    for size in _batch_sizes(samples, batch_size):
        yield torch.rand((size, dim), generator=gen,
                         dtype=torch.float64).numpy()


def normal_batches(samples, dim, seed, batch_size=100000, stream=0):
    """Yield numpy arrays (b, dim) of standard normal samples"""
    gen = generator(seed, stream)
    for size in _batch_sizes(samples, batch_size):
        yield torch.randn((size, dim), generator=gen,
                          dtype=torch.float64).numpy()


def uniform_box(samples, lows, highs, seed, stream=0):
    """All samples of a uniform box in one array"""
    lows = torch.as_tensor(lows, dtype=torch.float64)
    highs = torch.as_tensor(highs, dtype=torch.float64)
    gen = generator(seed, stream)
    uniforms = torch.rand((int(samples), lows.numel()),
                          generator=gen,
                          dtype=torch.float64)
    return (lows + (highs - lows) * uniforms).numpy()
