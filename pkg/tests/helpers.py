import numpy as np

from gapedit.config import GapConfig
from gapedit.index import preprocess_y
from gapedit.layout import padded_symbols
from gapedit.matching import XReader
from gapedit.strings import Text


def small_index(y, k=4, seed=1, reps=2, **kw):
    return preprocess_y(np.asarray(y), GapConfig(k=k, seed=seed, reps=reps, **kw))


def reader(x, idx):
    cfg = idx.config
    core = padded_symbols(Text(np.asarray(x), cfg.alphabet_size), cfg.n_padded)
    return XReader(core, cfg.alphabet_size, cfg.prime)


def window_of(sym_ext, margin, start, length):
    return sym_ext[margin + start: margin + start + length]
