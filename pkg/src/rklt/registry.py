"""Transform naming: T1..T4 (catalog), K<rho> (exact KLT), DCT."""
import re

from .approximations import catalog_entry
from .fast import factorization
from .markov import MarkovModel, dct_matrix, klt_matrix

_K = re.compile(r"^K(0?\.\d+)$")


def resolve(name, n=8):
    """Return (transform, factorization or None) for a transform name."""
    if name in ("T1", "T2", "T3", "T4"):
        return catalog_entry(name).transform, factorization(name)
    if name == "DCT":
        return dct_matrix(n), None
    m = _K.match(name)
    if m:
        return klt_matrix(MarkovModel(n, float(m.group(1)))), None
    raise KeyError(f"unknown transform {name!r}; use T1..T4, K<rho> (e.g. K0.8) or DCT")


def split_names(text):
    return [s.strip() for s in text.split(",") if s.strip()]
