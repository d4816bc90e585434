"""Simulated order agreement among clients.

Each client draws a pseudo-random number from its own sub-seed; sorting the
draws ranks the clients. In a deployment the sub-seeds would come from
pairwise key exchange; here they are derived from one run seed.
"""
import numpy as np

from ..errors import DomainError


def _draw(seed, client, attempt):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(client), int(attempt)))
    return float(np.random.default_rng(ss).random())


def permutation_from_draws(draws):
    """1-based rank of every draw in ascending order."""
    draws = np.asarray(draws, dtype=np.float64)
    if len(np.unique(draws)) != len(draws):
        raise DomainError("draws must be distinct")
    ranks = np.empty(len(draws), dtype=np.int64)
    ranks[np.argsort(draws)] = np.arange(1, len(draws) + 1)
    return tuple(int(r) for r in ranks)


def order_agreement(L, seed):
    """Permutation Pi as a tuple; client i (0-based) gets rank Pi[i] in [1, L]."""
    if L < 1:
        raise DomainError("need at least one client")
    attempts = [0] * L
    draws = [_draw(seed, i, 0) for i in range(L)]
    while len(set(draws)) != L:
        seen = set()
        for i, d in enumerate(draws):
            if d in seen:
                attempts[i] += 1
                draws[i] = _draw(seed, i, attempts[i])
            seen.add(d)
    return permutation_from_draws(draws)


def sequence_positions(rank):
    """1-based B_h positions (minus label, plus label) for a client of this rank."""
    return 2 * int(rank) - 1, 2 * int(rank)
