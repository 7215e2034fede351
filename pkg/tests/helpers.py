"""Random cooperative games realized as (player set, window, predictor).

Each player p gets a level h_p: the explained window equals mu + h_p on p's
cells, so under mean masking the player's mean deviation g_p is h_p when p is
present and 0 when masked. A polynomial in g therefore defines the set
function v(S) in closed form, which the oracles consume directly.
"""

import itertools

import numpy as np

from groupseg.attribution import MaskingBaseline
from groupseg.players import build_players


def random_layout(rng, n_players, D=2, T=None):
    T = T or 3 * n_players
    sizes = [n_players // D + (1 if k < n_players % D else 0) for k in range(D)]
    groups = [(k,) for k in range(D) if sizes[k] > 0]
    segs = []
    for k in range(len(groups)):
        cuts = sorted(rng.choice(np.arange(1, T), sizes[k] - 1, replace=False).tolist())
        b = [0, *cuts, T]
        segs.append(list(zip(b[:-1], b[1:])))
    return build_players(groups, segs, T, len(groups))


class PolyGame:
    """``f = sum_p a_p g_p + sum_{p<q} c_pq g_p g_q + sum_{p<q<r} e_pqr g_p g_q g_r``."""

    def __init__(self, seed, n_players, cubic=True, D=2):
        rng = np.random.default_rng(seed)
        self.ps = random_layout(rng, n_players, D=min(D, n_players))
        n = len(self.ps)
        self.n = n
        self.mu = rng.normal(size=self.ps.D)
        self.baseline = MaskingBaseline("mean", self.mu)
        self.h = rng.uniform(0.5, 2.0, n) * rng.choice([-1, 1], n)
        self.a = rng.normal(size=n)
        self.c = {pq: rng.normal() for pq in itertools.combinations(range(n), 2)}
        self.e = {pqr: rng.normal() * 0.5 for pqr in itertools.combinations(range(n), 3)} \
            if cubic else {}
        self.window = self.mu + self.h[self.ps.owner]
        onehot = np.stack([(self.ps.owner == p).ravel() for p in range(n)], axis=1)
        self._avg = onehot / onehot.sum(axis=0)
        self._pairs = np.array(list(self.c), dtype=int).reshape(-1, 2)
        self._cv = np.array(list(self.c.values()))
        self._triples = np.array(list(self.e), dtype=int).reshape(-1, 3)
        self._ev = np.array(list(self.e.values()))

    def poly(self, g):
        g = np.atleast_2d(g)
        out = g @ self.a
        if self._cv.size:
            out = out + (g[:, self._pairs[:, 0]] * g[:, self._pairs[:, 1]]) @ self._cv
        if self._ev.size:
            t = self._triples
            out = out + (g[:, t[:, 0]] * g[:, t[:, 1]] * g[:, t[:, 2]]) @ self._ev
        return out

    def __call__(self, batch):
        x = np.asarray(batch, float)
        g = (x - self.mu).reshape(x.shape[0], -1) @ self._avg
        return self.poly(g)

    def value(self, coalition):
        g = np.array([self.h[p] if p in coalition else 0.0 for p in range(self.n)])
        return float(self.poly(g)[0])
