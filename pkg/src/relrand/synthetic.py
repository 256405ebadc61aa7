"""Synthetic gender/movie/genre tables with a planted viewing pattern.

``generate_structured`` builds three relations where men and women watch
clearly different movie blocks and the blocks carry different genre mixes.
``generate_anti`` builds structure-free counterparts with matching shapes,
used to localize which relation carries the pattern.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .relations import AttributeDomain, BinaryRelation, EngineError


@dataclass(frozen=True)
class SyntheticConfig:
    seed: int = 0
    n_men: int = 30
    n_women: int = 20
    n_movies: int = 100
    n_manly_movies: int = 60
    p_watch_match: float = 0.40
    p_watch_mismatch: float = 0.05
    n_genres: int = 6
    p_genre_match: float = 0.9

    def __post_init__(self) -> None:
        counts = (self.n_men, self.n_women, self.n_movies, self.n_genres)
        if any(c <= 0 for c in counts):
            raise EngineError("synthetic table sizes must be positive")
        if not 0 < self.n_manly_movies < self.n_movies:
            raise EngineError("n_manly_movies must split the movie range")
        probs = (self.p_watch_match, self.p_watch_mismatch, self.p_genre_match)
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise EngineError("probabilities must lie in [0, 1]")

    @property
    def n_users(self) -> int:
        return self.n_men + self.n_women


def _domains(cfg: SyntheticConfig):
    gender = AttributeDomain("Gender", ("M", "F"))
    users = AttributeDomain("User", tuple(f"u{i + 1}" for i in range(cfg.n_users)))
    movies = AttributeDomain("Movie", tuple(f"m{i + 1}" for i in range(cfg.n_movies)))
    genres = AttributeDomain("Genre", tuple(f"g{i + 1}" for i in range(cfg.n_genres)))
    return gender, users, movies, genres


def _rng(cfg: SyntheticConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(cfg.seed), stream)))


def _watch_matrix(cfg: SyntheticConfig, rng: np.random.Generator) -> np.ndarray:
    probs = np.empty((cfg.n_users, cfg.n_movies))
    probs[: cfg.n_men, : cfg.n_manly_movies] = cfg.p_watch_match
    probs[: cfg.n_men, cfg.n_manly_movies :] = cfg.p_watch_mismatch
    probs[cfg.n_men :, : cfg.n_manly_movies] = cfg.p_watch_mismatch
    probs[cfg.n_men :, cfg.n_manly_movies :] = cfg.p_watch_match
    return rng.random((cfg.n_users, cfg.n_movies)) < probs


def _genre_pairs(
    cfg: SyntheticConfig, rng: np.random.Generator, uniform: bool
) -> list[tuple[int, int]]:
    half = cfg.n_genres // 2
    edges = []
    for movie in range(cfg.n_movies):
        picks = set()
        for _ in range(2):
            if uniform:
                genre = int(rng.integers(0, cfg.n_genres))
            else:
                manly_side = movie < cfg.n_manly_movies
                if rng.random() >= cfg.p_genre_match:
                    manly_side = not manly_side
                if manly_side:
                    genre = int(rng.integers(0, half))
                else:
                    genre = int(rng.integers(half, cfg.n_genres))
            picks.add(genre)
        edges.extend((movie, genre) for genre in picks)
    return edges


def generate_structured(
    cfg: SyntheticConfig = SyntheticConfig(),
) -> tuple[BinaryRelation, BinaryRelation, BinaryRelation]:
    """The patterned tables: gender blocks, block-biased watching, sided genres."""
    gender, users, movies, genres = _domains(cfg)
    su_rows = np.zeros(cfg.n_users, dtype=np.int64)
    su_rows[cfg.n_men :] = 1
    su = BinaryRelation(
        gender, users, su_rows, np.arange(cfg.n_users, dtype=np.int64), name="SU"
    )
    um = BinaryRelation.from_dense(
        users, movies, _watch_matrix(cfg, _rng(cfg, 1)), name="UM"
    )
    mg = BinaryRelation.from_pairs(
        movies, genres, _genre_pairs(cfg, _rng(cfg, 2), uniform=False), name="MG"
    )
    return su, um, mg


def generate_anti(
    cfg: SyntheticConfig = SyntheticConfig(),
) -> tuple[BinaryRelation, BinaryRelation, BinaryRelation]:
    """Structure-free counterparts with the same shapes and gender counts."""
    gender, users, movies, genres = _domains(cfg)
    order = _rng(cfg, 3).permutation(cfg.n_users)
    rsu_rows = np.zeros(cfg.n_users, dtype=np.int64)
    rsu_rows[order[cfg.n_men :]] = 1
    rsu = BinaryRelation(
        gender, users, rsu_rows, np.arange(cfg.n_users, dtype=np.int64), name="rSU"
    )
    p_flat = (cfg.p_watch_match + cfg.p_watch_mismatch) / 2.0
    rum_dense = _rng(cfg, 4).random((cfg.n_users, cfg.n_movies)) < p_flat
    rum = BinaryRelation.from_dense(users, movies, rum_dense, name="rUM")
    rmg = BinaryRelation.from_pairs(
        movies, genres, _genre_pairs(cfg, _rng(cfg, 5), uniform=True), name="rMG"
    )
    return rsu, rum, rmg
