"""MovieLens-100K ingestion into binary relations.

Reads the distribution's ``u.data``, ``u.item``, ``u.user``, ``u.genre`` and
``u.occupation`` files and produces:

    UM  user x movie       an edge per rated (hence watched) movie
    MG  movie x genre      the 18 named genres; the "unknown" flag is dropped
    UO  user x occupation
    US  user x gender
    UA  user x age-slot    identity; each slot carries the user's age value

Movies left with no genre after dropping "unknown" are removed from both UM
and MG; the realized movie count is recorded rather than enforced. Rating
values and timestamps are ignored beyond establishing the edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .relations import AttributeDomain, BinaryRelation, EngineError


class IngestError(EngineError):
    """A source file is missing or malformed."""


UNKNOWN_GENRE = "unknown"


@dataclass(frozen=True)
class MovieLensTables:
    um: BinaryRelation
    mg: BinaryRelation
    uo: BinaryRelation
    us: BinaryRelation
    ua: BinaryRelation
    dropped_movies: tuple[str, ...]

    def summary(self) -> str:
        lines = [
            f"UM {self.um.n_rows}x{self.um.n_cols}, "
            f"{self.um.edge_count / max(1, self.um.n_rows):.1f} ones/row",
            f"MG {self.mg.n_rows}x{self.mg.n_cols}, "
            f"{self.mg.edge_count / max(1, self.mg.n_rows):.1f} ones/row",
            f"UO {self.uo.n_rows}x{self.uo.n_cols}",
            f"US {self.us.n_rows}x{self.us.n_cols}",
            f"UA {self.ua.n_rows}x{self.ua.n_cols}",
        ]
        if self.dropped_movies:
            lines.append(
                f"dropped {len(self.dropped_movies)} movies with no named genre: "
                + ", ".join(self.dropped_movies[:5])
                + ("..." if len(self.dropped_movies) > 5 else "")
            )
        return "\n".join(lines)


def _require(path: Path) -> Path:
    if not path.is_file():
        raise IngestError(f"missing MovieLens file: {path}")
    return path


def _split(path: Path, lineno: int, line: str, sep: str, minparts: int) -> list[str]:
    parts = line.split(sep)
    if len(parts) < minparts:
        raise IngestError(
            f"{path}:{lineno}: expected at least {minparts} "
            f"'{sep}'-separated fields, got {len(parts)}"
        )
    return parts


def _read_listing(path: Path) -> list[str]:
    """Names from a 'name|index' listing file, ordered by index."""
    entries: list[tuple[int, str]] = []
    with open(path, encoding="iso-8859-1") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("|")
            name = parts[0].strip()
            if len(parts) > 1 and parts[1].strip():
                try:
                    idx = int(parts[1])
                except ValueError:
                    raise IngestError(f"{path}:{lineno}: bad index '{parts[1]}'") from None
            else:
                idx = len(entries)
            entries.append((idx, name))
    entries.sort()
    return [name for _, name in entries]


def load_movielens(data_dir) -> MovieLensTables:
    """Build the binary relations from a MovieLens-100K directory."""
    root = Path(data_dir)
    data_path = _require(root / "u.data")
    item_path = _require(root / "u.item")
    user_path = _require(root / "u.user")
    genre_path = _require(root / "u.genre")
    occupation_path = _require(root / "u.occupation")

    genre_names = _read_listing(genre_path)
    if UNKNOWN_GENRE in genre_names:
        unknown_idx = genre_names.index(UNKNOWN_GENRE)
    else:
        unknown_idx = None
    named_genres = [g for g in genre_names if g != UNKNOWN_GENRE]

    occupations = _read_listing(occupation_path)

    user_ids: list[str] = []
    user_age: dict[str, int] = {}
    user_gender: dict[str, str] = {}
    user_occupation: dict[str, str] = {}
    with open(user_path, encoding="iso-8859-1") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = _split(user_path, lineno, line, "|", 5)
            uid, age, gender, occupation = parts[0], parts[1], parts[2], parts[3]
            try:
                user_age[uid] = int(age)
            except ValueError:
                raise IngestError(f"{user_path}:{lineno}: bad age '{age}'") from None
            if uid in user_gender:
                raise IngestError(f"{user_path}:{lineno}: duplicate user id '{uid}'")
            user_ids.append(uid)
            user_gender[uid] = gender
            user_occupation[uid] = occupation

    movie_genres: dict[str, list[int]] = {}
    dropped: list[str] = []
    with open(item_path, encoding="iso-8859-1") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = _split(item_path, lineno, line, "|", 5 + len(genre_names))
            mid = parts[0]
            flags = parts[-len(genre_names):]
            try:
                flag_values = [int(f) for f in flags]
            except ValueError:
                raise IngestError(
                    f"{item_path}:{lineno}: non-binary genre flags"
                ) from None
            genre_idx = [
                g for g, v in enumerate(flag_values) if v and g != unknown_idx
            ]
            if genre_idx:
                movie_genres[mid] = genre_idx
            else:
                dropped.append(mid)

    users = AttributeDomain("User", tuple(user_ids))
    movies = AttributeDomain("Movie", tuple(movie_genres))
    genres = AttributeDomain("Genre", tuple(named_genres))
    genders = AttributeDomain("Gender", ("M", "F"))
    occupation_domain = AttributeDomain("Occupation", tuple(occupations))
    # age slots stay one per user so equal ages remain distinct destinations
    ages = AttributeDomain(
        "Age",
        tuple(f"a{uid}" for uid in user_ids),
        tuple(float(user_age[uid]) for uid in user_ids),
    )

    named_index = {g: i for i, g in enumerate(named_genres)}
    mg_edges = [
        (movies.index_of(mid), named_index[genre_names[g]])
        for mid, idx in movie_genres.items()
        for g in idx
    ]
    mg = BinaryRelation.from_pairs(movies, genres, mg_edges, name="MG")

    dropped_set = set(dropped)
    um_edges: set[tuple[int, int]] = set()
    with open(data_path, encoding="iso-8859-1") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = _split(data_path, lineno, line, "\t", 3)
            uid, mid = parts[0], parts[1]
            if uid not in user_gender:
                raise IngestError(f"{data_path}:{lineno}: unknown user '{uid}'")
            if mid not in movie_genres:
                if mid in dropped_set:
                    continue
                raise IngestError(f"{data_path}:{lineno}: unknown movie '{mid}'")
            um_edges.add((users.index_of(uid), movies.index_of(mid)))
    um = BinaryRelation.from_pairs(users, movies, sorted(um_edges), name="UM")

    gender_index = {"M": 0, "F": 1}
    try:
        us_edges = [
            (i, gender_index[user_gender[uid]]) for i, uid in enumerate(user_ids)
        ]
    except KeyError as exc:
        raise IngestError(f"{user_path}: unknown gender code {exc}") from None
    us = BinaryRelation.from_pairs(users, genders, us_edges, name="US")

    occupation_index = {o: i for i, o in enumerate(occupations)}
    uo_edges = []
    for i, uid in enumerate(user_ids):
        occ = user_occupation[uid]
        if occ not in occupation_index:
            raise IngestError(
                f"{user_path}: user '{uid}' has unlisted occupation '{occ}'"
            )
        uo_edges.append((i, occupation_index[occ]))
    uo = BinaryRelation.from_pairs(users, occupation_domain, uo_edges, name="UO")

    idx = np.arange(users.size, dtype=np.int64)
    ua = BinaryRelation(users, ages, idx, idx.copy(), name="UA")

    return MovieLensTables(um=um, mg=mg, uo=uo, us=us, ua=ua, dropped_movies=tuple(dropped))
