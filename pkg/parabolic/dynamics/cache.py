"""
Fixed Point Cache

Distinct fixed points of f^n, with multiplicities and multipliers, stored in
an SQLite file under (map fingerprint, n). Large iterates are the expensive
part of the periodic search, and the same maps come back run after run.
"""

from __future__ import annotations

import json
import os
from datetime import datetime, timedelta
from typing import Optional, Sequence

import sqlite3

import numpy as np

from .model import FixedPointSet

__all__ = ['SqliteOrbitCache']

SQLITE_TIMEOUT = 5.0  # secs
G_DEFAULT_TTL = timedelta(days=31)

_SCHEMA = '''
    CREATE TABLE IF NOT EXISTS fixed_points (
        fingerprint    TEXT        NOT NULL,
        n              INTEGER     NOT NULL,
        points         TEXT        NOT NULL,
        multiplicities TEXT        NOT NULL,
        multipliers    TEXT        NOT NULL,
        has_infinity   INTEGER     NOT NULL DEFAULT 0,
        last_seen      TIMESTAMP   NOT NULL DEFAULT CURRENT_TIMESTAMP,
        ttl_secs       NUMERIC     NOT NULL,
        PRIMARY KEY (fingerprint, n)
    )
'''


def _encode(values: np.ndarray) -> str:
    return json.dumps([[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex)])


def _decode(text: str) -> np.ndarray:
    return np.array([complex(re, im) for re, im in json.loads(text)], dtype=complex)


class SqliteOrbitCache:
    """
    FixedPointSet store keyed by map fingerprint and iterate. Entries live for
    their ttl after the last read or write; expire() drops the stale ones.
    Every operation on a closed cache trips an AssertionError.
    """

    @classmethod
    def open(cls, cache_file: str) -> SqliteOrbitCache:
        """
        :param cache_file: sqlite file; created with its table when missing
        """
        fresh = not os.path.isfile(cache_file)
        conn = sqlite3.connect(cache_file, timeout=SQLITE_TIMEOUT, detect_types=sqlite3.PARSE_DECLTYPES,
                               isolation_level=None)
        conn.row_factory = sqlite3.Row
        if fresh:
            conn.execute(_SCHEMA)

        return cls(conn)

    def __init__(self, conn: sqlite3.Connection):
        self.__conn: Optional[sqlite3.Connection] = conn

    def __enter__(self) -> SqliteOrbitCache:
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    def __len__(self) -> int:
        return self._fetch('SELECT COUNT(*) AS total FROM fixed_points', ())['total']

    def is_open(self) -> bool:
        return self.__conn is not None

    @property
    def _conn(self) -> sqlite3.Connection:
        assert self.is_open(), 'orbit cache used after close()'
        return self.__conn

    def _run(self, sql: str, params: Sequence = ()) -> int:
        """
        :return: number of rows touched by the statement
        """
        cur = self._conn.execute(sql, params)
        try:
            return cur.rowcount
        finally:
            cur.close()

    def _fetch(self, sql: str, params: Sequence) -> Optional[sqlite3.Row]:
        cur = self._conn.execute(sql, params)
        try:
            return cur.fetchone()
        finally:
            cur.close()

    def get(self, fingerprint: str, n: int) -> Optional[FixedPointSet]:
        """
        :param fingerprint: RationalMap.fingerprint()
        :param n: iterate
        :return: the stored fixed points of f^n, or None on a miss
        """
        row = self._fetch('SELECT points, multiplicities, multipliers, has_infinity FROM fixed_points '
                          'WHERE fingerprint=? AND n=?', (fingerprint, n))
        if row is None:
            return None

        self._run('UPDATE fixed_points SET last_seen=? WHERE fingerprint=? AND n=?',
                  (datetime.utcnow(), fingerprint, n))
        return FixedPointSet(
            n,
            _decode(row['points']),
            np.array(json.loads(row['multiplicities']), dtype=int),
            _decode(row['multipliers']),
            bool(row['has_infinity']),
        )

    def put(self, fingerprint: str, n: int, fixed: FixedPointSet, ttl: timedelta = G_DEFAULT_TTL):
        """
        Store (or overwrite) the fixed points of f^n
        """
        self._run(
            'REPLACE INTO fixed_points(fingerprint, n, points, multiplicities, multipliers, has_infinity, ttl_secs) '
            'VALUES(?, ?, ?, ?, ?, ?, ?)',
            (fingerprint, n, _encode(fixed.points), json.dumps([int(m) for m in fixed.multiplicities]),
             _encode(fixed.multipliers), int(fixed.has_infinity), ttl.total_seconds()))

    def remove(self, fingerprint: str, n: int) -> bool:
        """
        :return: whether an entry existed
        """
        return self._run('DELETE FROM fixed_points WHERE fingerprint=? AND n=?', (fingerprint, n)) > 0

    def expire(self) -> int:
        """
        :return: number of entries whose ttl ran out
        """
        return self._run("DELETE FROM fixed_points "
                         "WHERE DATETIME(last_seen, '+'||ttl_secs||' seconds') <= CURRENT_TIMESTAMP")

    def clear(self):
        # noinspection SqlWithoutWhere
        self._run('DELETE FROM fixed_points')

    def close(self):
        if self.__conn is not None:
            self.__conn.close()
            self.__conn = None
