"""Policy-level claim data: CSV ingestion and descriptive statistics."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .exceptions import DatasetError

HEADER = ("policy_id", "num_claims", "total_amount")


@dataclass(frozen=True)
class PolicyRecord:
    policy_id: int
    num_claims: int
    total_amount: float

    def __post_init__(self):
        if self.num_claims < 0:
            raise ValueError("num_claims must be nonnegative")
        if not (np.isfinite(self.total_amount) and self.total_amount >= 0):
            raise ValueError("total_amount must be a finite nonnegative number")
        if self.num_claims == 0 and self.total_amount != 0:
            raise ValueError("a policy without claims must have zero total amount")


class ClaimDataset:
    """An ordered collection of :class:`PolicyRecord`.

    Column arrays are exposed as ``policy_id``, ``num_claims`` and
    ``amounts``; ``n`` is the number of policies and ``n0`` the number with a
    zero total amount.
    """

    def __init__(self, records: Iterable[PolicyRecord]):
        self.records = list(records)
        self.policy_id = np.array([r.policy_id for r in self.records], dtype=np.int64)
        self.num_claims = np.array([r.num_claims for r in self.records], dtype=np.int64)
        self.amounts = np.array([r.total_amount for r in self.records], dtype=float)

    @classmethod
    def from_amounts(cls, amounts, num_claims=None):
        """Build a dataset from totals alone (claim counts default to 1 where positive)."""
        amounts = np.asarray(amounts, dtype=float).ravel()
        if num_claims is None:
            num_claims = (amounts > 0).astype(np.int64)
        return cls(
            PolicyRecord(i + 1, int(k), float(a))
            for i, (k, a) in enumerate(zip(num_claims, amounts))
        )

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def n0(self) -> int:
        return int(np.count_nonzero(self.amounts == 0))

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"ClaimDataset(n={self.n}, n0={self.n0})"

    def scaled(self, factor: float) -> "ClaimDataset":
        """Same policies with every amount divided by ``factor``."""
        return ClaimDataset(
            PolicyRecord(r.policy_id, r.num_claims, r.total_amount / factor)
            for r in self.records
        )


def load_csv(source) -> ClaimDataset:
    """Read ``policy_id,num_claims,total_amount`` rows from a path or text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return _parse(fh)
    return _parse(source)


def _parse(fh) -> ClaimDataset:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetError("empty file: no header row") from None
    if tuple(h.strip() for h in header) != HEADER:
        raise DatasetError(f"line 1: expected header {','.join(HEADER)}, got {','.join(header)}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise DatasetError(f"line {lineno}: expected 3 fields, got {len(row)}")
        try:
            rec = PolicyRecord(int(row[0]), int(row[1]), float(row[2]))
        except ValueError as exc:
            raise DatasetError(f"line {lineno}: {exc}") from None
        records.append(rec)
    if not records:
        raise DatasetError("dataset contains no records")
    return ClaimDataset(records)


def write_csv(dataset: ClaimDataset, dest) -> None:
    """Write a dataset in the format read by :func:`load_csv`."""
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            write_csv(dataset, fh)
        return
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(HEADER)
    for r in dataset.records:
        writer.writerow((r.policy_id, r.num_claims, repr(float(r.total_amount))))


def dataset_to_csv_text(dataset: ClaimDataset) -> str:
    buf = io.StringIO()
    write_csv(dataset, buf)
    return buf.getvalue()


@dataclass(frozen=True)
class Summary:
    n: int
    n_with_claims: int
    claims_mean: float
    claims_sd: float
    claims_min: float
    claims_max: float
    amount_mean: float
    amount_sd: float
    amount_min: float
    amount_max: float
    covariance: float

    def to_text(self) -> str:
        rows = [
            ("", "Number of claims", "Total claim amount"),
            ("Mean", f"{self.claims_mean:.3f}", f"{self.amount_mean:.2f}"),
            ("Standard deviation", f"{self.claims_sd:.3f}", f"{self.amount_sd:.2f}"),
            ("min", f"{self.claims_min:g}", f"{self.amount_min:.2f}"),
            ("max", f"{self.claims_max:g}", f"{self.amount_max:.2f}"),
        ]
        lines = [f"{a:<20}{b:>18}{c:>20}" for a, b, c in rows]
        lines.append(f"policies with claims: {self.n_with_claims} of {self.n}")
        lines.append(f"covariance(claims, amount): {self.covariance:.3f}")
        return "\n".join(lines)


def describe(dataset: ClaimDataset) -> Summary:
    """Means, standard deviations and extremes of counts and amounts.

    Spreads use the population (``ddof=0``) convention so that a single
    record has zero spread.
    """
    if dataset.n == 0:
        raise DatasetError("cannot describe an empty dataset")
    k = dataset.num_claims.astype(float)
    x = dataset.amounts
    return Summary(
        n=dataset.n,
        n_with_claims=int(np.count_nonzero(k > 0)),
        claims_mean=float(k.mean()),
        claims_sd=float(k.std()),
        claims_min=float(k.min()),
        claims_max=float(k.max()),
        amount_mean=float(x.mean()),
        amount_sd=float(x.std()),
        amount_min=float(x.min()),
        amount_max=float(x.max()),
        covariance=float(np.mean((k - k.mean()) * (x - x.mean()))),
    )
