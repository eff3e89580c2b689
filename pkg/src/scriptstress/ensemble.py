"""Pick one transcription per page from several OCR engines."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

from .backends import OcrCandidate

CONFIDENCE_TIE_TOL = 1e-9


def edit_distance(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Levenshtein distance with unit costs.

    Works on any sequences of hashable items: strings compare code points,
    lists of words compare tokens. Uses the bit-vector form of the DP
    recurrence (Myers 1999 / Hyyrö 2001), one column per item of ``b``, so
    page-length texts stay fast in pure Python.
    """
    if len(a) < len(b):
        a, b = b, a
    m = len(b)
    if m == 0:
        return len(a)
    # b is the (shorter) pattern held in the bit vectors
    peq: dict = {}
    for i, item in enumerate(b):
        peq[item] = peq.get(item, 0) | (1 << i)
    mask = (1 << m) - 1
    top = 1 << (m - 1)
    pv, mv, score = mask, 0, m
    for item in a:
        eq = peq.get(item, 0)
        xv = eq | mv
        xh = ((((eq & pv) + pv) & mask) ^ pv) | eq
        ph = (mv | ~(xh | pv)) & mask
        mh = pv & xh
        if ph & top:
            score += 1
        elif mh & top:
            score -= 1
        ph = ((ph << 1) | 1) & mask
        mh = (mh << 1) & mask
        pv = (mh | ~(xv | ph)) & mask
        mv = ph & xv
    return score


def similarity(a: Sequence[Hashable], b: Sequence[Hashable]) -> float:
    """1 - distance / longer length; two empty inputs are identical."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - edit_distance(a, b) / longest


class VoteMethod(str, enum.Enum):
    MAX_CONFIDENCE = "max_confidence"
    SIMILARITY_TIEBREAK = "similarity_tiebreak"
    PRIORITY_TIEBREAK = "priority_tiebreak"
    SOLE_CANDIDATE = "sole_candidate"


@dataclass(frozen=True)
class VotingResult:
    selected: OcrCandidate
    candidates: tuple[OcrCandidate, ...]
    method: VoteMethod


def _tied(values: dict, best: float) -> list:
    return [k for k, v in values.items() if best - v <= CONFIDENCE_TIE_TOL]


def vote(candidates: Sequence[OcrCandidate],
         priority: Mapping[str, int] | None = None) -> VotingResult:
    """Confidence vote with similarity, then priority, tie-breaks.

    ``priority`` maps backend_id to its rank (lower wins); backends missing
    from it fall back to ordering by backend_id so the result never depends
    on input order.
    """
    if not candidates:
        raise ValueError("vote needs at least one candidate")
    ids = [c.backend_id for c in candidates]
    if len(set(ids)) != len(ids):
        raise ValueError(f"duplicate backend ids among candidates: {sorted(ids)}")

    # canonical order first, so every later step is order-independent
    priority = priority or {}
    ordered = tuple(sorted(candidates, key=lambda c: (priority.get(c.backend_id, float("inf")), c.backend_id)))
    if len(ordered) == 1:
        return VotingResult(ordered[0], ordered, VoteMethod.SOLE_CANDIDATE)

    confs = {c.backend_id: c.confidence for c in ordered}
    leaders = _tied(confs, max(confs.values()))
    if len(leaders) == 1:
        return VotingResult(next(c for c in ordered if c.backend_id == leaders[0]),
                            ordered, VoteMethod.MAX_CONFIDENCE)

    by_id = {c.backend_id: c for c in ordered}
    agreement = {}
    for bid in leaders:
        text = by_id[bid].text
        others = [c.text for c in ordered if c.backend_id != bid]
        agreement[bid] = sum(similarity(text, o) for o in others) / len(others)
    finalists = _tied(agreement, max(agreement.values()))
    # ``ordered`` is already in priority order, so the first finalist wins
    winner = next(c for c in ordered if c.backend_id in finalists)
    # finalists sharing one text means similarity already decided the transcription
    decided = len({by_id[bid].text for bid in finalists}) == 1
    method = VoteMethod.SIMILARITY_TIEBREAK if decided else VoteMethod.PRIORITY_TIEBREAK
    return VotingResult(winner, ordered, method)
