"""Cost benchmarking: run the standard anchor → propose → vote → resolve
workflow over a grid of governance configurations and collect per-phase
cost reports.

Conventions shared by every grid point, chosen so the phases stay
comparable:

- every group on the document gets the same configuration;
- the proposal is a key rotation submitted by the first controller;
- the vote phase is a single Approve from the *last* controller (worst
  case for a membership scan) with thresholds set so one vote is never
  decisive;
- resolution is forced manually, isolating its cost from voting.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

from . import crypto
from .coord import DecisionBatch
from .crypto import KeyPair
from .metering import CATEGORIES, CostReport, CostSchedule
from .model import (
    AclConfig,
    AuthzKind,
    ChangeSet,
    CoordKind,
    Did,
    ExecutionMode,
    GovernanceGroup,
    EditRightLevel,
    NOfMConfig,
    TokenConfig,
    TurnoutConfig,
    VcConfig,
    Verdict,
    WeightedConfig,
)
from .registry import Registry, build_decision

PHASES = ("anchor", "propose", "vote", "resolve")

CSV_COLUMNS = ("phase", "groups", "members", "authz", "coord", "execution", "time", "total") + CATEGORIES

_ISSUER_SEED = b"I" * 32
_SUBJECT_SEED = b"S" * 32
_ROTATED_SEED = b"R" * 32

_keypair_cache: dict[bytes, KeyPair] = {}


def _keypair(seed: bytes) -> KeyPair:
    pair = _keypair_cache.get(seed)
    if pair is None:
        pair = crypto.generate_keypair(seed)
        _keypair_cache[seed] = pair
    return pair


def _controller(index: int) -> KeyPair:
    return _keypair(b"C" * 28 + index.to_bytes(4, "big"))


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian grid over the governance aspects."""

    groups: tuple[int, ...] = (1, 2, 3)
    members: tuple[int, ...] = (1, 2, 3)
    authz: tuple[AuthzKind, ...] = (AuthzKind.ACL,)
    coord: tuple[CoordKind, ...] = (CoordKind.NOFM,)
    execution: tuple[ExecutionMode, ...] = (ExecutionMode.ON_CHAIN,)
    time_limits: tuple[Optional[int], ...] = (None,)

    def points(self):
        for g in self.groups:
            for mc in self.members:
                for a in self.authz:
                    for c in self.coord:
                        for e in self.execution:
                            for t in self.time_limits:
                                yield g, mc, a, c, e, t


def _authz_config(kind: AuthzKind, members: int, coord_kind: CoordKind, issuer: KeyPair) -> object:
    if kind is AuthzKind.ACL:
        keys = tuple(_controller(i).public_key for i in range(members))
        # the weights array is only stored for weighted coordination
        weights = tuple(1 for _ in range(members)) if coord_kind is CoordKind.WEIGHTED else None
        return AclConfig(members=keys, weights=weights)
    if kind is AuthzKind.TOKEN:
        return TokenConfig(trusted_issuers=(issuer.public_key,))
    return VcConfig(trusted_issuers=(issuer.public_key,), required_claims={"role": "voter"})


def _coord_config(kind: CoordKind, members: int) -> object:
    # thresholds of 2 keep the single benchmark vote from terminating early
    if kind is CoordKind.NOFM:
        return NOfMConfig(n=2, m=max(2, members))
    if kind is CoordKind.TURNOUT_SENSITIVE:
        return TurnoutConfig(quorum=2, ratio=Fraction(1, 2))
    return WeightedConfig(threshold=2)


def _credential(
    kind: AuthzKind,
    controller: KeyPair,
    issuer: KeyPair,
    did: Did,
    proposal_id: int,
    nonce_tag: bytes,
):
    if kind is AuthzKind.ACL:
        return None
    if kind is AuthzKind.TOKEN:
        nonce = nonce_tag.ljust(crypto.NONCE_LEN, b"\x00")[: crypto.NONCE_LEN]
        return crypto.TokenPresentation(token=crypto.issue_token(issuer, nonce))
    vc = crypto.issue_vc(issuer, controller.public_key, {"role": "voter"})
    return crypto.present_vc(vc, controller, did, proposal_id)


def run_workflow(
    groups: int,
    members: int,
    authz_kind: AuthzKind,
    coord_kind: CoordKind,
    execution: ExecutionMode,
    time_limit: Optional[int],
    schedule: Optional[CostSchedule] = None,
) -> dict[str, CostReport]:
    """One grid point: fresh registry, four phases, one report each."""
    registry = Registry(schedule=schedule)
    issuer = _keypair(_ISSUER_SEED)
    subject = _keypair(_SUBJECT_SEED)
    did = Did(subject.public_key.hex())
    group_list = tuple(
        GovernanceGroup(
            group_id=i,
            edit_right=EditRightLevel.DOCUMENT,
            authz_config=_authz_config(authz_kind, members, coord_kind, issuer),
            coord_config=_coord_config(coord_kind, members),
            execution=execution,
            time_limit=time_limit,
        )
        for i in range(groups)
    )
    reports: dict[str, CostReport] = {}

    registry.anchor(did, [subject.public_key], {}, group_list)
    reports["anchor"] = registry.reports[-1]

    proposer = _controller(0)
    change = ChangeSet(new_public_keys=(_keypair(_ROTATED_SEED).public_key,))
    credential = _credential(authz_kind, proposer, issuer, did, 0, b"propose")
    proposal_id = registry.propose(did, 0, change, proposer.public_key, credential)
    reports["propose"] = registry.reports[-1]

    voter = _controller(members - 1)  # last member: full membership scan
    credential = _credential(authz_kind, voter, issuer, did, proposal_id, b"vote")
    decision = build_decision(
        voter, did, proposal_id, 1, Verdict.APPROVE, credential=credential
    )
    if execution is ExecutionMode.ON_CHAIN:
        registry.decide(decision)
    else:
        registry.decide_batch(DecisionBatch(proposal_id=proposal_id, decisions=(decision,)))
    reports["vote"] = registry.reports[-1]

    registry.resolve_manual(proposal_id)
    reports["resolve"] = registry.reports[-1]
    return reports


def sweep(grid: SweepGrid, schedule: Optional[CostSchedule] = None) -> list[CostReport]:
    """Run the workflow at every grid point; reports carry their governance
    dimensions and are labelled by phase."""
    out: list[CostReport] = []
    for g, mc, a, c, e, t in grid.points():
        dimensions = {
            "groups": g,
            "members": mc,
            "authz": a.value,
            "coord": c.value,
            "execution": e.value,
            "time": "unlimited" if t is None else t,
        }
        phase_reports = run_workflow(g, mc, a, c, e, t, schedule=schedule)
        for phase in PHASES:
            out.append(
                replace(phase_reports[phase], transaction_label=phase, dimensions=dimensions)
            )
    return out


def reports_to_csv(reports: Sequence[CostReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        dims = report.dimensions
        writer.writerow(
            [
                report.transaction_label,
                dims.get("groups", ""),
                dims.get("members", ""),
                dims.get("authz", ""),
                dims.get("coord", ""),
                dims.get("execution", ""),
                dims.get("time", ""),
                report.total,
            ]
            + [report.units(category) for category in CATEGORIES]
        )
    return buffer.getvalue()


def write_csv(reports: Sequence[CostReport], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(reports_to_csv(reports))


# --- off-chain aggregation comparison ---------------------------------------

def batch_comparison(
    k_values: Sequence[int] = tuple(range(2, 11)),
    members: int = 10,
    groups: int = 1,
    schedule: Optional[CostSchedule] = None,
) -> list[tuple[int, int, int]]:
    """For each k: total cost of k individual on-chain decisions vs one
    off-chain aggregate of the same k decisions.

    Turnout-sensitive coordination is used because it never terminates
    early, so both sides tally exactly k decisions with no resolution
    riding along.
    """
    out = []
    for k in k_values:
        individual = _decision_phase_total(k, members, groups, ExecutionMode.ON_CHAIN, schedule)
        aggregated = _decision_phase_total(k, members, groups, ExecutionMode.OFF_CHAIN, schedule)
        out.append((k, individual, aggregated))
    return out


def _decision_phase_total(
    k: int,
    members: int,
    groups: int,
    execution: ExecutionMode,
    schedule: Optional[CostSchedule],
) -> int:
    """Summed decision-submission cost for k approvals under one config."""
    registry = Registry(schedule=schedule)
    subject = _keypair(_SUBJECT_SEED)
    did = Did(subject.public_key.hex())
    group_list = tuple(
        GovernanceGroup(
            group_id=i,
            edit_right=EditRightLevel.DOCUMENT,
            authz_config=AclConfig(members=tuple(_controller(i).public_key for i in range(members))),
            coord_config=TurnoutConfig(quorum=2, ratio=Fraction(1, 2)),
            execution=execution,
        )
        for i in range(groups)
    )
    registry.anchor(did, [subject.public_key], {}, group_list)
    proposer = _controller(0)
    change = ChangeSet(new_public_keys=(_keypair(_ROTATED_SEED).public_key,))
    proposal_id = registry.propose(did, 0, change, proposer.public_key)
    decisions = tuple(
        build_decision(_controller(i), did, proposal_id, 1, Verdict.APPROVE) for i in range(k)
    )
    before = len(registry.reports)
    if execution is ExecutionMode.ON_CHAIN:
        for decision in decisions:
            registry.decide(decision)
    else:
        registry.decide_batch(DecisionBatch(proposal_id=proposal_id, decisions=decisions))
    return sum(report.total for report in registry.reports[before:])
