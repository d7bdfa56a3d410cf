"""Deterministic governance engine for group-controlled DID documents.

The registry is the entry point: anchor a document with its governance
groups, submit update proposals, collect controller decisions under the
group's coordination rules, and resolve. Every transaction is metered and
appended to an event log that replays to the exact same state.
"""

from .coord import BatchResult, DecisionBatch, ResolveReason, Tally
from .crypto import (
    BearerToken,
    KeyPair,
    TokenPresentation,
    VcPresentation,
    VerifiableCredential,
    generate_keypair,
    issue_token,
    issue_vc,
    present_vc,
)
from .errors import GovernanceError
from .metering import CATEGORIES, CostMeter, CostReport, CostSchedule
from .model import (
    AclConfig,
    AddGroup,
    AuthzKind,
    ChangeSet,
    CoordKind,
    Decision,
    Did,
    DidDocument,
    EditRightLevel,
    EventKind,
    ExecutionMode,
    GovernanceEvent,
    GovernanceGroup,
    NOfMConfig,
    ProposalStatus,
    RemoveGroup,
    ReplaceGroup,
    TokenConfig,
    TurnoutConfig,
    UpdateProposal,
    VcConfig,
    Verdict,
    WeightedConfig,
    apply_change_set,
)
from .registry import (
    Registry,
    RegistryState,
    build_decision,
    event_log_from_jsonl,
    event_log_to_jsonl,
    replay_events,
    snapshot_json,
    state_snapshot,
)

__version__ = "0.1.0"

__all__ = [
    "AclConfig",
    "AddGroup",
    "AuthzKind",
    "BatchResult",
    "BearerToken",
    "CATEGORIES",
    "ChangeSet",
    "CoordKind",
    "CostMeter",
    "CostReport",
    "CostSchedule",
    "Decision",
    "DecisionBatch",
    "Did",
    "DidDocument",
    "EditRightLevel",
    "EventKind",
    "ExecutionMode",
    "GovernanceError",
    "GovernanceEvent",
    "GovernanceGroup",
    "KeyPair",
    "NOfMConfig",
    "ProposalStatus",
    "Registry",
    "RegistryState",
    "RemoveGroup",
    "ReplaceGroup",
    "ResolveReason",
    "Tally",
    "TokenConfig",
    "TokenPresentation",
    "TurnoutConfig",
    "UpdateProposal",
    "VcConfig",
    "VcPresentation",
    "Verdict",
    "VerifiableCredential",
    "WeightedConfig",
    "apply_change_set",
    "build_decision",
    "event_log_from_jsonl",
    "event_log_to_jsonl",
    "generate_keypair",
    "issue_token",
    "issue_vc",
    "present_vc",
    "replay_events",
    "snapshot_json",
    "state_snapshot",
]
