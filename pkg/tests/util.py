"""Shared test helpers: deterministic keys, group builders, and the
brute-force verdict oracles the coordination tests compare against.

The oracles use integer arithmetic only and deliberately share no code
with the engine's evaluate().
"""

from __future__ import annotations

from fractions import Fraction

from didgov import crypto
from didgov.crypto import KeyPair
from didgov.model import (
    AclConfig,
    EditRightLevel,
    ExecutionMode,
    GovernanceGroup,
    NOfMConfig,
    TokenConfig,
    TurnoutConfig,
    VcConfig,
    WeightedConfig,
)
from didgov.registry import Registry

_pairs: dict[bytes, KeyPair] = {}


def pair(tag: str) -> KeyPair:
    """Key pair derived from a short label, cached across tests."""
    seed = tag.encode().ljust(32, b"\x00")[:32]
    if seed not in _pairs:
        _pairs[seed] = crypto.generate_keypair(seed)
    return _pairs[seed]


def controllers(count: int) -> list[KeyPair]:
    return [pair(f"ctrl-{i}") for i in range(count)]


def acl_group(
    members,
    group_id: int = 0,
    edit_right: EditRightLevel = EditRightLevel.DOCUMENT,
    coord=None,
    weights=None,
    execution: ExecutionMode = ExecutionMode.ON_CHAIN,
    time_limit=None,
) -> GovernanceGroup:
    return GovernanceGroup(
        group_id=group_id,
        edit_right=edit_right,
        authz_config=AclConfig(
            members=tuple(m.public_key if isinstance(m, KeyPair) else m for m in members),
            weights=weights,
        ),
        coord_config=coord if coord is not None else NOfMConfig(n=1, m=len(members)),
        execution=execution,
        time_limit=time_limit,
    )


def token_group(issuer: KeyPair, group_id: int = 0, coord=None, **kwargs) -> GovernanceGroup:
    return GovernanceGroup(
        group_id=group_id,
        edit_right=kwargs.pop("edit_right", EditRightLevel.DOCUMENT),
        authz_config=TokenConfig(trusted_issuers=(issuer.public_key,)),
        coord_config=coord if coord is not None else NOfMConfig(n=1, m=3),
        **kwargs,
    )


def vc_group(
    issuer: KeyPair, group_id: int = 0, coord=None, required_claims=None, **kwargs
) -> GovernanceGroup:
    return GovernanceGroup(
        group_id=group_id,
        edit_right=kwargs.pop("edit_right", EditRightLevel.DOCUMENT),
        authz_config=VcConfig(
            trusted_issuers=(issuer.public_key,),
            required_claims=required_claims if required_claims is not None else {"role": "voter"},
        ),
        coord_config=coord if coord is not None else NOfMConfig(n=1, m=3),
        **kwargs,
    )


def anchored(groups, did: str = "abc123", subject: KeyPair = None) -> tuple[Registry, str]:
    """Fresh registry with one document anchored under the given groups."""
    registry = Registry()
    subject = subject if subject is not None else pair("subject")
    registry.anchor(did, [subject.public_key], {}, tuple(groups))
    return registry, did


# --- verdict oracles ---------------------------------------------------------

def oracle_verdict(config, entries) -> str:
    """Brute-force resolution formula over (verdict, weight) pairs."""
    approvals = sum(1 for verdict, _ in entries if verdict == "approve")
    if isinstance(config, NOfMConfig):
        return "approve" if approvals >= config.n else "reject"
    if isinstance(config, WeightedConfig):
        total = sum(weight for verdict, weight in entries if verdict == "approve")
        return "approve" if total >= config.threshold else "reject"
    assert isinstance(config, TurnoutConfig)
    submitted = len(entries)
    if submitted < config.quorum:
        return "reject"
    num, den = Fraction(config.ratio).numerator, Fraction(config.ratio).denominator
    needed = -((-num * submitted) // den)  # ceil(num*s/den) in integers
    return "approve" if approvals >= needed else "reject"


def oracle_early_stop(config, entries):
    """Index after which the outcome is mathematically fixed, or None.

    Returns (index, verdict) of the first prefix that decides the tally,
    mirroring what per-decision early termination must produce.
    """
    if isinstance(config, TurnoutConfig):
        return None
    approvals = rejections = weight_sum = 0
    for index, (verdict, weight) in enumerate(entries):
        if verdict == "approve":
            approvals += 1
            weight_sum += weight
        else:
            rejections += 1
        if isinstance(config, NOfMConfig):
            if approvals >= config.n:
                return index, "approve"
            if rejections > config.m - config.n:
                return index, "reject"
        else:
            if weight_sum >= config.threshold:
                return index, "approve"
    return None
