"""Channel-rule generation.

Each channel type yields a send/receive rule pair connecting a wire fact
to a delivery fact. With replay allowed the delivery fact is persistent
(a stored message can be delivered again later); without replay it is
linear and usable once. Environment rules that let an outsider alter the
alterable fields of non-secure channels (sender for insec/conf) are
generated only on request and are off by default: the bundled ceremony
uses secure channels throughout.
"""

from __future__ import annotations

from .. import terms
from ..rules import RewriteRule

_SUFFIX = {"sec": "S", "auth": "A", "conf": "C", "insec": "I"}
_DELIVERY = {"sec": "Sec", "auth": "Auth", "conf": "Conf", "insec": "Insec"}

WIRE = "wire"  # SndS($A,$B,xn,x) / RcvS(...) shapes
COMPILED = "compiled"  # Out_sec($A,$B,m) / In_sec(...) shapes


def default_policy() -> dict:
    return {ch: True for ch in _SUFFIX}


def channel_rules(policy=None, attacker: bool = False, style: str = WIRE) -> list:
    """Send/receive rule pairs for every channel in the policy.

    policy maps channel type to a replay flag (True = persistent
    delivery fact).
    """
    if policy is None:
        policy = default_policy()
    out = []
    a, b = terms.pvar("A"), terms.pvar("B")
    for channel in ("sec", "auth", "conf", "insec"):
        if channel not in policy:
            continue
        replay = policy[channel]
        suffix = _SUFFIX[channel]
        delivery = ("!" if replay else "") + _DELIVERY[channel]
        if style == WIRE:
            xn, x = terms.mvar("xn"), terms.mvar("x")
            args = (a, b, xn, x)
            snd_in, rcv_out = f"Snd{suffix}", f"Rcv{suffix}"
        else:
            m = terms.mvar("m")
            args = (a, b, m)
            snd_in, rcv_out = f"Out_{channel}", f"In_{channel}"
        out.append(
            RewriteRule(
                f"ChanSnd{suffix}",
                ((snd_in, args),),
                ((f"ChanSnd{suffix}", args),),
                ((delivery, args),),
            )
        )
        out.append(
            RewriteRule(
                f"ChanRcv{suffix}",
                ((delivery, args),),
                ((f"ChanRcv{suffix}", args),),
                ((rcv_out, args),),
            )
        )
        if attacker and channel in ("insec", "conf"):
            # the environment may re-attribute the sender; payload
            # alteration would need attacker deduction, which is out of
            # scope for delivery semantics
            env = terms.pvar("EnvSender")
            forged = (env,) + args[1:]
            out.append(
                RewriteRule(
                    f"EnvSender{suffix}",
                    ((delivery, args),),
                    ((f"EnvSender{suffix}", args),),
                    ((delivery, forged),),
                )
            )
    return out
