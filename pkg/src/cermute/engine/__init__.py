"""Multiset-rewriting execution engine."""

from .channels import COMPILED, WIRE, channel_rules, default_policy
from .compile import CompileError, compile_role_scripts, compile_script
from .matching import ApplyError, apply_rule, compile_rules, find_applications
from .replay import ReplayError, ReplayResult, replay_trace
from .run import AnalysisResult, GoalReport, analyze, enumerate_traces, memo_eval_safe

__all__ = [
    "AnalysisResult",
    "ApplyError",
    "COMPILED",
    "CompileError",
    "GoalReport",
    "ReplayError",
    "ReplayResult",
    "WIRE",
    "analyze",
    "apply_rule",
    "channel_rules",
    "compile_role_scripts",
    "compile_script",
    "compile_rules",
    "default_policy",
    "enumerate_traces",
    "find_applications",
    "memo_eval_safe",
    "replay_trace",
]
