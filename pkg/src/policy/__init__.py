"""Policy backends, prompt templates, action sampling and judge scoring."""

from policy.backends import PolicyBackend, PolicyRequest, fingerprint
from policy.generate import generate_action
from policy.http import EndpointConfig, HttpBackend
from policy.judge import JudgeScore, UnparsableScore, judge_evaluate, normalize_score
from policy.scripted import ScriptedBackend, ScriptRule, UnscriptedRequest
from policy.templates import PromptTemplate, TemplateName, load_template

__all__ = [
    "EndpointConfig",
    "HttpBackend",
    "JudgeScore",
    "PolicyBackend",
    "PolicyRequest",
    "PromptTemplate",
    "ScriptRule",
    "ScriptedBackend",
    "TemplateName",
    "UnparsableScore",
    "UnscriptedRequest",
    "fingerprint",
    "generate_action",
    "judge_evaluate",
    "load_template",
    "normalize_score",
]
