"""Guided fix-and-resolve agent: routing, objective generation,
variable-selection guides, the iteration loop and its summary."""

from .guides import (
    DeterministicGuide,
    GuideContext,
    LlmGuide,
    fixed_fraction,
    objective_tokens,
    sensitivity_scores,
)
from .indicator import (
    DEFAULT_REGISTRY,
    IndicatorResult,
    MatchResult,
    extract_objective_source,
    indicator_generate,
    problem_match,
)
from .llm import ChatClient, LlmConfig, LlmError, ReplayClient, save_transcript
from .loop import (
    build_agent_model,
    needs_price_grid,
    response_format,
    run_agent,
    satisfaction_score,
)
from .prompts import GRAMMAR_SUMMARY, PromptTemplates, render_indicator, render_tailor
from .types import (
    AgentConfig,
    AgentError,
    AgentTrace,
    GuideProposal,
    HistoryRecord,
    HistoryStore,
    IterationRecord,
    Query,
    variable_catalog,
)

__all__ = [
    "AgentConfig",
    "AgentError",
    "AgentTrace",
    "ChatClient",
    "DEFAULT_REGISTRY",
    "DeterministicGuide",
    "GRAMMAR_SUMMARY",
    "GuideContext",
    "GuideProposal",
    "HistoryRecord",
    "HistoryStore",
    "IndicatorResult",
    "IterationRecord",
    "LlmConfig",
    "LlmError",
    "LlmGuide",
    "MatchResult",
    "PromptTemplates",
    "Query",
    "ReplayClient",
    "build_agent_model",
    "extract_objective_source",
    "fixed_fraction",
    "indicator_generate",
    "needs_price_grid",
    "objective_tokens",
    "problem_match",
    "render_indicator",
    "render_tailor",
    "response_format",
    "run_agent",
    "satisfaction_score",
    "save_transcript",
    "sensitivity_scores",
    "variable_catalog",
]
