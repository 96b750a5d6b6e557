from heurevo.llm.gateway import (
    ChatExchange,
    Gateway,
    MockEntry,
    MockScript,
    prompt_digest,
    usage_totals,
)
from heurevo.llm.templates import TEMPLATE_IDS, render_template, template_text

__all__ = [
    "ChatExchange",
    "Gateway",
    "MockEntry",
    "MockScript",
    "TEMPLATE_IDS",
    "prompt_digest",
    "render_template",
    "template_text",
    "usage_totals",
]
