"""Prompt templates: external text files with {placeholder} substitution.

Template files live in heurevo/llm/templates/ and may be overridden by a
user-supplied directory. A file is split into messages by ::system:: and
::user:: marker lines; a file without markers is a single user message.
Placeholders are lowercase {identifier} tokens; rendering is pure text
substitution, so templates are configuration, not code.
"""

from __future__ import annotations

import re
from importlib import resources

from heurevo.errors import TemplateError

TEMPLATE_IDS = (
    "cap_abstraction",
    "cap_direction",
    "rp_direction",
    "crossover",
    "elitist_mutation",
    "population_init",
    "ppp_predict",
)

_PLACEHOLDER = re.compile(r"\{([a-z][a-z0-9_]*)\}")
_SECTION = re.compile(r"^::(system|user)::$", re.MULTILINE)

Message = tuple[str, str]


def template_text(template_id: str, template_dir: str | None = None) -> str:
    if template_id not in TEMPLATE_IDS:
        raise TemplateError(f"unknown template id {template_id!r}")
    if template_dir is not None:
        path = f"{template_dir}/{template_id}.txt"
        try:
            with open(path, encoding="utf-8") as fh:
                return fh.read()
        except OSError as exc:
            raise TemplateError(f"cannot read template {path}: {exc}") from exc
    ref = resources.files("heurevo.llm").joinpath(f"templates/{template_id}.txt")
    return ref.read_text(encoding="utf-8")


def render_template(
    template_id: str,
    bindings: dict[str, object],
    template_dir: str | None = None,
) -> list[Message]:
    """Render a template into an ordered (role, text) message list."""
    text = template_text(template_id, template_dir)

    needed = set(_PLACEHOLDER.findall(text))
    missing = needed - set(bindings)
    if missing:
        raise TemplateError(
            f"template {template_id}: missing binding for {{{sorted(missing)[0]}}}"
        )

    def substitute(chunk: str) -> str:
        return _PLACEHOLDER.sub(lambda m: str(bindings[m.group(1)]), chunk)

    parts = _SECTION.split(text)
    # parts alternate: [before-first-marker, role, body, role, body, ...]
    if len(parts) == 1:
        return [("user", substitute(text.strip()))]
    messages: list[Message] = []
    leading = parts[0].strip()
    if leading:
        raise TemplateError(f"template {template_id}: text before first section marker")
    for role, body in zip(parts[1::2], parts[2::2]):
        messages.append((role, substitute(body.strip())))
    return messages
