"""Retrieval-augmented context: Wikipedia introduction, Infobox, extra sources."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

import httpx
import mwparserfromhell
from mwparserfromhell.nodes import Comment, ExternalLink, HTMLEntity, Tag, Template, Text, Wikilink

from .dataset import ContextPolicy, QueryRecord, RelationProfile
from .http import HostPacer, LookupStore, RetryPolicy, USER_AGENT, request_with_retry

logger = logging.getLogger(__name__)

WIKIPEDIA_API = "https://en.wikipedia.org/w/api.php"
DEFAULT_BUDGET = 6000
ADMIN_DIVISION_TITLE = "Administrative Division of {subject}"
IMDB_LABEL = "IMDb"


@dataclass(frozen=True)
class ContextBundle:
    intro_text: str = ""
    infobox_json: str = "{}"
    extra_source: tuple[str, str] | None = None
    source_titles: tuple[str, ...] = ()
    truncated: bool = False

    def render(self) -> str:
        return render_parts(self.intro_text, self.infobox_json, self.extra_source)

    @property
    def is_empty(self) -> bool:
        return not self.render()


def render_parts(intro: str, infobox_json: str, extra: tuple[str, str] | None) -> str:
    parts = []
    if intro:
        parts.append(f"Wikipedia introduction: {intro}")
    if infobox_json and infobox_json != "{}":
        parts.append(f"Wikipedia Infobox: {infobox_json}")
    if extra is not None and extra[1]:
        parts.append(f"{extra[0]}: {extra[1]}")
    return "\n".join(parts)


# -- Infobox extraction -------------------------------------------------------


def _flatten(code, depth: int) -> str:
    out = []
    for node in code.nodes:
        if isinstance(node, Text):
            out.append(str(node))
        elif isinstance(node, Wikilink):
            target = str(node.title)
            if target.lower().startswith(("file:", "image:", "category:")):
                continue
            out.append(_flatten(node.text, depth) if node.text else target)
        elif isinstance(node, ExternalLink):
            out.append(_flatten(node.title, depth) if node.title else "")
        elif isinstance(node, Template):
            if depth > 0:
                vals = [_flatten(p.value, depth - 1).strip() for p in node.params if not p.showkey]
                out.append(", ".join(v for v in vals if v))
        elif isinstance(node, Tag):
            if str(node.tag).lower() in ("ref", "references"):
                continue
            if str(node.tag).lower() in ("br", "li", "dd"):
                out.append(", ")
            elif node.contents is not None:
                out.append(_flatten(node.contents, depth))
        elif isinstance(node, HTMLEntity):
            out.append(node.normalize())
        elif isinstance(node, Comment):
            continue
    return "".join(out)


def parse_infobox(wikitext: str, template_depth: int = 2) -> dict[str, str]:
    """Flat key -> text pairs from the first ``{{Infobox ...}}`` template.

    Nested templates are expanded to their positional arguments down to
    ``template_depth`` levels; anything deeper is dropped.
    """
    try:
        code = mwparserfromhell.parse(wikitext or "")
    except Exception as e:  # parser is best-effort on broken markup
        logger.warning("infobox parse failed: %s", e)
        return {}
    for tpl in code.filter_templates(recursive=True):
        if not str(tpl.name).strip().lower().startswith("infobox"):
            continue
        fields = {}
        for p in tpl.params:
            key = str(p.name).strip()
            value = re.sub(r"\s+", " ", _flatten(p.value, template_depth))
            value = re.sub(r"\s*,(\s*,)*\s*", ", ", value).strip(" ,")
            if key and value:
                fields[key] = value
        return fields
    return {}


# -- Wikipedia client ---------------------------------------------------------


class WikipediaClient:
    """English Wikipedia lookups, cached in a :class:`LookupStore`."""

    def __init__(self, store: LookupStore, client: httpx.Client | None = None,
                 api_url: str = WIKIPEDIA_API, policy: RetryPolicy | None = None,
                 pacer: HostPacer | None = None, template_depth: int = 2):
        self.store = store
        self.api_url = api_url
        self.policy = policy
        self.pacer = pacer
        self.template_depth = template_depth
        self._client = client

    @property
    def client(self) -> httpx.Client:
        if self._client is None:
            self._client = httpx.Client(timeout=30.0, headers={"User-Agent": USER_AGENT})
        return self._client

    def _query(self, **params) -> dict:
        params = {"format": "json", "formatversion": "2", **params}
        resp = request_with_retry(self.client, "GET", self.api_url, params=params,
                                  policy=self.policy, pacer=self.pacer)
        return resp.json()

    def _fetch_page(self, title: str) -> dict:
        data = self._query(action="query", prop="extracts|revisions", exintro="1", explaintext="1",
                           rvprop="content", rvslots="main", redirects="1", titles=title)
        pages = data.get("query", {}).get("pages", [])
        if not pages or pages[0].get("missing") or pages[0].get("invalid"):
            return {"title": None, "intro": "", "wikitext": ""}
        page = pages[0]
        revs = page.get("revisions") or [{}]
        wikitext = revs[0].get("slots", {}).get("main", {}).get("content", "")
        return {"title": page.get("title"), "intro": (page.get("extract") or "").strip(),
                "wikitext": wikitext}

    def _search_title(self, text: str) -> str | None:
        data = self._query(action="query", list="search", srsearch=text, srlimit="1")
        hits = data.get("query", {}).get("search", [])
        return hits[0]["title"] if hits else None

    def page(self, title: str, resolve: bool = True) -> dict:
        """Page record ``{title, intro, wikitext}``; title is None on a miss.

        On a miss the title search's top hit is tried once.
        """
        page = self.store.get("wikipedia.page", title, lambda: self._fetch_page(title))
        if page["title"] is None and resolve:
            alt = self.store.get("wikipedia.search", title, lambda: self._search_title(title))
            if alt and alt != title:
                logger.info("resolved %r to %r via title search", title, alt)
                page = self.store.get("wikipedia.page", alt, lambda: self._fetch_page(alt))
        if page["title"] is None:
            logger.info("no Wikipedia page for %r", title)
        return page

    def fetch_wikipedia_intro(self, title: str) -> str:
        return self.page(title)["intro"]

    def fetch_infobox(self, title: str) -> str:
        fields = parse_infobox(self.page(title)["wikitext"], self.template_depth)
        return json.dumps(fields, ensure_ascii=False)


class ImdbSnapshot:
    """Episode counts read from a JSONL ``{subject_qid, episode_count}`` table."""

    def __init__(self, path: str | Path | None = None, counts: dict[str, int] | None = None):
        self.counts = dict(counts or {})
        if path is not None and Path(path).exists():
            with Path(path).open(encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        row = json.loads(line)
                        self.counts[row["subject_qid"]] = int(row["episode_count"])

    def snippet(self, subject_qid: str, subject_label: str) -> str:
        n = self.counts.get(subject_qid)
        if n is None:
            return ""
        return f"{subject_label} has {n} episodes."


def _cut(text: str, excess: int) -> str:
    return "" if excess >= len(text) else text[: len(text) - excess].rstrip()


def _trim(intro: str, infobox_json: str, extra: tuple[str, str] | None,
          budget: int) -> tuple[str, str, tuple[str, str] | None, bool]:
    """Fit the rendered bundle into ``budget`` characters.

    The intro tail is cut first. The extra source and then the Infobox are
    only cut if they alone overflow the budget.
    """
    def excess():
        return len(render_parts(intro, infobox_json, extra)) - budget

    if excess() <= 0:
        return intro, infobox_json, extra, False
    intro = _cut(intro, excess())
    if excess() > 0 and extra is not None:
        extra = (extra[0], _cut(extra[1], excess()))
    if excess() > 0:
        infobox_json = _cut(infobox_json, excess())
    return intro, infobox_json, extra, True


def assemble_context(record: QueryRecord, profile: RelationProfile, wiki: WikipediaClient,
                     imdb: ImdbSnapshot | None = None, budget: int = DEFAULT_BUDGET) -> ContextBundle:
    if profile.context_policy is ContextPolicy.none:
        return ContextBundle()
    page = wiki.page(record.subject_label)
    titles = [page["title"]] if page["title"] else []
    intro = page["intro"]
    infobox = json.dumps(parse_infobox(page["wikitext"], wiki.template_depth), ensure_ascii=False)
    extra = None
    if profile.context_policy is ContextPolicy.wikipedia_admin_division:
        title = ADMIN_DIVISION_TITLE.format(subject=record.subject_label)
        admin = wiki.page(title)
        titles.append(title)
        extra = (title, admin["intro"])
    elif profile.context_policy is ContextPolicy.wikipedia_plus_imdb:
        snippet = imdb.snippet(record.subject_qid, record.subject_label) if imdb else ""
        extra = (IMDB_LABEL, snippet)
    intro, infobox, extra, truncated = _trim(intro, infobox, extra, budget)
    return ContextBundle(intro, infobox, extra, tuple(titles), truncated)
