import json

import httpx

from llmke.context import (ContextBundle, ImdbSnapshot, WikipediaClient, assemble_context, parse_infobox,
                           render_parts)
from llmke.dataset import QueryRecord, RelationId, relation_profile
from llmke.http import LookupStore

WIKITEXT = """{{Short description|Band}}
{{Infobox musical artist
| name = Queen <!-- hidden -->
| image = [[File:Queen.png|thumb]]
| origin = [[London]], England<ref>{{cite web|url=http://x}}</ref>
| members = {{plainlist|
* [[Freddie Mercury]]
* [[Brian May|Brian Harold May]]
}}
| genre = Rock<br />[[Glam rock|glam]]
| website = [http://queen.example Official site]
| label = {{outer|{{inner|{{deepest|gone}}}}}}
| empty =
| amp = Rock &amp; roll
}}
'''Queen''' are a British rock band."""


def test_parse_infobox_flattens_markup():
    box = parse_infobox(WIKITEXT)
    assert box["name"] == "Queen"
    assert "image" not in box
    assert box["origin"] == "London, England"
    assert box["members"] == "Freddie Mercury, Brian Harold May"
    assert box["genre"] == "Rock, glam"
    assert box["website"] == "Official site"
    assert "empty" not in box
    assert box["amp"] == "Rock & roll"
    # nested templates are expanded two levels deep, the third is dropped
    assert "gone" not in box.get("label", "")
    assert parse_infobox(WIKITEXT, template_depth=3)["label"] == "gone"


def test_parse_infobox_without_infobox():
    assert parse_infobox("no templates here") == {}
    assert parse_infobox("") == {}
    assert parse_infobox("{{cite|a}}") == {}


def test_render_parts_skips_empty_sections():
    assert render_parts("", "{}", None) == ""
    assert render_parts("Intro.", "{}", ("IMDb", "")) == "Wikipedia introduction: Intro."
    assert render_parts("I", '{"a": "b"}', ("IMDb", "X has 3 episodes.")) == (
        'Wikipedia introduction: I\nWikipedia Infobox: {"a": "b"}\nIMDb: X has 3 episodes.')
    assert ContextBundle().is_empty


def _api(pages, search=None):
    calls = []

    def handler(request):
        params = dict(request.url.params)
        calls.append(params)
        if params.get("list") == "search":
            hits = [{"title": search}] if search else []
            return httpx.Response(200, json={"query": {"search": hits}})
        title = params["titles"]
        if title not in pages:
            return httpx.Response(200, json={"query": {"pages": [{"title": title, "missing": True}]}})
        intro, wikitext = pages[title]
        return httpx.Response(200, json={"query": {"pages": [{
            "title": title, "extract": intro,
            "revisions": [{"slots": {"main": {"content": wikitext}}}]}]}})

    return httpx.Client(transport=httpx.MockTransport(handler)), calls


def test_wikipedia_client_fetches_and_caches(tmp_path):
    client, calls = _api({"Queen (band)": ("Queen are a British rock band.", WIKITEXT)}, search="Queen (band)")
    store = LookupStore(tmp_path / "l.jsonl")
    wiki = WikipediaClient(store, client=client)
    assert wiki.fetch_wikipedia_intro("Queen") == "Queen are a British rock band."
    assert json.loads(wiki.fetch_infobox("Queen"))["origin"] == "London, England"
    assert calls[0]["formatversion"] == "2" and calls[0]["redirects"] == "1"
    n = len(calls)
    assert wiki.page("Queen")["title"] == "Queen (band)"
    assert len(calls) == n  # served from the store
    offline = WikipediaClient(LookupStore(None, offline=True, extra_paths=(tmp_path / "l.jsonl",)))
    assert offline.page("Queen")["title"] == "Queen (band)"


def test_wikipedia_miss_without_search_hit(tmp_path):
    client, _ = _api({})
    page = WikipediaClient(LookupStore(None), client=client).page("Nowhere")
    assert page == {"title": None, "intro": "", "wikitext": ""}


def _mini_wiki(mini):
    return WikipediaClient(LookupStore(None, offline=True, extra_paths=(mini / "lookups.jsonl",)))


def test_admin_division_policy(mini):
    rec = QueryRecord("Austria", "Q40", RelationId.CountryHasStates)
    bundle = assemble_context(rec, relation_profile(rec.relation), _mini_wiki(mini))
    assert bundle.source_titles == ("Austria", "Administrative Division of Austria")
    assert bundle.extra_source[0] == "Administrative Division of Austria"
    assert "Vorarlberg" in bundle.extra_source[1]
    assert bundle.render().startswith("Wikipedia introduction: ")


def test_imdb_policy(mini):
    imdb = ImdbSnapshot(mini / "imdb.jsonl")
    truth = {json.loads(x)["SubjectEntity"]: json.loads(x) for x in (mini / "test_truth.jsonl").open()}
    sherlock = truth["Sherlock"]
    rec = QueryRecord("Sherlock", sherlock["SubjectEntityID"], RelationId.SeriesHasNumberOfEpisodes)
    bundle = assemble_context(rec, relation_profile(rec.relation), _mini_wiki(mini), imdb)
    assert bundle.extra_source == ("IMDb", "Sherlock has 13 episodes.")
    assert imdb.snippet("Q1", "Nothing") == ""


def test_title_resolution_through_search(mini):
    truth = [json.loads(x) for x in (mini / "test_truth.jsonl").open()]
    row = next(r for r in truth if r["SubjectEntity"] == "mercury(II) sulfide")
    rec = QueryRecord(row["SubjectEntity"], row["SubjectEntityID"], RelationId.CompoundHasParts)
    bundle = assemble_context(rec, relation_profile(rec.relation), _mini_wiki(mini))
    assert bundle.source_titles == ("Cinnabar",)
    assert "sulfur" in bundle.render()


def test_budget_trims_intro_first(mini):
    rec = QueryRecord("Austria", "Q40", RelationId.CountryHasStates)
    wiki = _mini_wiki(mini)
    full = assemble_context(rec, relation_profile(rec.relation), wiki)
    assert not full.truncated
    budget = len(full.render()) - 10
    cut = assemble_context(rec, relation_profile(rec.relation), wiki, budget=budget)
    assert cut.truncated and len(cut.render()) <= budget
    assert cut.infobox_json == full.infobox_json and cut.extra_source == full.extra_source
    assert full.intro_text.startswith(cut.intro_text)
    tiny = assemble_context(rec, relation_profile(rec.relation), wiki, budget=40)
    assert len(tiny.render()) <= 40 and tiny.intro_text == ""
