"""Regenerate the bundled mini fixture set under src/llmke/data/mini/.

The set is hand-authored: model replies, search candidates and Wikipedia
pages are scripted here, then the real pipeline is run against scripted
providers so that exactly the requests it makes get recorded. QIDs of
well-known entities are the real ones; everything else (and every decoy)
uses the synthetic range Q990000001+.

    python scripts/build_mini_fixtures.py
"""

from __future__ import annotations

import json
import re
import shutil
import sys
import tempfile
from pathlib import Path

from llmke.context import ImdbSnapshot, WikipediaClient
from llmke.dataset import RelationId
from llmke.entity_mapping import WikidataSearch
from llmke.http import LookupStore
from llmke.llm_client import FixtureStore, LLMClient
from llmke.pipeline import IMDB_FIXTURES, LLM_FIXTURES, LOOKUP_FIXTURES, RunConfig, Services, run
from llmke.prompting import question_text, triple_text

OUT = Path(__file__).resolve().parents[1] / "src" / "llmke" / "data" / "mini"

REAL = {
    # countries
    "Brazil": "Q155", "Argentina": "Q414", "Bolivia": "Q750", "Colombia": "Q739", "Guyana": "Q734",
    "Paraguay": "Q733", "Peru": "Q419", "Suriname": "Q730", "Uruguay": "Q77", "Venezuela": "Q717",
    "France": "Q142", "Portugal": "Q45", "Spain": "Q29", "Andorra": "Q228", "Monaco": "Q235",
    "Italy": "Q38", "Switzerland": "Q39", "Germany": "Q183", "Luxembourg": "Q32", "Belgium": "Q31",
    "Egypt": "Q79", "Libya": "Q1016", "Sudan": "Q1049", "Israel": "Q801", "Armenia": "Q399",
    "Azerbaijan": "Q227", "Iran": "Q794", "Turkey": "Q43", "Canada": "Q16",
    "United States of America": "Q30", "Kenya": "Q114", "Japan": "Q17", "Austria": "Q40",
    "Netherlands": "Q55", "Liechtenstein": "Q347", "Slovakia": "Q214", "Hungary": "Q28",
    "Croatia": "Q224", "Serbia": "Q403", "Romania": "Q218", "Bulgaria": "Q219", "Moldova": "Q217",
    "Ukraine": "Q212", "United Kingdom": "Q145", "South Sudan": "Q958", "Uganda": "Q1036",
    "Ethiopia": "Q115", "Tanzania": "Q924", "Rwanda": "Q1037", "Burundi": "Q967",
    "Democratic Republic of the Congo": "Q974", "Eritrea": "Q986", "Czech Republic": "Q213",
    "Chile": "Q298", "Morocco": "Q1028", "Denmark": "Q35", "Cyprus": "Q229", "Nepal": "Q837",
    "Bosnia and Herzegovina": "Q225",
    # elements and the planet
    "hydrogen": "Q556", "oxygen": "Q629", "carbon": "Q623", "nitrogen": "Q627", "sodium": "Q658",
    "chlorine": "Q688", "sulfur": "Q682", "mercury": "Q925",
    # languages
    "French": "Q150", "German": "Q188", "English": "Q1860", "Italian": "Q652", "Spanish": "Q1321",
    "Portuguese": "Q5146", "Japanese": "Q5287", "Russian": "Q7737", "Swahili": "Q7838",
    "Romansh": "Q13199", "Xhosa": "Q13218",
    # prizes
    "Nobel Peace Prize": "Q35637", "Nobel Prize in Literature": "Q37922",
    "Nobel Prize in Physics": "Q38104", "Nobel Prize in Chemistry": "Q44585",
    "Nobel Prize in Physiology or Medicine": "Q80061",
    # places
    "Paris": "Q90", "London": "Q84", "Berlin": "Q64", "Vienna": "Q1741", "Prague": "Q1085",
    "Cairo": "Q85", "Budapest": "Q1781", "Rome": "Q220",
    "River Thames": "Q19686", "Seine": "Q1471", "Rhine": "Q584", "Danube": "Q1653", "Nile": "Q3392",
    "Amazon River": "Q3783", "Elbe": "Q1676",
    "Nevada": "Q1227", "California": "Q99", "Oregon": "Q824", "Idaho": "Q1221", "Utah": "Q829",
    "Arizona": "Q816", "Texas": "Q1439", "New Mexico": "Q1522", "Oklahoma": "Q1649",
    "Arkansas": "Q1612", "Louisiana": "Q1588", "Georgia (U.S. state)": "Q1428", "Florida": "Q812",
    "Alabama": "Q173", "Tennessee": "Q1509", "North Carolina": "Q1454", "South Carolina": "Q1456",
    "Washington": "Q1223", "Bavaria": "Q980", "Baden-Württemberg": "Q985", "Hesse": "Q1199",
    "Thuringia": "Q1205", "Saxony": "Q1202",
    # organisations
    "Robert Bosch LLC": "Q28973218", "Robert Bosch": "Q234021", "Google": "Q95", "Apple Inc.": "Q312",
    "Microsoft": "Q2283", "Meta Platforms": "Q380", "YouTube": "Q866", "Instagram": "Q209330",
    "Alphabet Inc.": "Q20800404",
    # people
    "Barack Obama": "Q76", "Albert Einstein": "Q937", "Marie Curie": "Q7186", "Bill Clinton": "Q1124",
    "Hillary Clinton": "Q6294", "Michelle Obama": "Q13133", "John Lennon": "Q1203",
    "Paul McCartney": "Q2599", "Ringo Starr": "Q2632", "George Harrison": "Q2643",
    "The Beatles": "Q1299", "Donald Trump": "Q22686", "Elizabeth II": "Q9682",
    "Mahatma Gandhi": "Q1001", "Nelson Mandela": "Q8023", "Steve Jobs": "Q19837",
    "Freddie Mercury": "Q15869", "Leonardo da Vinci": "Q762", "Lionel Messi": "Q615",
    "Cristiano Ronaldo": "Q11571", "Taylor Swift": "Q26926", "Elon Musk": "Q317521",
    "Abraham Lincoln": "Q91", "Napoleon": "Q517",
}

_next_synthetic = [990000001]


def synthetic() -> str:
    q = f"Q{_next_synthetic[0]}"
    _next_synthetic[0] += 1
    return q


SUBJECT_QID: dict[str, str] = {}


def subject_qid(label: str) -> str:
    if label not in SUBJECT_QID:
        SUBJECT_QID[label] = REAL.get(label) or synthetic()
    return SUBJECT_QID[label]


# label -> true entity for that label, as (qid, label, description)
ENT: dict[str, tuple[str, str, str]] = {}
# search string -> ordered candidate list
CANDS: dict[str, list[tuple[str, str, str]]] = {}


def ent(label: str, desc: str, qid: str | None = None, shown: str | None = None):
    if label not in ENT:
        ENT[label] = (qid or REAL.get(label) or synthetic(), shown or label, desc)
    return ENT[label]


def cands(search: str, *entries):
    CANDS[search] = list(entries)


def decoy(label: str, desc: str):
    return (synthetic(), label, desc)


DEFAULT_DESC = {
    RelationId.BandHasMember: "musician and singer",
    RelationId.CityLocatedAtRiver: "river in Europe",
    RelationId.CompanyHasParentOrganisation: "company",
    RelationId.CompoundHasParts: "chemical element",
    RelationId.CountryBordersCountry: "sovereign state",
    RelationId.CountryHasOfficialLanguage: "language",
    RelationId.CountryHasStates: "first-level administrative division",
    RelationId.FootballerPlaysPosition: "position in association football",
    RelationId.PersonCauseOfDeath: "cause of death",
    RelationId.PersonHasAutobiography: "autobiography book",
    RelationId.PersonHasEmployer: "organization",
    RelationId.PersonHasNobelPrize: "Nobel Prize",
    RelationId.PersonHasPlaceOfDeath: "human settlement",
    RelationId.PersonHasProfession: "occupation",
    RelationId.PersonHasSpouse: "human",
    RelationId.PersonPlaysInstrument: "musical instrument",
    RelationId.PersonSpeaksLanguage: "language",
    RelationId.RiverBasinsCountry: "sovereign state",
    RelationId.StateBordersState: "federated state",
}

TRAIN: list[dict] = []
TEST: list[dict] = []
IMDB: dict[str, int] = {}
NUMERIC = {RelationId.PersonHasNumberOfChildren, RelationId.SeriesHasNumberOfEpisodes}


def _truth_ids(rel, labels):
    if rel in NUMERIC:
        return list(labels)
    return [ent(x, DEFAULT_DESC[rel])[0] for x in labels]


def train(rel, subject, labels):
    TRAIN.append({"SubjectEntity": subject, "SubjectEntityID": subject_qid(subject), "Relation": rel.value,
                  "ObjectEntities": labels or [""], "ObjectEntitiesID": _truth_ids(rel, labels) or [""]})


def test(rel, subject, labels, q, t=None, c=None, wiki=None):
    """``q``/``t``/``c``: raw replies for question/triple/context (list -> rendered literal)."""
    def raw(x):
        return json.dumps(x, ensure_ascii=False) if isinstance(x, list) else x

    q = raw(q)
    TEST.append({
        "rel": rel, "SubjectEntity": subject, "SubjectEntityID": subject_qid(subject),
        "truth": labels, "ids": _truth_ids(rel, labels), "q": q,
        "t": raw(t) if t is not None else q, "c": raw(c) if c is not None else q,
        "wiki": wiki if wiki is not None else labels,
    })


R = RelationId

# -- BandHasMember -------------------------------------------------------------
train(R.BandHasMember, "Nirvana", ["Kurt Cobain", "Krist Novoselic", "Dave Grohl"])
train(R.BandHasMember, "The Rolling Stones", ["Mick Jagger", "Keith Richards", "Ronnie Wood"])
train(R.BandHasMember, "U2", ["Bono", "The Edge", "Adam Clayton", "Larry Mullen Jr."])
test(R.BandHasMember, "The Beatles", ["John Lennon", "Paul McCartney", "George Harrison", "Ringo Starr"],
     '["John Lennon", "Paul McCartney", "George Harrison", "Ringo Starr"]')
test(R.BandHasMember, "Queen", ["Freddie Mercury", "Brian May", "Roger Taylor", "John Deacon"],
     'Sure! Here is the list: ["Freddie Mercury", "Brian May", "Roger Taylor", "John Deacon"]')
test(R.BandHasMember, "ABBA", ["Agnetha Fältskog", "Björn Ulvaeus", "Benny Andersson", "Anni-Frid Lyngstad"],
     ["Agnetha Fältskog", "Björn Ulvaeus", "Benny Andersson", "Anni-Frid Lyngstad"])
test(R.BandHasMember, "Coldplay", ["Chris Martin", "Jonny Buckland", "Guy Berryman", "Will Champion"],
     "['Chris Martin', 'Jonny Buckland', 'Guy Berryman', 'Will Champion']")
test(R.BandHasMember, "Radiohead", ["Thom Yorke", "Jonny Greenwood", "Colin Greenwood", "Ed O'Brien", "Philip Selway"],
     ["Thom Yorke", "Jonny Greenwood", "Colin Greenwood", "Ed O'Brien"],
     c=["Thom Yorke", "Jonny Greenwood", "Colin Greenwood", "Ed O'Brien", "Philip Selway"])
ent("Roger Taylor", "English drummer and singer-songwriter")
cands("Roger Taylor", decoy("Roger Taylor", "English racing driver"), ENT["Roger Taylor"])
ent("Chris Martin", "British singer, musician and songwriter")
cands("Chris Martin", decoy("Chris Martin", "Canadian curler"), ENT["Chris Martin"],
      decoy("Chris Martin", "American football player"))

# -- CityLocatedAtRiver ----------------------------------------------------------
train(R.CityLocatedAtRiver, "Berlin", ["Spree"])
train(R.CityLocatedAtRiver, "Vienna", ["Danube"])
train(R.CityLocatedAtRiver, "Rome", ["Tiber"])
test(R.CityLocatedAtRiver, "Paris", ["Seine"], ["Seine"])
test(R.CityLocatedAtRiver, "London", ["River Thames"], ["River Thames"])
test(R.CityLocatedAtRiver, "Prague", ["Vltava"], ["Vltava"], c='```python\n["Vltava"]\n```')
test(R.CityLocatedAtRiver, "Cairo", ["Nile"], ["Nile"])
test(R.CityLocatedAtRiver, "Budapest", ["Danube"], ["Danube", "Tisza"], c=["Danube"])
ent("Seine", "river in northern France")
cands("Seine", decoy("Seine", "former department of France"), ENT["Seine"])
ent("Nile", "major river in northeastern Africa")
cands("Nile", ENT["Nile"], decoy("Nile", "American death metal band"))
ent("Tisza", "river in Central Europe")

# -- CompanyHasParentOrganisation -------------------------------------------------
train(R.CompanyHasParentOrganisation, "Google", ["Alphabet Inc."])
train(R.CompanyHasParentOrganisation, "WhatsApp", ["Meta Platforms"])
train(R.CompanyHasParentOrganisation, "LinkedIn", ["Microsoft"])
train(R.CompanyHasParentOrganisation, "Microsoft", [])
test(R.CompanyHasParentOrganisation, "Robert Bosch LLC", ["Robert Bosch"], ["Robert Bosch GmbH"])
test(R.CompanyHasParentOrganisation, "Ferrari S.p.A.", ["Ferrari N.V."], ["Exor"], wiki=["Exor"])
test(R.CompanyHasParentOrganisation, "YouTube", ["Google"], ["Google"])
test(R.CompanyHasParentOrganisation, "Instagram", ["Meta Platforms"], ["Facebook"], c=["Meta Platforms"])
test(R.CompanyHasParentOrganisation, "Apple Inc.", [], '[""]')
ent("Robert Bosch", "German multinational engineering and technology company", shown="Robert Bosch GmbH")
cands("Robert Bosch GmbH", ENT["Robert Bosch"])
ent("Exor", "Dutch holding company")
ent("Facebook", "online social networking service")

# -- CompoundHasParts -----------------------------------------------------------
train(R.CompoundHasParts, "ammonia", ["nitrogen", "hydrogen"])
train(R.CompoundHasParts, "carbon dioxide", ["carbon", "oxygen"])
train(R.CompoundHasParts, "hydrogen chloride", ["hydrogen", "chlorine"])
test(R.CompoundHasParts, "water", ["hydrogen", "oxygen"], ["hydrogen", "oxygen"])
test(R.CompoundHasParts, "mercury(II) chloride", ["mercury", "chlorine"], ["mercury", "chlorine"])
test(R.CompoundHasParts, "sodium chloride", ["sodium", "chlorine"], ["sodium", "chlorine"])
test(R.CompoundHasParts, "methane", ["carbon", "hydrogen"], '["carbon", "hydrogen"]')
test(R.CompoundHasParts, "mercury(II) sulfide", ["mercury", "sulfur"], ["mercury", "sulfur"])
ent("mercury", "chemical element with symbol Hg and atomic number 80")
cands("mercury", ("Q308", "Mercury", "smallest and closest planet to the Sun in the Solar System"),
      ENT["mercury"], ("Q15869", "Freddie Mercury", "British singer and songwriter (1946-1991)"),
      decoy("Mercury", "Roman god of commerce"))

# -- CountryBordersCountry --------------------------------------------------------
train(R.CountryBordersCountry, "Spain", ["France", "Portugal", "Andorra", "Morocco"])
train(R.CountryBordersCountry, "Chile", ["Argentina", "Bolivia", "Peru"])
train(R.CountryBordersCountry, "Germany", ["France", "Switzerland", "Austria", "Czech Republic", "Poland",
                                           "Denmark", "Netherlands", "Belgium", "Luxembourg"])
test(R.CountryBordersCountry, "Brazil",
     ["Argentina", "Bolivia", "Colombia", "France", "Guyana", "Paraguay", "Peru", "Suriname", "Uruguay", "Venezuela"],
     ["Argentina", "Bolivia", "Colombia", "Guyana", "Paraguay", "Peru", "Suriname", "Uruguay", "Venezuela"],
     c=["Argentina", "Bolivia", "Colombia", "France", "Guyana", "Paraguay", "Peru", "Suriname", "Uruguay",
        "Venezuela"])
test(R.CountryBordersCountry, "Portugal", ["Spain"], ["Spain"])
test(R.CountryBordersCountry, "France",
     ["Spain", "Andorra", "Monaco", "Italy", "Switzerland", "Germany", "Luxembourg", "Belgium"],
     ["Spain", "Andorra", "Monaco", "Italy", "Switzerland", "Germany", "Luxembourg", "Belgium"])
test(R.CountryBordersCountry, "Egypt", ["Libya", "Sudan", "Israel"], ["Libya", "Sudan", "Israel", "Gaza Strip"])
test(R.CountryBordersCountry, "Armenia", ["Georgia", "Azerbaijan", "Iran", "Turkey"],
     ["Georgia", "Azerbaijan", "Iran", "Turkey"])
ent("Georgia", "country in the Caucasus", qid="Q230")
cands("Georgia", ("Q1428", "Georgia", "state of the United States of America"), ENT["Georgia"])
ent("Gaza Strip", "Palestinian territory on the eastern coast of the Mediterranean Sea")
ent("Poland", "country in Central Europe", qid="Q36")

# -- CountryHasOfficialLanguage -----------------------------------------------------
train(R.CountryHasOfficialLanguage, "Germany", ["German"])
train(R.CountryHasOfficialLanguage, "Japan", ["Japanese"])
train(R.CountryHasOfficialLanguage, "Spain", ["Spanish"])
test(R.CountryHasOfficialLanguage, "France", ["French"], ["French"])
test(R.CountryHasOfficialLanguage, "Brazil", ["Portuguese"], ["Portuguese"])
test(R.CountryHasOfficialLanguage, "Switzerland", ["German", "French", "Italian", "Romansh"],
     ["German", "French", "Italian", "Romansh"])
test(R.CountryHasOfficialLanguage, "Canada", ["English", "French"], ["English", "French"])
test(R.CountryHasOfficialLanguage, "Kenya", ["English", "Swahili"], ["Swahili", "English"])
ent("French", "Romance language originating in France")
cands("French", ("Q121842", "French", "nationals or citizens of France"), ENT["French"],
      decoy("French", "family name"))
ent("German", "West Germanic language mainly spoken in Central Europe")
cands("German", ENT["German"], decoy("Germans", "native or inhabitant of Germany"))
ent("Portuguese", "Romance language native to the Iberian Peninsula")
cands("Portuguese", decoy("Portuguese", "people from Portugal"), ENT["Portuguese"])

# -- CountryHasStates ---------------------------------------------------------------
train(R.CountryHasStates, "Denmark", ["Capital Region of Denmark", "Region Zealand", "Region of Southern Denmark",
                                      "Central Denmark Region", "North Denmark Region"])
train(R.CountryHasStates, "Cyprus", ["Nicosia District", "Limassol District", "Larnaca District",
                                     "Famagusta District", "Paphos District", "Kyrenia District"])
train(R.CountryHasStates, "Slovakia", ["Bratislava Region", "Trnava Region", "Trenčín Region", "Nitra Region",
                                       "Žilina Region", "Banská Bystrica Region", "Prešov Region", "Košice Region"])
AUSTRIA = ["Burgenland", "Carinthia", "Lower Austria", "Upper Austria", "Salzburg", "Styria", "Tyrol",
           "Vorarlberg", "Vienna"]
test(R.CountryHasStates, "Austria", AUSTRIA, AUSTRIA)
test(R.CountryHasStates, "Belgium", ["Flemish Region", "Walloon Region", "Brussels-Capital Region"],
     ["Flanders", "Wallonia", "Brussels"],
     c=["Flemish Region", "Walloon Region", "Brussels-Capital Region"])
test(R.CountryHasStates, "Bosnia and Herzegovina",
     ["Federation of Bosnia and Herzegovina", "Republika Srpska", "Brčko District"],
     ["Federation of Bosnia and Herzegovina", "Republika Srpska", "Brčko District"])
GERMANY_STATES = ["Baden-Württemberg", "Bavaria", "Berlin", "Brandenburg", "Bremen", "Hamburg", "Hesse",
                  "Lower Saxony", "Mecklenburg-Vorpommern", "North Rhine-Westphalia", "Rhineland-Palatinate",
                  "Saarland", "Saxony", "Saxony-Anhalt", "Schleswig-Holstein", "Thuringia"]
test(R.CountryHasStates, "Germany", GERMANY_STATES, GERMANY_STATES)
NEPAL = ["Koshi Province", "Madhesh Province", "Bagmati Province", "Gandaki Province", "Lumbini Province",
         "Karnali Province", "Sudurpashchim Province"]
test(R.CountryHasStates, "Nepal", NEPAL, ["Koshi", "Madhesh", "Bagmati", "Gandaki", "Lumbini", "Karnali",
                                           "Sudurpashchim"], c=NEPAL)
ent("Salzburg", "federal state of Austria")
cands("Salzburg", decoy("Salzburg", "city in Austria"), ENT["Salzburg"])
ent("Tyrol", "federal state of Austria")
cands("Tyrol", decoy("Tyrol", "historical region in the Alps"), ENT["Tyrol"])
ent("Vienna", "capital and federal state of Austria")
ent("Berlin", "capital and state of Germany")
ent("Flanders", "community and region of Belgium")
ent("Wallonia", "region of Belgium", qid=ENT["Walloon Region"][0])
ent("Brussels", "capital of Belgium")
for short, full in zip(["Koshi", "Madhesh", "Bagmati", "Gandaki", "Lumbini", "Karnali", "Sudurpashchim"], NEPAL):
    ent(short, "river or place in Nepal")
cands("Lumbini", ENT["Lumbini"], ENT["Lumbini Province"])

# -- FootballerPlaysPosition ----------------------------------------------------------
train(R.FootballerPlaysPosition, "Kylian Mbappé", ["forward"])
train(R.FootballerPlaysPosition, "Virgil van Dijk", ["defender"])
train(R.FootballerPlaysPosition, "Alisson Becker", ["goalkeeper"])
test(R.FootballerPlaysPosition, "Lionel Messi", ["forward"], ["forward"])
test(R.FootballerPlaysPosition, "Cristiano Ronaldo", ["forward"], ["forward"])
test(R.FootballerPlaysPosition, "Manuel Neuer", ["goalkeeper"], ["goalkeeper"])
test(R.FootballerPlaysPosition, "Sergio Ramos", ["defender"], ["centre-back"], t=["defender"], c=["centre-back"])
test(R.FootballerPlaysPosition, "Luka Modrić", ["midfielder"], ["midfielder"])
ent("forward", "position in association football")
cands("forward", decoy("forward", "position in ice hockey"), ENT["forward"])
ent("centre-back", "defensive position in association football (alias-level variant)")
ent("goalkeeper", "position in association football")
cands("goalkeeper", ENT["goalkeeper"], decoy("goalkeeper", "position in ice hockey"))

# -- PersonCauseOfDeath ---------------------------------------------------------------
train(R.PersonCauseOfDeath, "Marie Curie", ["aplastic anemia"])
train(R.PersonCauseOfDeath, "Bruce Lee", ["cerebral edema"])
train(R.PersonCauseOfDeath, "Elon Musk", [])
train(R.PersonCauseOfDeath, "Kurt Cobain", ["ballistic trauma"])
test(R.PersonCauseOfDeath, "Albert Einstein", ["abdominal aortic aneurysm"], ["abdominal aortic aneurysm"])
test(R.PersonCauseOfDeath, "Steve Jobs", ["pancreatic cancer"], ["pancreatic cancer"])
test(R.PersonCauseOfDeath, "Freddie Mercury", ["pneumonia"], ["AIDS"], c=["pneumonia", "AIDS"])
test(R.PersonCauseOfDeath, "Barack Obama", [], '[""]')
test(R.PersonCauseOfDeath, "Whitney Houston", ["drowning"], ["drowning"])
ent("AIDS", "spectrum of conditions caused by HIV infection")

# -- PersonHasAutobiography ------------------------------------------------------------
train(R.PersonHasAutobiography, "Mahatma Gandhi", ["The Story of My Experiments with Truth"])
train(R.PersonHasAutobiography, "Helen Keller", ["The Story of My Life"])
train(R.PersonHasAutobiography, "Frederick Douglass", ["Narrative of the Life of Frederick Douglass"])
test(R.PersonHasAutobiography, "Nelson Mandela", ["Long Walk to Freedom"], ["Long Walk to Freedom"])
test(R.PersonHasAutobiography, "Barack Obama", ["Dreams from My Father"], ["Dreams from My Father", "A Promised Land"])
test(R.PersonHasAutobiography, "Malcolm X", ["The Autobiography of Malcolm X"], ["The Autobiography of Malcolm X"])
test(R.PersonHasAutobiography, "Benjamin Franklin", ["The Autobiography of Benjamin Franklin"],
     ["The Autobiography of Benjamin Franklin"])
test(R.PersonHasAutobiography, "Michelle Obama", ["Becoming"], ["Becoming"])
ent("Becoming", "2018 memoir book by Michelle Obama")
cands("Becoming", decoy("Becoming", "2020 American documentary film"), ENT["Becoming"],
      decoy("becoming", "philosophical concept"))
ent("Long Walk to Freedom", "1994 autobiography of Nelson Mandela")
cands("Long Walk to Freedom", decoy("Mandela: Long Walk to Freedom", "2013 film by Justin Chadwick"),
      ENT["Long Walk to Freedom"])
ent("A Promised Land", "2020 memoir book by Barack Obama")

# -- PersonHasEmployer ---------------------------------------------------------------------
train(R.PersonHasEmployer, "Larry Page", ["Google"])
train(R.PersonHasEmployer, "Alan Turing", ["University of Manchester"])
train(R.PersonHasEmployer, "Marie Curie", ["University of Paris"])
test(R.PersonHasEmployer, "Tim Cook", ["Apple Inc."], ["Apple"])
test(R.PersonHasEmployer, "Sundar Pichai", ["Google"], ["Google", "Alphabet Inc."])
test(R.PersonHasEmployer, "Satya Nadella", ["Microsoft"], ["Microsoft"])
test(R.PersonHasEmployer, "Richard Feynman", ["California Institute of Technology", "Cornell University"],
     ["Caltech", "Cornell University"])
test(R.PersonHasEmployer, "Jennifer Doudna", ["University of California, Berkeley"],
     ["University of California, Berkeley", "Howard Hughes Medical Institute"])
cands("Apple", decoy("apple", "fruit of the apple tree"), ent("Apple Inc.", "American technology company"))
cands("Caltech", ent("California Institute of Technology", "private research university in Pasadena, California"))
ent("Howard Hughes Medical Institute", "American non-profit medical research organization")

# -- PersonHasNobelPrize -----------------------------------------------------------------------
train(R.PersonHasNobelPrize, "Martin Luther King Jr.", ["Nobel Peace Prize"])
train(R.PersonHasNobelPrize, "Alexander Fleming", ["Nobel Prize in Physiology or Medicine"])
train(R.PersonHasNobelPrize, "Ernest Hemingway", ["Nobel Prize in Literature"])
train(R.PersonHasNobelPrize, "Elon Musk", [])
test(R.PersonHasNobelPrize, "Albert Einstein", ["Nobel Prize in Physics"], ["Nobel Prize in Physics"])
test(R.PersonHasNobelPrize, "Marie Curie", ["Nobel Prize in Physics", "Nobel Prize in Chemistry"],
     ["Nobel Prize in Physics", "Nobel Prize in Chemistry"])
test(R.PersonHasNobelPrize, "Barack Obama", ["Nobel Peace Prize"], ["Nobel Peace Prize"])
test(R.PersonHasNobelPrize, "Taylor Swift", [], '[""]')
test(R.PersonHasNobelPrize, "Toni Morrison", ["Nobel Prize in Literature"], ["Nobel Prize in Literature"])

# -- PersonHasNumberOfChildren ----------------------------------------------------------------
train(R.PersonHasNumberOfChildren, "Abraham Lincoln", ["4"])
train(R.PersonHasNumberOfChildren, "Marie Curie", ["2"])
train(R.PersonHasNumberOfChildren, "John Lennon", ["2"])
test(R.PersonHasNumberOfChildren, "Barack Obama", ["2"], '["two"]', c=["2"])
test(R.PersonHasNumberOfChildren, "Donald Trump", ["5"], ["5"])
test(R.PersonHasNumberOfChildren, "Albert Einstein", ["3"], ["3"])
test(R.PersonHasNumberOfChildren, "Elizabeth II", ["4"], ["4"])
test(R.PersonHasNumberOfChildren, "Mahatma Gandhi", ["4"], '["4 sons"]')

# -- PersonHasPlaceOfDeath -------------------------------------------------------------------
train(R.PersonHasPlaceOfDeath, "Marie Curie", ["Passy"])
train(R.PersonHasPlaceOfDeath, "John Lennon", ["New York City"])
train(R.PersonHasPlaceOfDeath, "Elon Musk", [])
test(R.PersonHasPlaceOfDeath, "Albert Einstein", ["Princeton"], ["Princeton, New Jersey"])
test(R.PersonHasPlaceOfDeath, "Steve Jobs", ["Palo Alto"], ["Palo Alto"])
test(R.PersonHasPlaceOfDeath, "Taylor Swift", [], '[""]')
test(R.PersonHasPlaceOfDeath, "Freddie Mercury", ["Kensington"], ["London"], c=["Kensington"])
test(R.PersonHasPlaceOfDeath, "Napoleon", ["Longwood"], ["Saint Helena"], c=["Longwood"])
cands("Princeton, New Jersey", ent("Princeton", "municipality in Mercer County, New Jersey"))
ent("London", "capital and largest city of the United Kingdom")
ent("Saint Helena", "island in the South Atlantic Ocean")

# -- PersonHasProfession ----------------------------------------------------------------------
train(R.PersonHasProfession, "Marie Curie", ["physicist", "chemist"])
train(R.PersonHasProfession, "William Shakespeare", ["playwright", "poet", "actor"])
train(R.PersonHasProfession, "Pablo Picasso", ["painter", "sculptor"])
test(R.PersonHasProfession, "Albert Einstein", ["physicist", "theoretical physicist"], ["physicist"])
test(R.PersonHasProfession, "Taylor Swift", ["singer", "songwriter", "actor"], ["singer-songwriter", "actress"])
test(R.PersonHasProfession, "Barack Obama", ["politician", "lawyer", "writer"], ["politician", "lawyer", "author"])
test(R.PersonHasProfession, "Leonardo da Vinci", ["painter", "engineer", "architect", "sculptor"],
     ["painter", "inventor", "engineer", "architect"])
test(R.PersonHasProfession, "Serena Williams", ["tennis player"], ["tennis player"])
ent("singer-songwriter", "musician who writes, composes and performs their own material")
cands("actress", ENT["actor"])
ent("author", "person who writes a book")
ent("inventor", "person who invents")

# -- PersonHasSpouse --------------------------------------------------------------------------
train(R.PersonHasSpouse, "Pierre Curie", ["Marie Curie"])
train(R.PersonHasSpouse, "Beyoncé", ["Jay-Z"])
train(R.PersonHasSpouse, "Prince William", ["Catherine, Princess of Wales"])
test(R.PersonHasSpouse, "Barack Obama", ["Michelle Obama"], ["Michelle Obama"])
test(R.PersonHasSpouse, "Bill Clinton", ["Hillary Clinton"], ["Hillary Clinton"])
test(R.PersonHasSpouse, "Marie Curie", ["Pierre Curie"], ["Pierre Curie"])
test(R.PersonHasSpouse, "John Lennon", ["Cynthia Lennon", "Yoko Ono"], ["Yoko Ono"], c=["Cynthia Lennon", "Yoko Ono"])
test(R.PersonHasSpouse, "Albert Einstein", ["Mileva Marić", "Elsa Einstein"], ["Mileva Marić", "Elsa Einstein"])
ent("Pierre Curie", "French physicist (1859-1906)")
cands("Pierre Curie", ENT["Pierre Curie"], decoy("Pierre Curie", "French rugby union player"))
ent("Elsa Einstein", "second wife of Albert Einstein (1876-1936)")
cands("Elsa Einstein", decoy("Elsa Einstein", "German stage actress"), ENT["Elsa Einstein"])
ent("Mileva Marić", "Serbian physicist and mathematician (1875-1948)")
cands("Mileva Marić", ENT["Mileva Marić"], decoy("Mileva Marić", "2019 Serbian television film"))

# -- PersonPlaysInstrument --------------------------------------------------------------------
train(R.PersonPlaysInstrument, "Yo-Yo Ma", ["cello"])
train(R.PersonPlaysInstrument, "Louis Armstrong", ["trumpet"])
train(R.PersonPlaysInstrument, "Kurt Cobain", ["guitar"])
test(R.PersonPlaysInstrument, "Jimi Hendrix", ["guitar"], ["guitar"])
test(R.PersonPlaysInstrument, "Elton John", ["piano"], ["piano", "vocals"], c=["piano"])
test(R.PersonPlaysInstrument, "Ringo Starr", ["drum kit"], ["drums"])
test(R.PersonPlaysInstrument, "Miles Davis", ["trumpet"], ["trumpet"])
test(R.PersonPlaysInstrument, "Paul McCartney", ["bass guitar", "guitar", "piano"],
     ["bass guitar", "guitar", "piano", "drums"])
cands("drums", ent("drum kit", "collection of drums and other percussion instruments"),
      decoy("drum", "membranophone percussion instrument"))
ent("vocals", "musical performance using the voice")

# -- PersonSpeaksLanguage ---------------------------------------------------------------------
train(R.PersonSpeaksLanguage, "Angela Merkel", ["German", "Russian", "English"])
train(R.PersonSpeaksLanguage, "Justin Trudeau", ["English", "French"])
train(R.PersonSpeaksLanguage, "Pelé", ["Portuguese"])
test(R.PersonSpeaksLanguage, "Albert Einstein", ["German", "English"], ["German", "English", "French"])
test(R.PersonSpeaksLanguage, "Pope Francis", ["Spanish", "Italian", "German"], ["Spanish", "Italian"])
test(R.PersonSpeaksLanguage, "Nelson Mandela", ["English", "Xhosa"], ["English", "Xhosa"])
test(R.PersonSpeaksLanguage, "Emmanuel Macron", ["French", "English"], ["French", "English"])
test(R.PersonSpeaksLanguage, "Shakira", ["Spanish", "English", "Portuguese"], ["Spanish", "English", "Portuguese"])

# -- RiverBasinsCountry -------------------------------------------------------------------------
train(R.RiverBasinsCountry, "Elbe", ["Czech Republic", "Germany"])
train(R.RiverBasinsCountry, "Loire", ["France"])
train(R.RiverBasinsCountry, "Amazon River", ["Brazil", "Peru", "Colombia"])
test(R.RiverBasinsCountry, "Rhine", ["Switzerland", "Liechtenstein", "Austria", "Germany", "France", "Netherlands"],
     ["Switzerland", "Austria", "Germany", "France", "Netherlands"])
test(R.RiverBasinsCountry, "Danube", ["Germany", "Austria", "Slovakia", "Hungary", "Croatia", "Serbia", "Romania",
                                      "Bulgaria", "Moldova", "Ukraine"],
     ["Germany", "Austria", "Slovakia", "Hungary", "Croatia", "Serbia", "Romania", "Bulgaria", "Moldova", "Ukraine"])
test(R.RiverBasinsCountry, "River Thames", ["United Kingdom"], ["United Kingdom"], t=["England"])
test(R.RiverBasinsCountry, "Nile", ["Egypt", "Sudan", "South Sudan", "Uganda", "Ethiopia", "Kenya", "Tanzania",
                                    "Rwanda", "Burundi", "Democratic Republic of the Congo", "Eritrea"],
     ["Egypt", "Sudan", "South Sudan", "Uganda", "Ethiopia", "Kenya", "Tanzania", "Rwanda", "Burundi",
      "Democratic Republic of the Congo"])
test(R.RiverBasinsCountry, "Seine", ["France"], ["France"])
ent("England", "country within the United Kingdom")

# -- SeriesHasNumberOfEpisodes ------------------------------------------------------------------
train(R.SeriesHasNumberOfEpisodes, "Chernobyl", ["5"])
train(R.SeriesHasNumberOfEpisodes, "The Wire", ["60"])
train(R.SeriesHasNumberOfEpisodes, "Fleabag", ["12"])
test(R.SeriesHasNumberOfEpisodes, "Breaking Bad", ["62"], ["62"])
test(R.SeriesHasNumberOfEpisodes, "Friends", ["236"], ["236"])
test(R.SeriesHasNumberOfEpisodes, "Game of Thrones", ["73"], ["73"])
test(R.SeriesHasNumberOfEpisodes, "The Office", ["201"], ["201"], c=["201"])
test(R.SeriesHasNumberOfEpisodes, "Sherlock", ["13"], ["12"], c=["13"])
IMDB.update({"Breaking Bad": 62, "Friends": 236, "Game of Thrones": 73, "The Office": 201, "Sherlock": 13})

# -- StateBordersState --------------------------------------------------------------------------
train(R.StateBordersState, "Utah", ["Idaho", "Wyoming", "Colorado", "Arizona", "Nevada", "New Mexico"])
train(R.StateBordersState, "Hesse", ["Lower Saxony", "Thuringia", "Bavaria", "Baden-Württemberg",
                                     "Rhineland-Palatinate", "North Rhine-Westphalia"])
train(R.StateBordersState, "Kerala", ["Karnataka", "Tamil Nadu"])
test(R.StateBordersState, "Nevada", ["California", "Oregon", "Idaho", "Utah", "Arizona"],
     ["California", "Oregon", "Idaho", "Utah", "Arizona"])
test(R.StateBordersState, "Bavaria", ["Baden-Württemberg", "Hesse", "Thuringia", "Saxony"],
     ["Baden-Württemberg", "Hesse", "Thuringia", "Saxony"])
test(R.StateBordersState, "Texas", ["New Mexico", "Oklahoma", "Arkansas", "Louisiana"],
     ["New Mexico", "Oklahoma", "Arkansas", "Louisiana"])
test(R.StateBordersState, "Oregon", ["Washington", "Idaho", "Nevada", "California"],
     ["Washington", "Idaho", "Nevada", "California"])
SUBJECT_QID["Georgia (U.S. state)"] = REAL["Georgia (U.S. state)"]
test(R.StateBordersState, "Georgia (U.S. state)", ["Florida", "Alabama", "Tennessee", "North Carolina",
                                                   "South Carolina"],
     ["Florida", "Alabama", "Tennessee", "North Carolina", "South Carolina"])
ent("Washington", "state of the United States of America")
cands("Washington", decoy("Washington, D.C.", "capital city of the United States of America"),
      decoy("George Washington", "first president of the United States (1732-1799)"), ENT["Washington"])
cands("Saxony", ENT.get("Saxony") or ent("Saxony", "federated state of Germany"),
      decoy("Saxony", "historical duchy in Germany"))

# LM disambiguation replies that never name a listed QID
ADVERSARIAL = {"Mileva Marić"}


# -- scripted providers -------------------------------------------------------------------------


def candidates_for(label: str) -> list[dict]:
    if label in CANDS:
        rows = CANDS[label]
    elif label in ENT:
        rows = [ENT[label]]
    else:
        rows = []
    return [{"qid": q, "label": l, "description": d, "aliases": [], "rank": i} for i, (q, l, d) in enumerate(rows)]


def page_for(title: str) -> dict:
    if title.startswith("Administrative Division of "):
        subject = title.removeprefix("Administrative Division of ")
        row = next((r for r in TEST if r["rel"] is R.CountryHasStates and r["SubjectEntity"] == subject), None)
        if row is None:
            return {"title": None, "intro": "", "wikitext": ""}
        names = ", ".join(row["wiki"])
        return {"title": title, "intro": f"{subject} is divided into {len(row['wiki'])} first-level "
                                         f"administrative divisions: {names}.", "wikitext": ""}
    rows = [r for r in TEST if r["SubjectEntity"] == title]
    if not rows or title == "mercury(II) sulfide":
        return {"title": None, "intro": "", "wikitext": ""}
    fields = []
    facts = []
    for r in rows:
        key = re.sub(r"(?<!^)(?=[A-Z])", "_", r["rel"].value).lower()
        vals = r["wiki"]
        if not vals:
            continue
        if len(vals) > 2:
            fields.append(f"| {key} = {{{{plainlist|\n" + "\n".join(f"* [[{v}]]" for v in vals) + "\n}}")
        else:
            fields.append(f"| {key} = " + "<br />".join(f"[[{v}]]" for v in vals) + "<ref>cited source</ref>")
        facts.append(f"Its {key.replace('_', ' ')} is recorded as {', '.join(vals)}.")
    intro = f"{title} is the subject of this article. " + " ".join(facts)
    wikitext = "{{Short description|test page}}\n{{Infobox subject\n| name = " + title + "\n" + \
               "\n".join(fields) + "\n}}\n'''" + title + "''' is the subject of this article.\n== History ==\nMore."
    return {"title": title, "intro": intro, "wikitext": wikitext}


class ScriptedSearch(WikidataSearch):
    def _fetch(self, label):
        return candidates_for(label)


class ScriptedWiki(WikipediaClient):
    def _fetch_page(self, title):
        return page_for(title)

    def _search_title(self, text):
        return "Cinnabar" if text == "mercury(II) sulfide" else None


def _cinnabar():
    row = next(r for r in TEST if r["SubjectEntity"] == "mercury(II) sulfide")
    return {"title": "Cinnabar", "intro": "Cinnabar is the bright scarlet to brick-red form of mercury(II) "
                                          "sulfide (HgS), composed of mercury and sulfur.",
            "wikitext": "{{Infobox mineral\n| name = Cinnabar\n| formula = HgS\n| compound_has_parts = "
                        + "<br>".join(f"[[{v}]]" for v in row["truth"]) + "\n}}"}


class ScriptedProvider:
    name = "live"

    def __init__(self):
        self.by_question = {}
        self.by_triple = {}
        for r in TEST:
            self.by_question[question_text(r["SubjectEntity"], r["rel"])] = r
            self.by_triple[triple_text(r["SubjectEntity"], r["rel"])] = r

    def send(self, req):
        last = req.messages[-1][1]
        if last in self.by_triple:
            return self.by_triple[last]["t"]
        if last in self.by_question:
            return self.by_question[last]["q"]
        if last.startswith("Given the context:"):
            for q, r in self.by_question.items():
                if last.endswith(q):
                    return r["c"]
        first = req.messages[0][1]
        m = re.search(r'The answer "(.+?)" could refer', first)
        if m:
            label = m.group(1)
            listed = re.findall(r'"(Q[0-9]+)":', first)
            if label in ADVERSARIAL:
                return "I am not sure; it could be Q1."
            if last.startswith("That is not one"):
                return listed[0]
            want = ENT.get(label, (None,))[0]
            if want in listed:
                return f"The correct entity is {want}." if label == "Washington" else want
            return listed[0]
        raise KeyError(f"no scripted reply for: {last[:120]}")


def main() -> int:
    tmp = Path(tempfile.mkdtemp())
    OUT.mkdir(parents=True, exist_ok=True)
    for name in ("test.jsonl", "test_truth.jsonl", "train.jsonl", LLM_FIXTURES, LOOKUP_FIXTURES, IMDB_FIXTURES):
        (OUT / name).unlink(missing_ok=True)

    def dump(path, rows):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    dump(OUT / "train.jsonl", TRAIN)
    dump(OUT / "test.jsonl", [{"SubjectEntity": r["SubjectEntity"], "SubjectEntityID": r["SubjectEntityID"],
                               "Relation": r["rel"].value} for r in TEST])
    dump(OUT / "test_truth.jsonl", [{"SubjectEntity": r["SubjectEntity"], "SubjectEntityID": r["SubjectEntityID"],
                                     "Relation": r["rel"].value, "ObjectEntities": r["truth"] or [""],
                                     "ObjectEntitiesID": r["ids"] or [""]} for r in TEST])
    dump(OUT / IMDB_FIXTURES, [{"subject_qid": SUBJECT_QID[s], "episode_count": n} for s, n in IMDB.items()])

    lookups = LookupStore(tmp / LOOKUP_FIXTURES)
    lookups.put("wikipedia.page", "Cinnabar", _cinnabar())
    recorder = FixtureStore(tmp / LLM_FIXTURES)
    services = Services(
        llm=LLMClient(ScriptedProvider(), recorder=recorder),
        search=ScriptedSearch(lookups), wiki=ScriptedWiki(lookups),
        imdb=ImdbSnapshot(OUT / IMDB_FIXTURES), lookups=lookups,
    )
    for setting in ("question", "triple", "context"):
        for mode in ("baseline", "improved"):
            cfg = RunConfig(input_path=str(OUT / "test.jsonl"), train_path=str(OUT / "train.jsonl"),
                            truth_path=str(OUT / "test_truth.jsonl"), output_dir=str(tmp / f"{setting}-{mode}"),
                            setting=setting, disambiguation_mode=mode, provider="live", parallelism=1)
            result = run(cfg, services)
            print(f"{setting:8s} {mode:8s} F1={result.report.overall.f1:.4f}")

    recorder.save(OUT / LLM_FIXTURES)
    rows = []
    with open(tmp / LOOKUP_FIXTURES, encoding="utf-8") as fh:
        seen = set()
        for line in fh:
            row = json.loads(line)
            k = (row["namespace"], row["key"])
            if k not in seen:
                seen.add(k)
                rows.append({"namespace": row["namespace"], "key": row["key"], "value": row["value"]})
    rows.sort(key=lambda r: (r["namespace"], r["key"]))
    dump(OUT / LOOKUP_FIXTURES, rows)
    shutil.rmtree(tmp)
    print(f"{len(TEST)} test rows, {len(TRAIN)} train rows, {len(recorder)} replies, {len(rows)} lookups -> {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
