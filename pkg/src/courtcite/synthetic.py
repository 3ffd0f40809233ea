"""Synthetic court decisions with known segment layout and citation offsets.

The generated texts imitate the structure of Czech apex-court decisions:
header, procedural history, submissions, the court's argumentation (the only
place citations are planted), footer, optional dissent and footnotes. Every
document carries its gold paragraph types and gold identifier spans, so the
generator serves as the labeled-data oracle for training and acceptance
checks.
"""
from __future__ import annotations

import datetime as dt
import json
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .courts import CourtClass
from .normalizer import CC_SENATES, CanonicalIdentifier, format_identifier
from .segmenter import SegmentType, Segment, segments_from_types, write_segments
from .recognizer import GOLD_LABEL, write_gold

SC_MARKS = ("Cdo", "Cdo", "Cdo", "Odo", "Tdo", "NSČR")
SAC_MARKS = ("As", "Afs", "Azs", "Ads", "As")

COURT = {
    CourtClass.SC: {"nom": "Nejvyšší soud", "gen": "Nejvyššího soudu", "agenda": "dovolání",
                    "party": "dovolatel", "remedy": "dovolací"},
    CourtClass.SAC: {"nom": "Nejvyšší správní soud", "gen": "Nejvyššího správního soudu",
                     "agenda": "kasační stížnost", "party": "stěžovatel", "remedy": "kasační"},
    CourtClass.CC: {"nom": "Ústavní soud", "gen": "Ústavního soudu", "agenda": "ústavní stížnost",
                    "party": "stěžovatel", "remedy": "ústavní"},
}

CITIES = ("Praze", "Brně", "Ostravě", "Plzni", "Olomouci", "Hradci Králové", "Ústí nad Labem",
          "Českých Budějovicích", "Liberci", "Zlíně")
JUDGES = ("JUDr. Jana Nováka", "JUDr. Petry Svobodové", "Mgr. Tomáše Dvořáka", "JUDr. Evy Černé",
          "JUDr. Pavla Procházky", "doc. JUDr. Karla Veselého", "JUDr. Lenky Horákové")
SIGNERS = ("JUDr. Jan Novák", "JUDr. Petra Svobodová", "Mgr. Tomáš Dvořák", "JUDr. Eva Černá")
PARTIES = ("ALFA STAV s. r. o.", "Josef Kučera", "Marie Pokorná", "BETA FINANCE a. s.",
           "obec Dolní Lhota", "Jiří Marek", "GAMA reality s. r. o.", "Hana Benešová")
AUTHORS = ("Lavický, P. a kol.", "Drápal, L., Bureš, J.", "Wagnerová, E. a kol.", "Švestka, J.",
           "Kmec, J.", "Hendrych, D.")
BOOKS = ("Občanský soudní řád. Komentář", "Listina základních práv a svobod. Komentář",
         "Správní právo. Obecná část", "Soudní řád správní. Komentář", "Občanský zákoník. Komentář")
ISSUES = ("otázku promlčení nároku na náhradu škody", "otázku platnosti kupní smlouvy",
          "otázku odpovědnosti za vady díla", "výklad pojmu dobré mravy",
          "otázku běhu lhůty k podání žaloby", "otázku přezkoumatelnosti rozhodnutí správního orgánu",
          "otázku přiměřenosti uložené sankce", "otázku nároku na zadostiučinění")
PRINCIPLES = ("posouzení této otázky závisí na okolnostech konkrétního případu",
              "soud je povinen se vypořádat se všemi námitkami účastníka",
              "lhůta počíná běžet dnem, kdy se poškozený dozvěděl o škodě",
              "neurčitý právní pojem je třeba vykládat s ohledem na účel právní úpravy",
              "nepřezkoumatelnost rozhodnutí je vadou, k níž soud přihlíží z úřední povinnosti",
              "zásada proporcionality vyžaduje vážení dotčených zájmů")
FILLER = ("Věc se týká {issue}.", "Na tom nic nemění ani skutečnost, že řízení trvalo více než tři roky.",
          "Tato okolnost nebyla mezi účastníky sporná.")

HEADER_TITLES = {
    CourtClass.SC: ("ROZSUDEK JMÉNEM REPUBLIKY", "USNESENÍ", "ČESKÁ REPUBLIKA ROZSUDEK JMÉNEM REPUBLIKY"),
    CourtClass.SAC: ("ROZSUDEK JMÉNEM REPUBLIKY", "USNESENÍ", "ČESKÁ REPUBLIKA ROZSUDEK JMÉNEM REPUBLIKY"),
    CourtClass.CC: ("NÁLEZ Ústavního soudu Jménem republiky", "USNESENÍ Ústavního soudu",
                    "ČESKÁ REPUBLIKA NÁLEZ Ústavního soudu Jménem republiky"),
}
HEADER_BODY = (
    "{Court} rozhodl v senátě složeném z předsedy senátu {judge} a soudců {judge2} a {judge3} "
    "v právní věci {party}, zastoupeného advokátem se sídlem v {city}, proti {party2}, "
    "o {agenda} proti rozhodnutí ze dne {date}, takto:",
    "{Court} rozhodl v senátě složeném z předsedkyně senátu {judge} a soudců {judge2} a {judge3} "
    "ve věci {party} proti {party2} o {agenda} takto:",
)
HEADER_VERDICT = (
    "I. {Agenda} se zamítá. II. Žádný z účastníků nemá právo na náhradu nákladů řízení.",
    "I. {Agenda} se odmítá. II. Stěžovatel je povinen zaplatit náhradu nákladů řízení ve výši {amount} Kč.",
    "Rozhodnutí ze dne {date} se zrušuje a věc se vrací k dalšímu řízení.",
)
HISTORY = (
    "Okresní soud v {city} rozsudkem ze dne {date} uložil žalované povinnost zaplatit žalobci "
    "částku {amount} Kč s příslušenstvím.",
    "K odvolání žalované Krajský soud v {city} rozsudkem ze dne {date} rozsudek soudu prvního "
    "stupně změnil tak, že žalobu zamítl.",
    "Soud prvního stupně vyšel ze zjištění, že účastníci uzavřeli dne {date} smlouvu o dílo.",
    "Odvolací soud se ztotožnil se skutkovými zjištěními soudu prvního stupně, dospěl však "
    "k odlišnému právnímu závěru.",
    "Krajský soud v {city} rozsudkem ze dne {date} zamítl žalobu proti rozhodnutí žalovaného "
    "ze dne {date2}.",
    "Žalovaný rozhodnutím ze dne {date} zamítl odvolání a potvrdil rozhodnutí správního orgánu "
    "prvního stupně.",
)
SUBMISSION = (
    "Proti rozhodnutí odvolacího soudu podal {party_role} {agenda}, v níž namítá, že soud "
    "nesprávně posoudil {issue}.",
    "{Party_role} navrhuje, aby {court_gen_short} napadené rozhodnutí zrušil a věc vrátil "
    "k dalšímu řízení.",
    "Žalovaná ve vyjádření k podání uvedla, že napadené rozhodnutí považuje za správné, "
    "a navrhla návrh zamítnout.",
    "{Party_role} tvrdí, že napadeným rozhodnutím bylo porušeno jeho právo na spravedlivý proces "
    "podle čl. 36 odst. 1 Listiny základních práv a svobod.",
    "Vedlejší účastník ve vyjádření navrhl, aby návrh byl odmítnut jako zjevně neopodstatněný.",
    "{Party_role} dále namítá, že se soudy nevypořádaly s jeho námitkou týkající se {issue_short}.",
)
ARGUMENT_PLAIN = (
    "{Court} posoudil věc a dospěl k závěru, že {agenda} není důvodná.",
    "{Court} přezkoumal napadené rozhodnutí v rozsahu uplatněných důvodů a dospěl k závěru, "
    "že je důvodné.",
    "Podle § {para} odst. {num} zákona je návrh přípustný, jestliže napadené rozhodnutí závisí "
    "na vyřešení otázky hmotného nebo procesního práva.",
    "Z uvedeného je zřejmé, že napadené rozhodnutí je z hlediska uplatněných námitek věcně správné.",
    "{Court} proto návrh podle § {para} písm. a) zákona zamítl.",
    "V posuzované věci nebylo pochyb o tom, že {principle}.",
)
# (kind, template); kind decides which citation surfaces fit the slot
ARGUMENT_CITING = (
    ("apex", "Jak {court_nom} vyložil již v rozhodnutí ze dne {date}, sp. zn. {cite}, {principle}."),
    ("apex", "Obdobně viz též usnesení ze dne {date}, sp. zn. {cite}."),
    ("apex", "Na tomto závěru nic nemění ani nález sp. zn. {cite}, na který {party_role} odkazuje, "
             "neboť {principle}."),
    ("apex", "Tento právní názor je v judikatuře ustálený (srov. rozsudek sp. zn. {cite})."),
    ("apex", "Ustálená judikatura (viz např. rozhodnutí {cite}) dovozuje, že {principle}."),
    ("apex", "Tím se odvolací soud odchýlil od rozsudku sp. zn. {cite}, podle něhož {principle}."),
    ("cj", "Na věc dopadá též rozsudek ze dne {date}, č. j. {cite}, podle kterého {principle}."),
    ("cjeu", "Soudní dvůr Evropské unie ve věci {cite} dovodil, že {principle}."),
    ("echr", "Evropský soud pro lidská práva ve věci {party} proti České republice, stížnost č. {cite}, "
             "uvedl, že {principle}."),
    ("lower", "Krajský soud v {city} ve věci sp. zn. {cite} rozhodl obdobně."),
)
FOOTER = (
    "Poučení: Proti tomuto rozhodnutí nejsou opravné prostředky přípustné.",
    "Poučení: Proti rozhodnutí Ústavního soudu se nelze odvolat.",
    "V {city} dne {date} {signer} předseda senátu",
    "V {city} dne {date} {signer} předsedkyně senátu",
)
DISSENT = (
    "Odlišné stanovisko soudce {judge} k rozhodnutí senátu.",
    "S většinovým názorem senátu nesouhlasím, neboť podle mého názoru {principle} nebylo dostatečně zváženo.",
    "Podle mého názoru měl senát návrhu vyhovět, protože soudy porušily zásadu předvídatelnosti.",
)
FOOTNOTES = (
    "[{n}] Srov. {author} {book}. Praha: C. H. Beck, {year}, s. {num}.",
    "[{n}] Blíže viz {author} {book}. 2. vydání. Praha: Wolters Kluwer, {year}, s. {num} a násl.",
)

_SLOT_RE = re.compile(r"\{(\w+)\}")


@dataclass
class SyntheticDocument:
    doc_id: str
    court: CourtClass
    docket: str
    date: dt.date
    text: str
    paragraph_types: list
    citations: list = field(default_factory=list)   # (char_start, char_end, surface)

    @property
    def segments(self) -> list:
        from .corpus import split_paragraphs
        return segments_from_types(self.paragraph_types, split_paragraphs(self.text))

    def to_document(self):
        from .corpus import make_document
        return make_document(self.doc_id, self.court, self.docket, self.date, self.text)


def random_date(rng: random.Random, start=dt.date(1993, 1, 1), end=dt.date(2018, 9, 30)) -> dt.date:
    return start + dt.timedelta(days=rng.randrange((end - start).days + 1))


def czech_date(d: dt.date) -> str:
    return f"{d.day}. {d.month}. {d.year}"


def random_identifier(rng: random.Random, court: CourtClass, year: Optional[int] = None) -> CanonicalIdentifier:
    year = year if year is not None else rng.randint(1993, 2018)
    number = rng.randint(1, 4999)
    if court is CourtClass.CC:
        return CanonicalIdentifier(court, rng.choice(CC_SENATES), "ÚS", number, year)
    if court is CourtClass.SC:
        mark = rng.choice(SC_MARKS)
        senate = rng.choice((20, 21, 22, 23, 25, 26, 28, 29, 30, 32, 33)) if mark != "Tdo" else rng.choice((3, 4, 5, 6, 7, 8, 11))
    else:
        mark = rng.choice(SAC_MARKS)
        senate = rng.randint(1, 10)
    return CanonicalIdentifier(court, str(senate), mark, number, year)


def render_identifier(rng: random.Random, c: CanonicalIdentifier, style: str = "apex") -> str:
    """A surface form of ``c`` as it would be written inside a decision."""
    if c.court is CourtClass.CC:
        year = str(c.year)[2:] if c.year < 2000 and rng.random() < 0.7 else str(c.year)
        sep = "" if rng.random() < 0.1 else " "
        return f"{c.senate}.{sep}ÚS {c.number}/{year}"
    base = f"{c.senate} {c.register} {c.number}/{c.year}"
    if style == "cj":
        return f"{base}-{rng.randint(20, 150)}"
    return base


def render_other(rng: random.Random, kind: str) -> str:
    if kind == "cjeu":
        return f"C-{rng.randint(1, 699)}/{rng.randint(10, 99):02d}"
    if kind == "echr":
        return f"{rng.randint(1000, 79999)}/{rng.randint(0, 18):02d}"
    return f"{rng.randint(5, 70)} {rng.choice(('Co', 'Cmo', 'To', 'A', 'Ca'))} {rng.randint(1, 999)}/{rng.randint(1995, 2017)}"


class _Builder:
    """Concatenates template pieces while recording citation offsets."""

    def __init__(self):
        self.parts = []
        self.length = 0
        self.citations = []

    def add(self, text: str) -> None:
        self.parts.append(text)
        self.length += len(text)

    def add_template(self, template: str, values: dict, cite: Optional[str] = None) -> None:
        pos = 0
        for m in _SLOT_RE.finditer(template):
            self.add(template[pos:m.start()])
            name = m.group(1)
            if name == "cite":
                start = self.length
                self.add(cite)
                self.citations.append((start, self.length, cite))
            else:
                self.add(values[name])
            pos = m.end()
        self.add(template[pos:])

    @property
    def text(self) -> str:
        return "".join(self.parts)


def _values(rng: random.Random, court: CourtClass) -> dict:
    info = COURT[court]
    judges = rng.sample(JUDGES, 3)
    parties = rng.sample(PARTIES, 2)
    return {
        "Court": info["nom"], "court_nom": info["nom"], "court_gen_short": info["nom"],
        "agenda": info["agenda"], "Agenda": info["agenda"][0].upper() + info["agenda"][1:],
        "party_role": info["party"], "Party_role": info["party"].capitalize(),
        "judge": judges[0], "judge2": judges[1], "judge3": judges[2],
        "party": parties[0], "party2": parties[1], "signer": rng.choice(SIGNERS),
        "city": rng.choice(CITIES), "date": czech_date(random_date(rng)),
        "date2": czech_date(random_date(rng)), "amount": f"{rng.randint(10, 990)} {rng.randint(0, 999):03d}",
        "issue": rng.choice(ISSUES), "issue_short": rng.choice(ISSUES).replace("otázku ", "otázky "),
        "principle": rng.choice(PRINCIPLES), "para": str(rng.randint(2, 250)), "num": str(rng.randint(1, 5)),
        "author": rng.choice(AUTHORS), "book": rng.choice(BOOKS), "year": str(rng.randint(1995, 2018)),
        "n": "1",
    }


def _sentences(rng: random.Random, court: CourtClass, pool: Sequence[str], k: int, b: _Builder) -> None:
    for i, template in enumerate(rng.sample(list(pool), min(k, len(pool)))):
        if i:
            b.add(" ")
        b.add_template(template, _values(rng, court))


def _citation_sentence(rng: random.Random, court: CourtClass, kind: str, surface: str, b: _Builder) -> None:
    options = [t for k, t in ARGUMENT_CITING if k == kind] or [t for k, t in ARGUMENT_CITING if k == "apex"]
    b.add_template(rng.choice(options), _values(rng, court), cite=surface)


def random_citation(rng: random.Random, citing_court: CourtClass, targets: Sequence[CanonicalIdentifier] = ()):
    """(kind, surface) for a random mention; ``targets`` are preferred dockets to cite."""
    roll = rng.random()
    if roll < 0.15:
        kind = rng.choice(("cjeu", "echr", "lower"))
        return kind, render_other(rng, kind)
    if targets and roll < 0.55:
        target = rng.choice(targets)
    else:
        court = citing_court if rng.random() < 0.6 else rng.choice((CourtClass.SC, CourtClass.SAC, CourtClass.CC))
        target = random_identifier(rng, court)
    kind = "cj" if target.court is not CourtClass.CC and rng.random() < 0.2 else "apex"
    return kind, render_identifier(rng, target, kind)


def generate_document(rng: random.Random, doc_id: str, court: CourtClass, docket: str, date: dt.date,
                      citations: Optional[Sequence[tuple]] = None, n_citations: Optional[int] = None,
                      targets: Sequence[CanonicalIdentifier] = ()) -> SyntheticDocument:
    """One decision. ``citations`` is a list of (kind, surface) to plant in the argumentation;
    when omitted, ``n_citations`` (default random 0-4) random mentions are planted."""
    if citations is None:
        n = rng.randint(0, 4) if n_citations is None else n_citations
        citations = [random_citation(rng, court, targets) for _ in range(n)]
    citations = list(citations)

    b = _Builder()
    types = []

    def paragraph(kind: SegmentType, fill) -> None:
        if types:
            b.add("\n\n")
        fill()
        types.append(kind)

    titles = HEADER_TITLES[court]
    paragraph(SegmentType.HEADER, lambda: b.add(rng.choice(titles)))
    paragraph(SegmentType.HEADER, lambda: b.add_template(rng.choice(HEADER_BODY), _values(rng, court)))
    if rng.random() < 0.7:
        paragraph(SegmentType.HEADER, lambda: b.add_template(rng.choice(HEADER_VERDICT), _values(rng, court)))
    for _ in range(rng.randint(1, 3)):
        paragraph(SegmentType.HISTORY, lambda: _sentences(rng, court, HISTORY, rng.randint(1, 3), b))
    for _ in range(rng.randint(1, 2)):
        paragraph(SegmentType.SUBMISSION_REJOINDER, lambda: _sentences(rng, court, SUBMISSION, rng.randint(1, 3), b))

    n_arg = max(rng.randint(2, 4), (len(citations) + 1) // 2)
    per_para = [[] for _ in range(n_arg)]
    for i, cite in enumerate(citations):
        per_para[i % n_arg].append(cite)

    def argument(cites):
        def fill():
            pieces = [("plain", None)] * rng.randint(1, 2) + [("cite", c) for c in cites]
            first = ("plain", None)
            rest = pieces[1:]
            rng.shuffle(rest)
            for i, (what, cite) in enumerate([first] + rest):
                if i:
                    b.add(" ")
                if what == "plain":
                    b.add_template(rng.choice(ARGUMENT_PLAIN), _values(rng, court))
                else:
                    _citation_sentence(rng, court, cite[0], cite[1], b)
        return fill

    for cites in per_para:
        paragraph(SegmentType.ARGUMENTATION, argument(cites))
    paragraph(SegmentType.FOOTER, lambda: b.add_template(
        FOOTER[1] if court is CourtClass.CC else FOOTER[0], _values(rng, court)))
    paragraph(SegmentType.FOOTER, lambda: b.add_template(rng.choice(FOOTER[2:]), _values(rng, court)))
    if court is CourtClass.CC and rng.random() < 0.4:
        for _ in range(rng.randint(1, 2)):
            paragraph(SegmentType.DISSENT, lambda: _sentences(rng, court, DISSENT, rng.randint(1, 2), b))
    if rng.random() < 0.3:
        for k in range(rng.randint(1, 2)):
            values = _values(rng, court)
            values["n"] = str(k + 1)
            paragraph(SegmentType.FOOTNOTES, lambda: b.add_template(rng.choice(FOOTNOTES), values))

    return SyntheticDocument(doc_id, court, docket, date, b.text, types, b.citations)


def generate_corpus(n_docs: int, seed: int, prefix: str = "D", citations_per_doc=(0, 4)) -> list:
    """``n_docs`` random decisions whose citations partly target each other."""
    rng = random.Random(seed)
    courts = [rng.choice((CourtClass.SC, CourtClass.SAC, CourtClass.CC)) for _ in range(n_docs)]
    dockets = []
    seen = set()
    while len(dockets) < n_docs:
        c = random_identifier(rng, courts[len(dockets)])
        if format_identifier(c) not in seen:
            seen.add(format_identifier(c))
            dockets.append(c)
    docs = []
    for i, (court, docket) in enumerate(zip(courts, dockets)):
        date = random_date(rng, dt.date(docket.year, 1, 1), dt.date(docket.year, 12, 28))
        n = rng.randint(*citations_per_doc)
        docs.append(generate_document(rng, f"{prefix}{i:04d}", court, format_identifier(docket), date,
                                      n_citations=n, targets=dockets))
    return docs


def generate_sentences(n: int, seed: int, citing_ratio: float = 0.6) -> list:
    """(text, [(char_start, char_end)]) pairs of argumentation-style sentences."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        court = rng.choice((CourtClass.SC, CourtClass.SAC, CourtClass.CC))
        b = _Builder()
        if rng.random() < citing_ratio:
            kind, surface = random_citation(rng, court)
            _citation_sentence(rng, court, kind, surface, b)
        else:
            b.add_template(rng.choice(ARGUMENT_PLAIN + SUBMISSION), _values(rng, court))
        out.append((b.text, [(s, e) for s, e, _ in b.citations]))
    return out


def write_corpus(docs: Sequence[SyntheticDocument], directory: Union[str, Path]) -> Path:
    """Write manifest.jsonl, texts/, gold_segments.jsonl and gold.jsonl; return the manifest path."""
    directory = Path(directory)
    (directory / "texts").mkdir(parents=True, exist_ok=True)
    manifest = directory / "manifest.jsonl"
    with open(manifest, "w", encoding="utf-8", newline="\n") as fh:
        for doc in docs:
            rel = f"texts/{doc.doc_id}.txt"
            (directory / rel).write_text(doc.text + "\n", encoding="utf-8", newline="\n")
            fh.write(json.dumps({"doc_id": doc.doc_id, "court": doc.court.value, "docket": doc.docket,
                                 "date": doc.date.isoformat(), "file": rel}, ensure_ascii=False) + "\n")
    write_segments({doc.doc_id: doc.segments for doc in docs}, directory / "gold_segments.jsonl")
    write_gold({doc.doc_id: [(s, e, GOLD_LABEL) for s, e, _ in doc.citations] for doc in docs},
               directory / "gold.jsonl")
    return manifest
