#!/usr/bin/env python3
"""Generate the committed fixture corpora.

f1: 50 one-paragraph documents (d0..d49) over a small animal vocabulary.
f2: a SQuAD-style corpus of fictional people, cities, companies and rivers
    (about 100 articles of 5 paragraphs) with paraphrased dev and train
    questions. Every question names its source paragraph.

Output is a pure function of --seed.
"""

import argparse
import json
import random
from pathlib import Path


def indefinite(noun):
    return ("an " if noun[0] in "aeiou" else "a ") + noun


SYLLABLES = [
    "al", "bar", "cor", "dun", "el", "fen", "gar", "hal", "is", "jor", "kel", "lor",
    "mar", "nor", "os", "pel", "quin", "ras", "sel", "tor", "ul", "vas", "wen", "yor",
    "zan", "bri", "dra", "vel", "thal", "mor", "kes", "ven", "lin", "dor", "hask", "rin",
]

ANIMALS = [
    "cat", "dog", "fox", "owl", "horse", "mouse", "rabbit", "otter", "badger", "heron",
    "wolf", "deer", "goat", "sheep", "hawk", "crow", "frog", "trout", "bear", "lynx",
]
VERBS = ["chased", "watched", "followed", "ignored", "greeted", "found", "fed", "heard"]
PLACES = ["barn", "meadow", "river", "forest", "garden", "field", "hill", "pond", "yard"]

FILLER = [
    "{N} is often mentioned in regional guides and school textbooks.",
    "Visitors describe the atmosphere as quiet, with old stone buildings and narrow lanes.",
    "Local historians have collected letters, drawings and records from this period.",
    "Several archives hold material related to these events.",
    "The details of this period remain debated among scholars.",
    "Much of this account comes from a memoir published decades later.",
    "Later writers praised the work for its clarity and ambition.",
    "Contemporary newspapers covered the story at length.",
    "The surrounding countryside is known for orchards, markets and long winters.",
    "A small exhibition about this era opened at the municipal library.",
]

PROFESSIONS = [
    ("composer", "symphonies", "music"),
    ("painter", "portraits", "painting"),
    ("astronomer", "papers", "astronomy"),
    ("engineer", "bridges", "engineering"),
    ("botanist", "field guides", "botany"),
    ("cartographer", "maps", "surveying"),
    ("novelist", "novels", "literature"),
]

INDUSTRIES = [
    ("glassworks", "glass"),
    ("shipyard", "ships"),
    ("printing house", "books"),
    ("textile mill", "cloth"),
    ("clockmaker", "clocks"),
    ("brewery", "beer"),
]


class Names:
    def __init__(self, rng):
        self.rng = rng
        self.used = set()

    def word(self, parts=2):
        while True:
            w = "".join(self.rng.choice(SYLLABLES) for _ in range(parts))
            w = w.capitalize()
            if w not in self.used and len(w) >= 4:
                self.used.add(w)
                return w

    def person(self):
        return f"{self.word(2)} {self.word(2)}"


def year(rng, lo, hi):
    return str(rng.randint(lo, hi))


class Fact:
    def __init__(self, sentence, question, answer, kind):
        self.sentence = sentence
        self.question = question
        self.answer = answer
        self.kind = kind


def build_world(rng, n_people, n_cities, n_orgs, n_rivers):
    names = Names(rng)
    cities = [names.word(rng.choice([2, 3])) for _ in range(n_cities)]
    rivers = [names.word(2) for _ in range(n_rivers)]
    mountains = [names.word(2) for _ in range(n_rivers)]
    people = [names.person() for _ in range(n_people)]
    extra_people = [names.person() for _ in range(n_people)]
    orgs = [f"{names.word(2)} {rng.choice(['Works', 'Company', 'Foundry', 'Press', 'Mills'])}" for _ in range(n_orgs)]
    return names, cities, rivers, mountains, people, extra_people, orgs


def person_article(rng, name, world):
    _, cities, _, _, people, extra, orgs = world
    last = name.split()[1]
    prof, works, field = rng.choice(PROFESSIONS)
    pron, obj, poss = rng.choice([("he", "him", "his"), ("she", "her", "her")])
    birth_city = rng.choice(cities)
    move_city = rng.choice([c for c in cities if c != birth_city])
    born = int(year(rng, 1780, 1880))
    moved = born + rng.randint(18, 30)
    died = moved + rng.randint(15, 45)
    teacher = rng.choice(extra)
    n_works = str(rng.randint(3, 60))
    rival = rng.choice([p for p in people if p != name])
    org = rng.choice(orgs)
    prize_year = str(died - rng.randint(2, 12))
    students = str(rng.randint(4, 40))

    paras = [
        [
            Fact(f"{name} was {indefinite(prof)} born in {birth_city} in {born}.",
                 rng.choice([f"Where was {name} born?", f"In which city was the {prof} {name} born?"]),
                 birth_city, "place"),
            Fact(f"{last}'s early training came from {teacher}, who taught {obj} {field} for several years.",
                 rng.choice([f"Who taught {field} to {name}?", f"Who was the teacher of {name}?"]),
                 teacher, "person"),
        ],
        [
            Fact(f"In {moved}, {last} left home and settled in {move_city}.",
                 rng.choice([f"To which city did {name} move in {moved}?", f"Where did {name} settle after leaving home?"]),
                 move_city, "place"),
            Fact(f"There {pron} joined the {org} as an apprentice.",
                 f"Which company did {name} join as an apprentice?", org, "org"),
        ],
        [
            Fact(f"Over a long career {last} completed {n_works} {works}.",
                 rng.choice([f"How many {works} did {name} complete?", f"What number of {works} did {name} finish?"]),
                 n_works, "number"),
            Fact(f"{poss.capitalize()} chief rival was {rival}.",
                 f"Who was the rival of {name}?", rival, "person"),
        ],
        [
            Fact(f"{last} died in {died}.",
                 rng.choice([f"In what year did {name} die?", f"When did {name} die?"]),
                 str(died), "year"),
            Fact(f"{pron.capitalize()} received the Golden Compass award in {prize_year}.",
                 f"In which year did {name} receive the Golden Compass award?", prize_year, "year"),
            Fact(f"{pron.capitalize()} trained {students} students.",
                 f"How many students did {name} train?", students, "number"),
        ],
    ]
    return {"kind": "person", "title": name, "paras": paras, "short": last,
            "links": [birth_city, move_city, org, rival]}


def city_article(rng, name, world):
    _, _, rivers, _, people, extra, _ = world
    founded = year(rng, 900, 1600)
    founder = rng.choice(extra)
    river = rng.choice(rivers)
    bridges = str(rng.randint(2, 30))
    mayor = rng.choice(extra)
    mayor_year = year(rng, 1850, 1990)
    markets = str(rng.randint(2, 12))
    charter = str(int(founded) + rng.randint(40, 200))
    paras = [
        [
            Fact(f"{name} was founded in {founded} by {founder}.",
                 rng.choice([f"When was {name} founded?", f"In what year was the city of {name} founded?"]),
                 founded, "year"),
            Fact(f"The settlement grew around the fortified house of {founder}.",
                 f"Who founded {name}?", founder, "person"),
        ],
        [
            Fact(f"The {river} river flows through {name} from east to west.",
                 rng.choice([f"What river flows through {name}?", f"Which river runs through the city of {name}?"]),
                 river, "place"),
            Fact(f"The city has {bridges} bridges.",
                 f"How many bridges does {name} have?", bridges, "number"),
        ],
        [
            Fact(f"{mayor} became mayor of {name} in {mayor_year}.",
                 rng.choice([f"Who became mayor of {name} in {mayor_year}?", f"Who was elected mayor of {name} in {mayor_year}?"]),
                 mayor, "person"),
            Fact(f"The town received its charter in {charter}.",
                 f"In what year did {name} receive its charter?", charter, "year"),
        ],
        [
            Fact(f"Today {markets} weekly markets are held in its squares.",
                 f"How many weekly markets are held in {name}?", markets, "number"),
        ],
    ]
    return {"kind": "city", "title": name, "paras": paras, "short": name, "links": [river]}


def org_article(rng, name, world):
    _, cities, _, _, people, extra, _ = world
    industry, product = rng.choice(INDUSTRIES)
    founder = rng.choice(extra)
    founded = year(rng, 1700, 1920)
    hq = rng.choice(cities)
    workers = str(rng.randint(20, 900))
    closed = str(int(founded) + rng.randint(30, 150))
    director = rng.choice(people)
    paras = [
        [
            Fact(f"The {name} was {indefinite(industry)} established by {founder}.",
                 rng.choice([f"Who established the {name}?", f"Who was the founder of the {name}?"]),
                 founder, "person"),
            Fact(f"It opened in {founded}.",
                 f"When did the {name} open?", founded, "year"),
        ],
        [
            Fact(f"Its main workshop stood in {hq}.",
                 rng.choice([f"Where was the main workshop of the {name}?", f"In which city did the {name} have its workshop?"]),
                 hq, "place"),
            Fact(f"At its peak it employed {workers} people making {product}.",
                 f"How many people did the {name} employ at its peak?", workers, "number"),
        ],
        [
            Fact(f"{director} served as its director for a decade.",
                 f"Who served as director of the {name}?", director, "person"),
            Fact(f"The {industry} closed in {closed}.",
                 f"In what year did the {name} close?", closed, "year"),
        ],
    ]
    return {"kind": "org", "title": name, "paras": paras, "short": name, "links": [hq, director]}


def river_article(rng, name, mountain, world):
    _, cities, _, _, _, _, _ = world
    length = str(rng.randint(40, 900))
    mouth = rng.choice(cities)
    tributaries = str(rng.randint(2, 25))
    survey = year(rng, 1700, 1900)
    paras = [
        [
            Fact(f"The {name} is a river {length} kilometres long.",
                 rng.choice([f"How long is the {name} river in kilometres?", f"What is the length of the {name} river?"]),
                 length, "number"),
            Fact(f"It rises on the slopes of Mount {mountain}.",
                 f"Where does the {name} river rise?", f"Mount {mountain}", "place"),
        ],
        [
            Fact(f"The river reaches the sea near {mouth}.",
                 f"Near which city does the {name} river reach the sea?", mouth, "place"),
            Fact(f"It is fed by {tributaries} tributaries.",
                 f"How many tributaries feed the {name} river?", tributaries, "number"),
        ],
        [
            Fact(f"The first survey of its course was made in {survey}.",
                 f"When was the first survey of the {name} river made?", survey, "year"),
        ],
    ]
    return {"kind": "river", "title": name, "paras": paras, "short": name, "links": [mouth]}


PERSON_ECHOES = [
    "A statue of {o}, who was born far from here, stands by the gate; {o} is said to have visited often.",
    "Letters from {o} about the years before {o} died are kept in a private collection.",
    "The students of {o} later moved and settled in other cities.",
    "A rival of {o} once taught here, and {o} came to hear the lectures.",
    "An award named after {o} is given to apprentices who complete their training.",
]
CITY_ECHOES = [
    "Traders from {o} crossed many bridges and markets to reach the founded town.",
    "Like {o}, the place had a mayor elected each year and a river nearby.",
    "Visitors from {o} admired the charter and the weekly markets.",
]
ORG_ECHOES = [
    "Workers who were employed by the {o} opened a workshop in the city later.",
    "The {o} was established in a different region and never had a director here.",
    "Apprentices from the {o} joined local firms before the {o} closed its doors.",
]
RIVER_ECHOES = [
    "The {o} river is long and fed by tributaries, but it does not reach the sea here.",
    "Maps from the first survey show the {o} river far to the north.",
    "Some say the {o} river rises in the hills, though the {o} is rarely visited.",
]
POPULARITY_EXPONENT = 1.0
ECHOES = {"person": PERSON_ECHOES, "city": CITY_ECHOES, "org": ORG_ECHOES, "river": RIVER_ECHOES}


def pick_others(rng, others, k):
    """k distinct entities, drawn by popularity so a few are mentioned often."""
    chosen = []
    while len(chosen) < k:
        o = rng.choices(others, weights=[a["pop"] for a in others])[0]
        if o not in chosen:
            chosen.append(o)
    return chosen


def distractor_sentences(rng, others, k=3):
    """Sentences that mention other entities with question-like vocabulary but
    without their answers, so lexical retrieval sees near-miss paragraphs."""
    return [rng.choice(ECHOES[o["kind"]]).format(o=o["title"]) for o in pick_others(rng, others, k)]


def render(rng, art, others):
    """Article body: the fact paragraphs plus a paragraph of cross references."""
    paragraphs, facts = [], []
    for group in art["paras"]:
        sentences = [f.sentence for f in group]
        for filler in rng.sample(FILLER, rng.randint(1, 2)):
            pos = rng.randint(0, len(sentences))
            sentences.insert(pos, filler.format(N=art["short"]))
        if rng.random() < 0.7:
            sentences.append(distractor_sentences(rng, others, 1)[0])
        text = " ".join(sentences)
        paragraphs.append(text)
        facts.append(group)
    tail = distractor_sentences(rng, others, 4)
    tail.insert(1, rng.choice(FILLER).format(N=art["short"]))
    paragraphs.append(" ".join(tail))
    facts.append([])
    return paragraphs, facts


def make_f2(rng, out_dir):
    world = build_world(rng, n_people=40, n_cities=25, n_orgs=20, n_rivers=15)
    _, cities, rivers, mountains, people, _, orgs = world
    arts = [person_article(rng, p, world) for p in people]
    arts += [city_article(rng, c, world) for c in cities]
    arts += [org_article(rng, o, world) for o in orgs]
    arts += [river_article(rng, r, m, world) for r, m in zip(rivers, mountains)]
    rng.shuffle(arts)
    for rank, art in enumerate(arts):
        art["pop"] = 1.0 / (rank + 1) ** POPULARITY_EXPONENT

    articles, pool = [], []
    for i, art in enumerate(arts):
        art_id = f"a{i:03d}_{art['title'].replace(' ', '_')}"
        others = [a for a in arts if a is not art]
        paragraphs, facts = render(rng, art, others)
        articles.append({"article_id": art_id, "title": art["title"], "body": "\n\n".join(paragraphs)})
        for text, group in zip(paragraphs, facts):
            for f in group:
                if f.answer in text:
                    pool.append({"article_id": art_id, "paragraph": text, "fact": f})

    rng.shuffle(pool)
    records = []
    for k, item in enumerate(pool):
        f = item["fact"]
        records.append({
            "qid": f"q{k:04d}",
            "question": f.question,
            "answers": [f.answer],
            "gold_article_id": item["article_id"],
            "gold_paragraph": item["paragraph"],
        })
    dev, train = records[:200], records[200:600]
    out_dir.mkdir(parents=True, exist_ok=True)
    write_jsonl(out_dir / "articles.jsonl", articles)
    write_jsonl(out_dir / "dev_questions.jsonl", dev)
    write_jsonl(out_dir / "train_questions.jsonl", train)
    return len(articles), len(dev), len(train)


def make_f1(rng, out_dir):
    docs = []
    for i in range(50):
        words = []
        for _ in range(rng.randint(2, 4)):
            a, b = rng.sample(ANIMALS, 2)
            words.append(f"The {a} {rng.choice(VERBS)} the {b} near the {rng.choice(PLACES)}.")
        if i == 7:
            words.append("The cat slept while another cat watched the cat door.")
        docs.append({
            "para_id": f"d{i}",
            "article_id": f"d{i}",
            "title": "",
            "body": " ".join(words),
            "position": 0,
        })
    questions = [
        {"qid": "f1q0", "question": "What did the cat chase?", "answers": ["cat"]},
    ]
    out_dir.mkdir(parents=True, exist_ok=True)
    write_jsonl(out_dir / "paragraphs.jsonl", docs)
    write_jsonl(out_dir / "questions.jsonl", questions)


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for r in rows:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "fixtures")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    make_f1(random.Random(args.seed), args.out / "f1")
    n_art, n_dev, n_train = make_f2(random.Random(args.seed + 1), args.out / "f2")
    print(f"f2: {n_art} articles, {n_dev} dev, {n_train} train questions")


if __name__ == "__main__":
    main()
