#!/usr/bin/env python3
"""Regenerate the golden fixture files under fixtures/.

Each fixture bundles a 10-passage corpus, a scripted-backend file, and a
scripted-embedder file whose pinned vectors force the documented retrieval
order: queries map to basis vectors e0/e1, passages get a chosen inner
product against each query plus a unique residual dimension to stay unit
norm. Texts are whitespace-normalized so chunk text == corpus text and the
embedder lookup keys match exactly.
"""

import json
import math
import os

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")
DIM = 16


def norm_text(t):
    return " ".join(t.split())


def doc_vector(slot, a, b):
    """Unit vector with <v, e0> = a, <v, e1> = b, residual in dim `slot`."""
    v = [0.0] * DIM
    v[0] = a
    v[1] = b
    rest = 1.0 - a * a - b * b
    assert rest > 0, (a, b)
    v[2 + slot] = math.sqrt(rest)
    return [round(x, 6) for x in v]


def query_vector(axis):
    v = [0.0] * DIM
    v[axis] = 1.0
    return v


def write_fixture(name, docs, q1, q2, step1_scores, step2_scores, script):
    out_dir = os.path.join(ROOT, name)
    os.makedirs(out_dir, exist_ok=True)

    docs = [(doc_id, title, norm_text(text)) for doc_id, title, text in docs]

    with open(os.path.join(out_dir, "corpus.jsonl"), "w") as f:
        for doc_id, title, text in docs:
            f.write(json.dumps({"id": doc_id, "title": title, "text": text},
                               ensure_ascii=False) + "\n")

    entries = [
        {"text": q1, "vector": query_vector(0)},
        {"text": q2, "vector": query_vector(1)},
    ]
    for slot, (doc_id, _title, text) in enumerate(docs):
        a = step1_scores.get(doc_id, 0.0)
        b = step2_scores.get(doc_id, 0.0)
        entries.append({"text": text, "vector": doc_vector(slot, a, b)})
    with open(os.path.join(out_dir, "embedder.json"), "w") as f:
        json.dump({"dim": DIM, "entries": entries}, f, ensure_ascii=False, indent=1)
        f.write("\n")

    with open(os.path.join(out_dir, "script.jsonl"), "w") as f:
        for entry in script:
            f.write(json.dumps(entry, ensure_ascii=False) + "\n")

    with open(os.path.join(out_dir, "config.toml"), "w") as f:
        f.write(
            "[orchestrator]\n"
            "k = 5\n"
            "\n"
            "[llm_backend]\n"
            f'backend = "scripted:fixtures/{name}/script.jsonl"\n'
            "\n"
            "[retrieval]\n"
            f'embedder = "scripted:fixtures/{name}/embedder.json"\n'
        )


def exact(pattern, response):
    return {"match": "exact", "pattern": pattern, "response": response}


def sub(pattern, response):
    return {"match": "substring", "pattern": pattern, "response": response}


def qa(analysis, answer, rating):
    return json.dumps(
        {"analysis": analysis, "answer": answer, "success": "yes", "rating": rating},
        ensure_ascii=False,
    )


def task(kind, text):
    return json.dumps({"type": kind, "task": text}, ensure_ascii=False)


def notes(items):
    return json.dumps(items, ensure_ascii=False)


# --- fixture: earl (paternal-grandfather case) -----------------------------

EARL_DOCS = [
    ("129772", "Edward de Vere, 17th Earl of Oxford",
     "Edward de Vere, 17th Earl of Oxford Edward de Vere, 17th Earl of Oxford (12 April 1550 - 24 June 1604) "
     "was an English peer and courtier of the Elizabethan era. Oxford was heir to the second oldest earldom in "
     "the kingdom, a court favourite for a time, a sought-after patron of the arts, and noted by his "
     "contemporaries as a lyric poet and court playwright."),
    ("6127861", "John de Vere, 16th Earl of Oxford",
     "son, Edward de Vere, 17th Earl of Oxford, and a daughter, Mary de Vere. Margery died on 2 December 1568. "
     "After his death in Oxford, he was buried in Castle Hedingham, Essex, on 31 August 1562. The Earl was known "
     "as a sportsman and kept a company of players."),
    ("129773", "Edward de Vere, 17th Earl of Oxford",
     "proposed for the authorship of Shakespeare's works. De Vere was the only son of John de Vere, 16th Earl of "
     "Oxford, and Margery Golding. After the death of his father in 1562, he became a ward of Queen Elizabeth and "
     "was sent to live in the household of her principal advisor."),
    ("14010350", "Hedingham Castle",
     "Hedingham Castle, in the village of Castle Hedingham, Essex, is arguably the best preserved Norman keep in "
     "England. The castle fabric dates from the eleventh and twelfth centuries and it was the primary seat of the "
     "de Vere family for many generations."),
    ("12540430", "De Vere family heraldry",
     "The De Vere family motto Vero Nihil Verius, meaning nothing truer than truth, appears on monuments across "
     "Essex. The family's heraldic badge, the blue boar, decorated liveries and manor gateposts throughout their "
     "estates."),
    ("6127862", "John de Vere, 16th Earl of Oxford",
     "John de Vere, 16th Earl of Oxford was the son and heir of John de Vere, 15th Earl of Oxford, by his second "
     "wife Elizabeth Trussell. He succeeded to the earldom and its hereditary offices upon his father's death."),
    ("6127858", "John de Vere, 16th Earl of Oxford",
     "The 16th Earl of Oxford (1516 - 3 August 1562), known to contemporaries as John de Vere, was born to John "
     "de Vere, 15th Earl of Oxford, and raised at Hedingham Castle in Essex before inheriting the title."),
    ("17870603", "De Vere family",
     "De Vere family The de Vere family were an English aristocratic family who derived their surname from Ver, "
     "in Lower Normandy, France. The family's Norman founder in England, Aubrey de Vere, appears in Domesday Book "
     "as a tenant-in-chief."),
    ("129778", "Edward de Vere, 17th Earl of Oxford",
     "was placed in the household of Sir William Cecil, her secretary of state and chief advisor. At 12, de Vere "
     "had become the 17th Earl of Oxford, Lord Great Chamberlain of England, and heir to an estate whose annual "
     "income was substantial."),
    ("6393404", "Aubrey de Vere, 20th Earl of Oxford",
     "Kirke and granddaughter of Aurelian Townshend. They had five children. Since he had no surviving sons and "
     "as no other suitable claimant came forward, he became the last de Vere Earl of Oxford, one of the "
     "longest-lived titles in the peerage of England."),
]

EARL_QUESTION = "Who is Edward De Vere, 17Th Earl Of Oxford's paternal grandfather?"
EARL_Q1 = "Who is Edward De Vere, 17th Earl of Oxford's father?"
EARL_Q2 = "Who was the father of John de Vere, 16th Earl of Oxford?"
NO_FATHER = "No related information about his father."

EARL_SCRIPT = [
    exact(EARL_QUESTION, notes([
        "Identify Edward De Vere, 17th Earl of Oxford's father",
        "Determine the name of Edward De Vere, 17th Earl of Oxford's paternal grandfather based on the father's name.",
    ])),
    sub("Current step: Identify Edward De Vere, 17th Earl of Oxford's father",
        task("search", EARL_Q1)),
    sub("Current step: Determine the name of Edward De Vere",
        task("search", EARL_Q2)),
    sub("Passage: Edward de Vere, 17th Earl of Oxford Edward de Vere", NO_FATHER),
    sub("Passage: son, Edward de Vere, 17th Earl of Oxford, and a daughter", NO_FATHER),
    sub("Passage: proposed for the authorship", notes([
        "Edward De Vere, 17th Earl of Oxford's father is John de Vere, 16th Earl of Oxford. This is evidenced "
        "by the passage stating, \"De Vere was the only son of John de Vere, 16th Earl of Oxford.\"",
    ])),
    sub("Passage: Hedingham Castle", NO_FATHER),
    sub("Passage: The De Vere family motto", NO_FATHER),
    sub("Passage: John de Vere, 16th Earl of Oxford was the son and heir", notes([
        "John de Vere, 16th Earl of Oxford was born to John de Vere, 15th Earl of Oxford.",
    ])),
    sub("Passage: The 16th Earl of Oxford (1516", notes([
        "John de Vere, 16th Earl of Oxford (1516 - 3 August 1562) was born to John de Vere, 15th Earl of Oxford.",
    ])),
    sub("Passage: De Vere family The de Vere family", "No related information"),
    sub("Question: \n" + EARL_Q1, qa(
        "The question asks for the identity of Edward De Vere's father. The relevant document doc-129773 "
        "clearly states that Edward De Vere, 17th Earl of Oxford, is the son of John de Vere, 16th Earl of "
        "Oxford. Other documents do not provide additional information about his father.",
        "John de Vere, 16th Earl of Oxford", 5)),
    sub("Question: \n" + EARL_Q2, qa(
        "The relevant documents indicate that John de Vere, 15th Earl of Oxford is the father of John de Vere, "
        "16th Earl of Oxford",
        "John de Vere, 15th Earl of Oxford", 5)),
]

write_fixture(
    "earl",
    EARL_DOCS,
    EARL_Q1,
    EARL_Q2,
    step1_scores={"129772": 0.60, "6127861": 0.55, "129773": 0.50,
                  "14010350": 0.45, "12540430": 0.40, "129778": 0.05},
    step2_scores={"6127862": 0.60, "6127858": 0.55, "17870603": 0.50,
                  "12540430": 0.45, "14010350": 0.40, "6393404": 0.05},
    script=EARL_SCRIPT,
)

# --- fixture: sitcom (North Star / The Lodge case) --------------------------

SITCOM_DOCS = [
    ("19587422", "North Star (Israeli TV series)",
     "North Star (Israeli TV series) North Star is an Israeli children's television drama that follows a group "
     "of teenagers at a prestigious boarding school in the Galilee, where riding competitions and family secrets "
     "intertwine."),
    ("19587424", "North Star (Israeli TV series)",
     "The second season of the Israeli series expanded the cast and moved production to new stables in the north "
     "of the country, drawing strong ratings among young viewers."),
    ("14539692", "Galilee",
     "Galilee The Galilee is a region located in northern Israel and southern Lebanon. Galilee traditionally "
     "refers to the mountainous part, divided into Upper Galilee and Lower Galilee."),
    ("19587423", "North Star (Israeli TV series)",
     "The British Disney Channel produces an adapted under the title 'The Lodge' (working title: 'North Star'). "
     "Filming took place in Northern Ireland, and the adaptation relocated the story to a rural guest house."),
    ("17716638", "Boarding school",
     "Boarding school A boarding school provides education for pupils who live on the premises, as opposed to a "
     "day school. The word 'boarding' is used in the sense of 'room and board'."),
    ("20322850", "Thomas Doherty (actor)",
     "Thomas Doherty (actor) Thomas Doherty (born 21 April 1995) is a Scottish actor, best known for his roles "
     "as Harry Hook in Disney Channel's \"Descendants 2\" and as Sean in the British musical comedy-drama, "
     "\"The Lodge\". Doherty was born and raised in Edinburgh, Scotland."),
    ("19608218", "The Lodge (TV series)",
     "The Lodge is a British musical comedy-drama television series that premiered in 2016. Thomas Doherty stars "
     "in the series alongside an ensemble cast of young performers at a countryside retreat."),
    ("20322852", "Thomas Doherty (actor)",
     "After graduating from The MGA Academy of Performing Arts in the summer of 2015, Doherty began waiting "
     "tables in Edinburgh at Tigerlilly restaurant. On his days off he auditioned, and he was offered the role "
     "of Sean in 'The Lodge'."),
    ("20322851", "Thomas Doherty (actor)",
     "Doherty joined Lothian Youth Arts and Musicals Company and played a variety of roles, including his debut "
     "as Disney's Aladdin. Doherty attended the Royal High School in Edinburgh before drama school."),
    ("19608221", "The Lodge (TV series)",
     "The series was filmed on location in County Down and features original songs performed by the cast; a "
     "soundtrack album accompanied the first season."),
]

SITCOM_QUESTION = 'What role did Thomas Doherty play in sitcom based on the Israeli series "North Star"?'
SITCOM_Q1 = "What is the name of the sitcom that is based on the Israeli series 'North Star'?"
SITCOM_Q2 = "What character role does Thomas Doherty play in the sitcom 'The Lodge'?"
NO_INFO = "No related information from this document."

SITCOM_SCRIPT = [
    exact(SITCOM_QUESTION, notes([
        "Identify the sitcom based on the Israeli series North Star.",
        "Determine the character role played by Thomas Doherty in that sitcom.",
    ])),
    sub("Current step: Identify the sitcom based on the Israeli series North Star.",
        task("search", SITCOM_Q1)),
    sub("Current step: Determine the character role played by Thomas Doherty",
        task("search", SITCOM_Q2)),
    sub("Passage: North Star (Israeli TV series)", NO_INFO),
    sub("Passage: The second season of the Israeli series", NO_INFO),
    sub("Passage: Galilee The Galilee is a region", NO_INFO),
    sub("Passage: The British Disney Channel produces", notes([
        "The sitcom based on the Israeli series 'North Star' is titled \"The Lodge.\" This is evidenced by the "
        "passage stating, \"The British Disney Channel produces an adapted under the title 'The Lodge' (working "
        "title: 'North Star')\".",
    ])),
    sub("Passage: Boarding school A boarding school", NO_INFO),
    sub("Passage: Thomas Doherty (actor) Thomas Doherty (born 21 April 1995)", notes([
        "Thomas Doherty plays the character role of Sean in the British musical comedy-drama, The Lodge. This "
        "is directly stated in the passage where it mentions his best-known roles.",
    ])),
    sub("Passage: The Lodge is a British musical comedy-drama", notes([
        "Thomas Doherty stars in the role of a character in the TV series \"The Lodge.\" The passage does not "
        "specify the name of his character or the details of his role",
    ])),
    sub("Passage: After graduating from The MGA Academy", notes([
        "Thomas Doherty plays the role of Sean in the sitcom \"The Lodge.\" This is evidenced by the passage "
        "stating, \"offered the role of Sean in 'The Lodge'.\"",
    ])),
    sub("Passage: Doherty joined Lothian Youth Arts", "No related information from this document"),
    sub("Passage: The series was filmed on location in County Down", "No related information from this document"),
    sub("Question: \n" + SITCOM_Q1, qa(
        "The question asks for the name of a sitcom that is based on the Israeli series 'North Star'. The "
        "relevant document (doc-19587423) clearly states that the sitcom is titled 'The Lodge'. The other "
        "documents do not provide any relevant information. Therefore, the answer is straightforward based on "
        "the retrieved context.",
        "The Lodge", 5)),
    sub("Question: \n" + SITCOM_Q2, qa(
        "The question asks for the character role of Thomas Doherty in 'The Lodge'. The relevant documents "
        "consistently indicate that he plays the character named Sean. Therefore, the answer is straightforward "
        "based on the retrieved context.",
        "Sean", 5)),
]

write_fixture(
    "sitcom",
    SITCOM_DOCS,
    SITCOM_Q1,
    SITCOM_Q2,
    step1_scores={"19587422": 0.60, "19587424": 0.55, "14539692": 0.50,
                  "19587423": 0.45, "17716638": 0.40},
    step2_scores={"20322850": 0.60, "19608218": 0.55, "20322852": 0.50,
                  "20322851": 0.45, "19608221": 0.40},
    script=SITCOM_SCRIPT,
)

# --- fixture: century (Woman's Century / NCWC case) -------------------------

CENTURY_DOCS = [
    ("18191569", "Woman's Century",
     "Woman's Century Woman's Century was the official organ of the National Council of Women of Canada (NCWC), "
     "published in Toronto between 1913 and 1921. The magazine was relatively conservative, and supported World "
     "War I, but stood up for women's rights and universal suffrage. The founder of \"Woman's Century\" was "
     "Jessie Campbell MacIver."),
    ("18191576", "Woman's Century",
     "Citations Sources Woman's Century Woman's Century was the official organ of the National Council of Women "
     "of Canada (NCWC), published in Toronto between 1913 and 1921. The first issue appeared in May 1913 and it "
     "was largely produced out of MacIver's home."),
    ("3964891", "The Century Magazine",
     "The Century Magazine The Century Magazine was first published in the United States in 1881 by The Century "
     "Company of New York City, which had been bought in that year by Roswell Smith and renamed by him after the "
     "Century Association."),
    ("12413254", "National Council of Women of Canada",
     "also authorized through race-based arguments that linked White women's enfranchisement to the need to "
     "protect the nation. Between 1914 and 1921 the NCWC published the monthly journal 'Woman's Century'. The "
     "purpose was to educate women about public issues and the reforms that were needed."),
    ("9717742", "Toronto",
     "Toronto Toronto is the capital city of the province of Ontario and the most populous city in Canada, "
     "located on the northwestern shore of Lake Ontario."),
    ("12413249", "National Council of Women of Canada",
     "National Council of Women of Canada The National Council of Women of Canada (NCWC) was founded on October "
     "27, 1893, in Toronto, Ontario. It is a Canadian advocacy organization aimed at improving conditions for "
     "women, families, and communities."),
    ("12413257", "National Council of Women of Canada",
     "The NCWC's early campaigns pressed for the appointment of women factory inspectors, prison reform, and "
     "improved public health measures in cities across the country."),
    ("17476996", "Local Council of Women",
     "the Local Council was established in 1894 as the local chapter of the National Council of Women of Canada "
     "(NCWC). Its members organized lectures and charitable work in the city."),
    ("6878896", "Lady Aberdeen",
     "Lady Aberdeen served as the first president of the National Council of Women of Canada. The National "
     "Council of Women of Canada was founded in 1893 and federated local councils across the country."),
    ("20577251", "Ishbel Hamilton-Gordon",
     "Ishbel Hamilton-Gordon, Marchioness of Aberdeen and Temair, was a Scottish author and philanthropist who "
     "spent several years in Canada while her husband served as Governor General."),
]

CENTURY_QUESTION = "When was the company that published Woman'S Century founded?"
CENTURY_Q1 = "Identify the publisher of the magazine 'Woman's Century'"
CENTURY_Q2 = "What is the founding date of the National Council of Women of Canada (NCWC)?"

CENTURY_SCRIPT = [
    exact(CENTURY_QUESTION, notes([
        "Identify the publisher of 'Woman's Century'.",
        "Determine the founding date of the identified publisher.",
    ])),
    sub("Current step: Identify the publisher of 'Woman's Century'.",
        task("search", CENTURY_Q1)),
    sub("Current step: Determine the founding date of the identified publisher.",
        task("search", CENTURY_Q2)),
    sub("Passage: Woman's Century Woman's Century was the official organ", notes([
        "The magazine Woman's Century was published by the National Council of Women of Canada (NCWC). This is "
        "evidenced by the statement: Woman's Century was the official organ of the National Council of Women of "
        "Canada (NCWC).",
    ])),
    sub("Passage: Citations Sources Woman's Century", notes([
        "The magazine 'Woman's Century' was published by the National Council of Women of Canada (NCWC). This "
        "is evidenced by the statement: Woman's Century was the official organ of the National Council of Women "
        "of Canada (NCWC).",
    ])),
    sub("Passage: The Century Magazine", NO_INFO),
    sub("Passage: also authorized through race-based arguments", notes([
        "The magazine Woman's Century was published by the NCWC (National Council of Women of Canada). This is "
        "evidenced by the phrase \"Between 1914 and 1921 the NCWC published the monthly journal 'Woman's "
        "Century'.\"",
    ])),
    sub("Passage: Toronto Toronto is the capital city", NO_INFO),
    sub("Passage: National Council of Women of Canada The National Council", notes([
        "The National Council of Women of Canada (NCWC) was founded on October 27, 1893, in Toronto, Ontario. "
        "This is relevant as it directly answers the question regarding the founding date of the organization.",
    ])),
    sub("Passage: The NCWC's early campaigns", NO_INFO),
    sub("Passage: the Local Council was established", notes([
        "The National Council of Women of Canada (NCWC) was established in 1894, as indicated by the passage "
        "stating, \"the Local Council was established in 1894 as the local chapter of the National Council of "
        "Women of Canada (NCWC).\"",
    ])),
    sub("Passage: Lady Aberdeen served", notes([
        "The National Council of Women of Canada was founded in 1893. This information is directly stated in "
        "the passage.",
    ])),
    sub("Passage: Ishbel Hamilton-Gordon", "No related information from this document"),
    sub("Question: \n" + CENTURY_Q1, qa(
        "Multiple documents state that Woman's Century was the official organ of the National Council of Women "
        "of Canada.",
        "National Council of Women of Canada (NCWC)", 5)),
    sub("Question: \n" + CENTURY_Q2, qa(
        "The question asks for the founding date of the National Council of Women of Canada (NCWC). The "
        "relevant documents indicate conflicting information: one states it was founded on October 27, 1893, "
        "while another mentions 1894. However, multiple documents confirm the 1893 date, making it the more "
        "reliable answer.",
        "October 27, 1893", 4)),
]

write_fixture(
    "century",
    CENTURY_DOCS,
    CENTURY_Q1,
    CENTURY_Q2,
    step1_scores={"18191569": 0.60, "18191576": 0.55, "3964891": 0.50,
                  "12413254": 0.45, "9717742": 0.40},
    step2_scores={"12413249": 0.60, "12413257": 0.55, "17476996": 0.50,
                  "6878896": 0.45, "20577251": 0.40},
    script=CENTURY_SCRIPT,
)

# --- fixture: eval3 (tiny single-turn QA dataset) ----------------------------

EVAL3_DIR = os.path.join(ROOT, "eval3")
os.makedirs(EVAL3_DIR, exist_ok=True)

EVAL3 = [
    ("e1", "What color is a clear daytime sky?", "blue"),
    ("e2", "How many sides does a hexagon have?", "six"),
    ("e3", "Which planet is known as the red planet?", "Mars"),
]

with open(os.path.join(EVAL3_DIR, "dataset.jsonl"), "w") as f:
    for ex_id, question, answer in EVAL3:
        f.write(json.dumps({"id": ex_id, "question": question, "answers": [answer]}) + "\n")

with open(os.path.join(EVAL3_DIR, "corpus.jsonl"), "w") as f:
    facts = [
        ("f1", "Sky", "On a clear day the sky appears blue because air molecules scatter short wavelengths of sunlight."),
        ("f2", "Hexagon", "A hexagon is a polygon with six sides and six vertices."),
        ("f3", "Mars", "Mars is often called the red planet because iron oxide on its surface gives it a reddish appearance."),
        ("f4", "Filler", "Completely unrelated filler text about maritime navigation and lighthouse keepers."),
    ]
    for doc_id, title, text in facts:
        f.write(json.dumps({"id": doc_id, "title": title, "text": text}) + "\n")

with open(os.path.join(EVAL3_DIR, "script.jsonl"), "w") as f:
    answers = {
        "What color is a clear daytime sky?": "blue",
        "How many sides does a hexagon have?": "six",
        "Which planet is known as the red planet?": "Mars",
    }
    for question, answer in answers.items():
        f.write(json.dumps({
            "match": "substring",
            "pattern": "Question: \n" + question,
            "response": qa("Answered from the retrieved context.", answer, 5),
        }, ensure_ascii=False) + "\n")

with open(os.path.join(EVAL3_DIR, "config.toml"), "w") as f:
    f.write(
        "[orchestrator]\n"
        "k = 2\n"
        "planner_enabled = false\n"
        "extractor_enabled = false\n"
        "\n"
        "[llm_backend]\n"
        'backend = "scripted:fixtures/eval3/script.jsonl"\n'
        "\n"
        "[retrieval]\n"
        'embedder = "test"\n'
    )

print("fixtures written under", os.path.normpath(ROOT))
