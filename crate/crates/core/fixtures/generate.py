#!/usr/bin/env python3
"""Regenerates the fixture corpus. Deterministic: rerunning rewrites identical files."""
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
rng = random.Random(20240611)

NAMES = ["data", "items", "values", "my_list", "arr", "df", "result", "text", "words", "nums",
         "records", "config", "path", "frame", "matrix", "counts", "lines", "buf", "row", "entries"]
KEYS = ["name", "age", "id", "score", "date", "price", "city", "label"]
FILES = ["'data.csv'", "'out.txt'", "'config.json'", "'log.txt'", "'input.txt'"]

# (intent template, code template). {a},{b} are identifiers, {k} a key,
# {n} a small integer, {f} a file name literal.
TEMPLATES = [
    ("sort list {a} by element {n}", "sorted({a}, key=lambda x: x[{n}])"),
    ("sort a nested list {a} by two elements", "sorted({a}, key=lambda x: (x[0], x[1]))"),
    ("reverse list {a}", "{a}[::-1]"),
    ("remove duplicates from list {a}", "list(set({a}))"),
    ("flatten a list of lists {a}", "[x for sub in {a} for x in sub]"),
    ("count occurrences of items in {a} using collections.Counter", "collections.Counter({a})"),
    ("get the maximum value of list {a}", "max({a})"),
    ("sum all numbers in {a}", "sum({a})"),
    ("create a numpy array from list {a}", "np.array({a})"),
    ("create a numpy array of zeros with shape {n} by {n}", "np.zeros(({n}, {n}))"),
    ("compute the mean of numpy array {a}", "np.mean({a})"),
    ("reshape numpy array {a} to {n} columns", "{a}.reshape(-1, {n})"),
    ("transpose numpy matrix {a}", "np.transpose({a})"),
    ("concatenate numpy arrays {a} and {b}", "np.concatenate(({a}, {b}))"),
    ("build array with np.fromfunction", "np.fromfunction({a}, shape=({b}, {n}))"),
    ("read csv file {f} into pandas dataframe", "df = pd.read_csv({f})"),
    ("select column {k} from pandas dataframe {a}", "{a}['{k}']"),
    ("drop rows with missing values in dataframe {a}", "{a}.dropna()"),
    ("group dataframe {a} by column {k} and sum", "{a}.groupby('{k}').sum()"),
    ("sort pandas dataframe {a} by column {k}", "{a}.sort_values('{k}')"),
    ("join two paths with os.path.join", "os.path.join({a}, {b})"),
    ("check if file {f} exists", "os.path.exists({f})"),
    ("list files in directory {a} using os.listdir", "os.listdir({a})"),
    ("get current working directory with os", "os.getcwd()"),
    ("copy file {a} to {b} with shutil", "shutil.copy({a}, {b})"),
    ("copy one file's contents to another in python", "shutil.copyfile({a}, {b})"),
    ("delete file {f}", "os.remove({f})"),
    ("read all lines of file {f}", "with open({f}) as fh:\n    {a} = fh.readlines()"),
    ("write string {a} to file {f}", "with open({f}, 'w') as fh:\n    fh.write({a})"),
    ("parse json string {a}", "json.loads({a})"),
    ("dump dictionary {a} to json string", "json.dumps({a})"),
    ("load json file {f}", "with open({f}) as fh:\n    {a} = json.load(fh)"),
    ("split string {a} on commas", "{a}.split(',')"),
    ("join list of strings {a} with spaces", "' '.join({a})"),
    ("convert string {a} to lowercase", "{a}.lower()"),
    ("strip whitespace from string {a}", "{a}.strip()"),
    ("replace spaces in string {a} with underscores", "{a}.replace(' ', '_')"),
    ("find all digits in string {a} using re", "re.findall(r'\\d+', {a})"),
    ("substitute pattern in string {a} with re.sub", "re.sub(r'\\s+', ' ', {a})"),
    ("check if string {a} starts with {b}", "{a}.startswith({b})"),
    ("convert string {a} to integer", "int({a})"),
    ("format float {a} with two decimals", "'{{:.2f}}'.format({a})"),
    ("get current date and time with datetime", "datetime.datetime.now()"),
    ("parse date string {a} with datetime.strptime", "datetime.datetime.strptime({a}, '%Y-%m-%d')"),
    ("pick a random element from list {a}", "random.choice({a})"),
    ("shuffle list {a} in place", "random.shuffle({a})"),
    ("generate random integer between 1 and {n}", "random.randint(1, {n})"),
    ("compute square root of {a} using math", "math.sqrt({a})"),
    ("round number {a} down with math.floor", "math.floor({a})"),
    ("get dictionary {a} keys as list", "list({a}.keys())"),
    ("sort dictionary {a} by value", "sorted({a}.items(), key=lambda kv: kv[1])"),
    ("merge two dictionaries {a} and {b}", "{{**{a}, **{b}}}"),
    ("get value for key {k} from dict {a} with default", "{a}.get('{k}', None)"),
    ("zip two lists {a} and {b} into a dict", "dict(zip({a}, {b}))"),
    ("iterate over list {a} with index", "for i, x in enumerate({a}):\n    print(i, x)"),
    ("chain lists {a} and {b} with itertools", "list(itertools.chain({a}, {b}))"),
    ("get all permutations of {a} using itertools", "list(itertools.permutations({a}))"),
    ("exit the program with sys", "sys.exit(0)"),
    ("read command line arguments with sys.argv", "{a} = sys.argv[1:]"),
    ("filter list {a} keeping positive numbers", "[x for x in {a} if x > 0]"),
    ("square every element of list {a}", "[x ** 2 for x in {a}]"),
    ("check if list {a} is empty", "if not {a}:\n    print('empty')"),
]

PHRASE = ["How to {}?", "How do I {}?", "{}", "{}", "{}", "Python: {}", "{} in python?", "{} - quick!"]


def ident(used):
    choices = [n for n in NAMES if n not in used]
    x = rng.choice(choices)
    used.add(x)
    return x


LIB_OF = [("np.", "numpy"), ("pd.", "pandas"), ("os.", "os"), ("re.", "re"), ("json.", "json"),
          ("shutil.", "shutil"), ("datetime.", "datetime"), ("random.", "random"), ("math.", "math"),
          ("sys.", "sys"), ("itertools.", "itertools"), ("collections.", "collections")]


def fill(tpl):
    used = set()
    intent_t, code_t = tpl
    vals = {"a": ident(used), "b": ident(used), "k": rng.choice(KEYS), "n": rng.randint(2, 9),
            "f": rng.choice(FILES)}
    code = code_t.format(**vals)
    # Rewritten intents usually quote variable names in backticks.
    shown = dict(vals)
    for v in ("a", "b"):
        if rng.random() < 0.85:
            shown[v] = "`" + vals[v] + "`"
    text = intent_t.format(**shown)
    for prefix, lib in LIB_OF:
        if prefix in code and lib not in text.split() and rng.random() < 0.7:
            text += " using " + lib
            break
    intent = rng.choice(PHRASE).format(text)
    if rng.random() < 0.5:
        intent = intent[0].upper() + intent[1:]
    return intent, code


def alternative(code):
    """A different-looking answer to the same question."""
    extra = rng.choice(["print({})", "res = {}", "return {}", "{}  # works"])
    return extra.format(code) if "\n" not in code else code + "\nprint('done')"


def decorate(code):
    """Adds noise the cleaner must strip: comments, prompts, docstrings."""
    r = rng.random()
    if r < 0.10 and "\n" not in code:
        return ">>> " + code + "\n" + rng.choice(["[1, 2, 3]", "'abc'", "True", "42"])
    if r < 0.20:
        return code + "  # " + rng.choice(["works", "python 3", "see docs"])
    if r < 0.25:
        return "'''" + rng.choice(["solution", "answer", "try this"]) + "'''\n" + code
    if r < 0.28:
        return code + "\n\n"
    return code


LONG = "import os\nfor root, dirs, files in os.walk({a}):\n    for name in files:\n        p = os.path.join(root, name)\n        if p.endswith('.py'):\n            print(p)"
BAD = ["print('unterminated)", "x = \"open", "s = '''never closed"]

qid = 1000
def next_qid():
    global qid
    qid += rng.randint(1, 40)
    return qid

curated, mined, staqc = [], [], []
conala_intents = []

# CoNaLa curated: 160 questions, about a quarter with a second answer.
for i in range(160):
    t = TEMPLATES[i % len(TEMPLATES)]
    intent, code = fill(t)
    q = next_qid()
    curated.append({"question_id": q, "intent": intent, "snippet": decorate(code)})
    conala_intents.append((q, intent, code))
    r = rng.random()
    if r < 0.15:
        # near duplicate: removed by dedup
        curated.append({"question_id": q, "intent": intent, "snippet": code + "  # same idea"})
    elif r < 0.25:
        curated.append({"question_id": q, "intent": intent, "snippet": alternative(code)})

# CoNaLa mined: probabilities around the threshold, plus a 0.23 record.
for i in range(190):
    t = rng.choice(TEMPLATES)
    intent, code = fill(t)
    p = round(rng.random(), 3)
    if i == 0:
        p = 0.23
    mined.append({"question_id": next_qid(), "intent": intent, "snippet": decorate(code), "prob": p})
mined.append({"question_id": next_qid(), "intent": "Junk mined pair", "snippet": "(-10, 'Anthony')", "prob": 0.5})

# StaQC: fresh questions, overlaps with CoNaLa, long and unlexable answers.
for i in range(175):
    t = rng.choice(TEMPLATES)
    intent, code = fill(t)
    staqc.append({"question_id": next_qid(), "intent": intent, "snippet": decorate(code)})
for q, intent, code in rng.sample(conala_intents, 12):
    staqc.append({"question_id": q, "intent": intent, "snippet": alternative(code)})
for q, intent, code in rng.sample(conala_intents, 6):
    staqc.append({"question_id": next_qid(), "intent": intent, "snippet": code})
for i in range(8):
    staqc.append({"question_id": next_qid(), "intent": "Walk a directory tree and print python files",
                  "snippet": LONG.format(a=rng.choice(NAMES))})
for b in BAD:
    staqc.append({"question_id": next_qid(), "intent": "Print a message", "snippet": b})
staqc.append({"question_id": next_qid(), "intent": "???", "snippet": "pass"})
staqc.append({"question_id": next_qid(), "intent": "Only a comment", "snippet": "# nothing here"})
rng.shuffle(staqc)


def dump(name, rows, malformed=()):
    lines = [json.dumps(r, ensure_ascii=False) for r in rows]
    for pos, text in malformed:
        lines.insert(pos, text)
    with open(os.path.join(HERE, name), "w") as fh:
        fh.write("\n".join(lines) + "\n")


dump("conala_curated.jsonl", curated, [(5, '{"question_id": 17, "intent": "missing snippet"}')])
dump("conala_mined.jsonl", mined, [(9, '{"question_id": 18, "intent": "no prob", "snippet": "x = 1"}')])
dump("staqc.jsonl", staqc, [(3, "{not json at all")])

MEMBERS = {
    "numpy": "np array zeros ones mean transpose concatenate fromfunction reshape arange linspace dot sum shape",
    "pandas": "pd read_csv DataFrame Series concat merge",
    "os": "path listdir getcwd remove walk makedirs environ join exists",
    "re": "findall sub match search compile split",
    "json": "loads dumps load dump",
    "shutil": "copy copyfile move rmtree",
    "datetime": "datetime now strptime strftime timedelta date",
    "random": "choice shuffle randint random sample",
    "math": "sqrt floor ceil pi log",
    "sys": "exit argv path stdout",
    "itertools": "chain permutations combinations product",
    "collections": "Counter defaultdict OrderedDict deque",
}
with open(os.path.join(HERE, "member_db.txt"), "w") as fh:
    for lib, members in MEMBERS.items():
        fh.write(f"{lib}: {members}\n")
    fh.write("matplotlib\n")

DEV = os.path.join(HERE, "dev")
os.makedirs(DEV, exist_ok=True)
IMPORTS = ["import os", "import re", "import json", "import sys", "import numpy as np", "import pandas as pd",
           "import random", "import math", "from collections import Counter", "import itertools",
           "import shutil", "import datetime", "from os import path", "import numpy", "import pandas"]
for k in range(8):
    body = rng.sample(IMPORTS, 5)
    body.append("")
    for _ in range(12):
        _, code = fill(rng.choice(TEMPLATES))
        body.extend(code.split("\n"))
    with open(os.path.join(DEV, f"module_{k}.py"), "w") as fh:
        fh.write("\n".join(body) + "\n")
