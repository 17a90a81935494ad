#!/usr/bin/env python3
"""Generates the 500-line sessionizer fixture and its expected outputs.

Sessions are planted by construction: every query of a session shares the
session's topic IRI, different sessions of a user share no term, and no
structural template repeats back to back except where a run is planted. The
expected session store and filter counts are written from the plan itself.

Usage: make_session_fixture.py <output dir>
"""

import datetime as dt
import json
import random
import sys

SEED = 20240301
TOTAL_LINES = 500
MINUTE = dt.timedelta(minutes=1)
BASE = dt.datetime(2024, 3, 1, 8, 0, 0, tzinfo=dt.timezone.utc)

rng = random.Random(SEED)
namespace_counter = 0


def new_namespace():
    global namespace_counter
    namespace_counter += 1
    return f"n{namespace_counter}"


def fmt_time(t):
    return t.strftime("%Y-%m-%dT%H:%M:%S.") + f"{t.microsecond // 1000:03d}Z"


# Seven shapes with pairwise different templates. Every shape mentions the
# namespace's topic IRI.
def query(ns, shape, variant):
    iri = lambda name: f"<http://ex.org/{ns}/{name}>"
    t, p1, p2, p3 = iri("topic"), iri("p1"), iri("p2"), iri("p3")
    e = iri(f"e{variant}")
    a, b, c = f"?{ns}a", f"?{ns}b", f"?{ns}c"
    shapes = [
        f"SELECT {a} WHERE {{ {a} {p1} {t} }}",
        f"SELECT {a} {b} WHERE {{ {a} {p1} {t} . {a} {p2} {b} }}",
        f"SELECT DISTINCT {a} WHERE {{ {a} {p1} {t} . {a} {p2} {b} . {b} {p3} {c} }}",
        f"SELECT {a} WHERE {{ {a} {p1} {t} FILTER({a} != {e}) }}",
        f"SELECT {a} WHERE {{ {a} {p2} {t} }} LIMIT {10 + variant}",
        f"ASK {{ {t} {p1} {a} . {a} {p2} {e} }}",
        f"SELECT {a} WHERE {{ {a} {p1} {t} OPTIONAL {{ {a} {p3} {c} }} }}",
    ]
    return shapes[shape]


BROKEN = [
    "SELECT ?x WHERE { ?x <http://ex.org/p> ",
    "SELEKT ?x WHERE { ?x ?p ?o }",
    "SELECT ?x WHERE { ?x <http://ex.org/p> ?y FILTER( }",
]


class Fixture:
    def __init__(self):
        self.records = []  # dicts in input schema
        self.raw_lines = []  # rejected lines
        self.sessions = {}  # (dataset, user) -> list of sessions
        self.flagged = set()
        self.loop_runs = 0
        self.loop_records = 0
        self.loop_texts = set()
        self.bot_records = 0
        self.parse_errors = 0
        self.duplicates = 0

    def emit(self, dataset, user, t, text, size=None):
        self.records.append({
            "dataset": dataset, "user": user, "time": fmt_time(t), "query": text,
            "resultSize": size, "runtimeMs": rng.randint(1, 900),
        })

    def size(self):
        return None if rng.random() < 0.1 else rng.randint(0, 5000)

    def session(self, dataset, user, t, steps, ns=None):
        """steps: list of (kind, arg, gap minutes before the step).

        kind 'q': arg = (shape, variant); 'dup': repeat the previous query;
        'err': arg = broken text index; 'loop': arg = (shape, count) planted
        run dropped by the loop filter. Returns the time of the last step.
        """
        ns = ns or new_namespace()
        kept = []
        last_text = None
        for i, (kind, arg, gap) in enumerate(steps):
            if i > 0:
                t = t + gap
            if kind == "q":
                text = query(ns, *arg)
                size = self.size()
                self.emit(dataset, user, t, text, size)
                kept.append({"text": text, "time": fmt_time(t), "resultSize": size,
                             "runtimeMs": self.records[-1]["runtimeMs"]})
                last_text = text
            elif kind == "dup":
                self.emit(dataset, user, t, last_text, self.size())
                self.duplicates += 1
            elif kind == "err":
                self.emit(dataset, user, t, BROKEN[arg], None)
                self.parse_errors += 1
            elif kind == "loop":
                shape, count = arg
                for k in range(count):
                    if k > 0:
                        t = t + 2 * MINUTE
                    text = query(ns, shape, 100 + k)
                    self.emit(dataset, user, t, text, self.size())
                    self.loop_texts.add(text)
                self.loop_runs += 1
                self.loop_records += count
        self.sessions.setdefault((dataset, user), []).append(kept)
        return t


def plain_steps(n, start_shape):
    """n queries cycling through shapes, 1-20 minutes apart; the last shape is
    (start_shape + n - 1) % 7."""
    steps = []
    for i in range(n):
        steps.append(("q", ((start_shape + i) % 7, i), rng.randint(1, 20) * MINUTE))
    return steps


def organic_user(fx, dataset, user, start, n_sessions):
    t = start
    last_shape = None
    for s in range(n_sessions):
        n = rng.choice([1, 1, 2, 3, 4, 5, 6, 8])
        # Never repeat the previous template across a session boundary.
        first = rng.choice([k for k in range(7) if k != last_shape])
        t = fx.session(dataset, user, t, plain_steps(n, first))
        last_shape = (first + n - 1) % 7
        # Next session: either a long gap or a short gap with disjoint terms.
        if rng.random() < 0.5:
            t = t + rng.randint(61, 300) * MINUTE
        else:
            t = t + rng.randint(1, 60) * MINUTE
    return t


def build():
    fx = Fixture()
    d1, d2 = "dbp", "wd"

    # Frequency bot: 31 executions, 55 s apart (all inside 30 minutes).
    t = BASE
    for i in range(31):
        fx.emit(d1, "bot-freq", t + i * dt.timedelta(seconds=55),
                query("bot", i % 7, i), fx.size())
    fx.flagged.add((d1, "bot-freq"))
    fx.bot_records += 31

    # Loop bot: organic queries around a template run of 6; the run goes and
    # the remaining five queries form one session.
    steps = [("q", (0, 0), 0), ("q", (1, 1), 3 * MINUTE), ("q", (2, 2), 3 * MINUTE),
             ("loop", (3, 6), 2 * MINUTE),
             ("q", (4, 3), 2 * MINUTE), ("q", (5, 4), 3 * MINUTE)]
    fx.session(d1, "bot-loop", BASE, steps)

    # Exactly 30 executions one minute apart: not more than 30, kept.
    fx.session(d1, "edge-30", BASE, [("q", (i % 7, i), MINUTE) for i in range(30)])

    # 31 executions 62 s apart: at most 30 in any 30-minute window, kept.
    fx.session(d1, "edge-31", BASE,
               [("q", (i % 7, i), dt.timedelta(seconds=62)) for i in range(31)])

    # Same user id in two datasets, 20 executions each within 20 minutes.
    for ds in (d1, d2):
        fx.session(ds, "shared", BASE, [("q", (i % 7, i), MINUTE) for i in range(20)])

    # Gap exactly at the threshold stays; one millisecond more splits even
    # though the terms overlap.
    t = fx.session(d1, "gaps", BASE, [("q", (0, 0), 0), ("q", (1, 0), 60 * MINUTE)],
                   ns="gap")
    fx.session(d1, "gaps", t + 60 * MINUTE + dt.timedelta(milliseconds=1),
               [("q", (2, 0), 0)], ns="gap")

    # Duplicates, parse errors, a kept run of 3 and an alternating pattern.
    fx.session(d1, "mixed", BASE, [
        ("q", (0, 0), 0), ("dup", None, MINUTE), ("dup", None, MINUTE),
        ("q", (1, 0), 2 * MINUTE), ("err", 0, MINUTE), ("q", (2, 0), MINUTE),
        ("q", (3, 1), MINUTE), ("q", (3, 2), MINUTE), ("q", (3, 3), MINUTE),
        ("q", (4, 0), MINUTE), ("q", (5, 0), MINUTE), ("q", (4, 1), MINUTE),
        ("q", (5, 1), MINUTE), ("q", (4, 2), MINUTE), ("q", (5, 2), MINUTE),
        ("err", 1, MINUTE), ("q", (6, 0), MINUTE), ("dup", None, 30 * MINUTE)])
    # A user whose only query is broken yields no session.
    fx.emit(d2, "broken-only", BASE, BROKEN[2])
    fx.parse_errors += 1

    # Rejected lines.
    fx.raw_lines.append(json.dumps({"dataset": d1, "time": fmt_time(BASE),
                                    "query": "SELECT * WHERE { ?s ?p ?o }"}))
    fx.raw_lines.append(json.dumps({"dataset": d1, "user": "x", "time": "yesterday",
                                    "query": "SELECT * WHERE { ?s ?p ?o }"}))
    fx.raw_lines.append('{"dataset": "dbp", "user": ')

    # Organic users until the line budget is met.
    k = 0
    while True:
        budget = TOTAL_LINES - len(fx.records) - len(fx.raw_lines)
        if budget <= 0:
            break
        user = f"u{k:03d}"
        ds = d1 if k % 3 else d2
        start = BASE + rng.randint(0, 600) * MINUTE
        if budget <= 8:
            fx.session(ds, user, start, plain_steps(budget, k % 7))
        else:
            before = len(fx.records)
            organic_user(fx, ds, user, start, rng.randint(1, 4))
            if len(fx.records) + len(fx.raw_lines) > TOTAL_LINES:
                # Roll back and fill the remainder with a single session.
                del fx.records[before:]
                fx.sessions.pop((ds, user), None)
                continue
        k += 1
    # Drop empty sessions (users whose only steps were dropped).
    for key in list(fx.sessions):
        fx.sessions[key] = [s for s in fx.sessions[key] if s]
        if not fx.sessions[key]:
            del fx.sessions[key]
    return fx


def main(out_dir):
    fx = build()
    lines = [json.dumps(r, separators=(", ", ": ")) for r in fx.records] + fx.raw_lines
    assert len(lines) == TOTAL_LINES, len(lines)
    rng.shuffle(lines)
    with open(f"{out_dir}/sessionizer_input.ndjson", "w") as f:
        f.write("\n".join(lines) + "\n")

    session_lines = []
    singletons = 0
    session_records = 0
    for (ds, user) in sorted(fx.sessions):
        if (ds, user) in fx.flagged:
            continue
        for k, queries in enumerate(fx.sessions[(ds, user)]):
            session_lines.append(json.dumps(
                {"sessionId": f"{ds}/{user}/{k}", "dataset": ds, "user": user,
                 "queries": queries}, separators=(",", ":"), ensure_ascii=False))
            singletons += len(queries) == 1
            session_records += len(queries)
    with open(f"{out_dir}/sessionizer_sessions.ndjson", "w") as f:
        f.write("\n".join(session_lines) + "\n")

    organic = [r for r in fx.records if (r["dataset"], r["user"]) not in fx.flagged]
    organic_count = len(organic) - fx.loop_records
    # Loop-run texts occur nowhere else.
    distinct = {(r["dataset"], r["query"]) for r in organic
                if r["query"] not in fx.loop_texts}
    report = {
        "inputLines": TOTAL_LINES,
        "rejectedLines": len(fx.raw_lines),
        "totalRecords": len(fx.records),
        "totalUsers": len({(r["dataset"], r["user"]) for r in fx.records}),
        "flaggedFrequencyUsers": len(fx.flagged),
        "frequencyDroppedRecords": fx.bot_records,
        "loopSequencesRemoved": fx.loop_runs,
        "loopDroppedRecords": fx.loop_records,
        "organicExecutionCount": organic_count,
        "organicQueryCount": len(distinct),
        "parseErrorRecords": fx.parse_errors,
        "duplicatesCollapsed": fx.duplicates,
        "sessionRecords": session_records,
        "sessionCount": len(session_lines),
        "singletonSessions": singletons,
    }
    assert organic_count == fx.parse_errors + fx.duplicates + session_records
    with open(f"{out_dir}/sessionizer_report.json", "w") as f:
        json.dump(report, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
