#!/usr/bin/env python3
"""Regenerates the bundled fixtures under data/.

    python3 tools/make_fixtures.py [--data DIR] [--seed N]

Outputs are deterministic for a given seed. The realistic fixture is a
synthetic ecosystem of about a thousand entities with a canned probe store;
the smaller fixtures are hand-shaped cases used by the tests.
"""

import argparse
import datetime as dt
import json
import math
import random
import shutil
from pathlib import Path

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    h = FNV_OFFSET
    for b in text.encode("utf-8"):
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def store_put(store: Path, url: str, responses):
    """responses: list of (status_or_None, body_or_None)."""
    def obj(status, body):
        o = {"status_code": status}
        if body is not None:
            o["body"] = body
        return o

    entry = {"url": url}
    if len(responses) == 1:
        entry.update(obj(*responses[0]))
    else:
        entry["responses"] = [obj(s, b) for s, b in responses]
    (store / f"{fnv1a64(url):016x}.json").write_text(json.dumps(entry, indent=2) + "\n")


def iso(d: dt.date) -> str:
    return d.isoformat()


def day_in_year(rng, year, lo=None, hi=None):
    start = dt.date(year, 1, 1)
    end = dt.date(year, 12, 31)
    if lo and lo > start:
        start = lo
    if hi and hi < end:
        end = hi
    span = (end - start).days
    return start + dt.timedelta(days=rng.randint(0, max(span, 0)))


def uniform_date(rng, lo: dt.date, hi: dt.date) -> dt.date:
    return lo + dt.timedelta(days=rng.randint(0, (hi - lo).days))


def weighted_year(rng, weights):
    years = sorted(weights)
    return rng.choices(years, [weights[y] for y in years])[0]


CATEGORIES = [
    "Mapping", "Social", "Search", "Photos", "Video", "eCommerce", "Messaging",
    "Music", "Reference", "Tools", "Financial", "Advertising", "Weather",
    "Telephony", "Travel", "Sports", "Enterprise", "Science", "Games",
    "Education", "News", "Security", "Storage", "Medical", "Government",
]

WORDS = [
    "atlas", "beacon", "cobalt", "delta", "ember", "falcon", "glacier", "harbor",
    "indigo", "jasper", "kestrel", "lumen", "meridian", "nimbus", "onyx", "prism",
    "quartz", "raven", "sierra", "tundra", "umber", "vertex", "willow", "xenon",
    "yonder", "zephyr", "orbit", "pixel", "relay", "signal", "vector", "canvas",
]

TRUST_FROM = dt.date(2018, 1, 1)
BETA = dt.date(2020, 9, 10)
LAST_DP = BETA - dt.timedelta(days=1)


def realistic(out: Path, seed: int):
    rng = random.Random(seed)
    if out.exists():
        shutil.rmtree(out)
    store = out / "probe_store"
    store.mkdir(parents=True)

    api_year_w = {2005: 2, 2006: 6, 2007: 10, 2008: 14, 2009: 17, 2010: 20, 2011: 22,
                  2012: 20, 2013: 16, 2014: 11, 2015: 7, 2016: 5, 2017: 3, 2018: 2, 2019: 1}
    mashup_year_w = {2005: 3, 2006: 12, 2007: 18, 2008: 20, 2009: 18, 2010: 15, 2011: 12,
                     2012: 9, 2013: 7, 2014: 5, 2015: 4, 2016: 3, 2017: 2, 2018: 1, 2019: 1}
    cat_w = [1.0 / (i + 1) ** 0.8 for i in range(len(CATEGORIES))]

    apis = []
    for i in range(420):
        name = f"{rng.choice(WORDS).title()} {rng.choice(WORDS).title()} {i}"
        start = day_in_year(rng, weighted_year(rng, api_year_w))
        apis.append({
            "kind": "api",
            "id": f"/api/a{i:04d}",
            "name": name,
            "start": start,
            "labeled_status": "available",
            "deathpool_date": None,
            "endpoint_url": f"https://api{i:04d}.example.net/v1",
            "primary_category": rng.choices(CATEGORIES, cat_w)[0],
            "description": f"{name} offers {rng.choice(WORDS)} data over REST.",
            "successor_ids": [],
        })
    apis[7]["primary_category"] = ""  # one record without a category

    # Labels and probe outcomes. Deprecated entries carry a deathpool date
    # after creation; most fall inside the trust window.
    for a in apis:
        r = rng.random()
        if r < 0.40:
            a["labeled_status"] = "deprecated"
            if a["start"] < TRUST_FROM - dt.timedelta(days=30) and rng.random() < 0.7:
                a["deathpool_date"] = uniform_date(rng, TRUST_FROM, LAST_DP)
            else:
                lo = a["start"] + dt.timedelta(days=200)
                if lo >= LAST_DP:
                    lo = a["start"] + dt.timedelta(days=1)
                a["deathpool_date"] = uniform_date(rng, lo, LAST_DP)
        elif r < 0.44:
            a["description"] = a["description"] + " This API is no longer available."
        elif r < 0.47:
            a["endpoint_url"] = None

    # Two implausible labels (deathpool before creation).
    for a in apis[100:102]:
        a["labeled_status"] = "deprecated"
        a["deathpool_date"] = a["start"] - dt.timedelta(days=45)

    # Transfers and splits: successors are created before the predecessor's
    # deathpool date so derived ends never exceed the label.
    by_start = sorted(apis, key=lambda a: a["start"])
    dead_with_room = [a for a in apis if a["labeled_status"] == "deprecated" and a["deathpool_date"]
                      and a["deathpool_date"] > a["start"] + dt.timedelta(days=400)]
    rng.shuffle(dead_with_room)
    for k, a in enumerate(dead_with_room[:12]):
        cands = [b for b in by_start if a["start"] < b["start"] < a["deathpool_date"] and b is not a]
        if len(cands) < 3:
            continue
        n = 1 if k % 3 else rng.randint(2, 3)
        a["successor_ids"] = sorted(b["id"] for b in rng.sample(cands, n))

    for a in apis:
        url = a["endpoint_url"]
        if not url:
            continue
        if a["labeled_status"] == "deprecated" or "no longer available" in a["description"]:
            # not probed, but a canned entry keeps the store complete
            store_put(store, url, [(404, None)])
            continue
        r = rng.random()
        if r < 0.70:
            store_put(store, url, [(200, "{}")])
        elif r < 0.76:
            store_put(store, url, [(404, None), (200, "{}")])  # recovers on retry
        elif r < 0.88:
            store_put(store, url, [(404, None)])
        elif r < 0.96:
            store_put(store, url, [(None, None)])
        else:
            store_put(store, url, [(503, None)])

    popularity = {a["id"]: 1.0 / (rank + 1) ** 1.05 for rank, a in enumerate(rng.sample(apis, len(apis)))}

    mashups = []
    for i in range(600):
        name = f"{rng.choice(WORDS).title()}{rng.choice(WORDS).title()} {i}"
        start = day_in_year(rng, weighted_year(rng, mashup_year_w))
        pool = [a for a in apis if a["start"] <= start]
        r = rng.random()
        size = 1 if r < 0.42 else 2 if r < 0.70 else 3 if r < 0.84 else rng.randint(4, 7) if r < 0.985 else rng.randint(10, 24)
        chosen = []
        if pool:
            weights = [popularity[a["id"]] for a in pool]
            while len(chosen) < min(size, len(pool)):
                pick = rng.choices(pool, weights)[0]["id"]
                if pick not in chosen:
                    chosen.append(pick)
        m = {
            "kind": "mashup",
            "id": f"/mashup/m{i:04d}",
            "name": name,
            "start": start,
            "labeled_status": "available",
            "deathpool_date": None,
            "homepage_url": f"http://www.{name.split()[0].lower()}-{i}.example.org/",
            "primary_category": rng.choices(CATEGORIES, cat_w)[0],
            "api_ids": sorted(chosen),
            "description": f"{name} mashes up {len(chosen)} APIs.",
        }
        mashups.append(m)
    mashups[3]["api_ids"] = mashups[3]["api_ids"] + ["/api/ghost"]
    mashups[5]["api_ids"] = []

    for m in mashups:
        r = rng.random()
        if r < 0.45:
            m["labeled_status"] = "deprecated"
            lo = max(m["start"] + dt.timedelta(days=150), TRUST_FROM if rng.random() < 0.6 else m["start"])
            if lo >= LAST_DP:
                lo = m["start"] + dt.timedelta(days=1)
            m["deathpool_date"] = uniform_date(rng, lo, LAST_DP)
            store_put(store, m["homepage_url"], [(None, None)])
            continue
        label = m["name"].split()[0]
        r = rng.random()
        if r < 0.55:
            store_put(store, m["homepage_url"], [(200, f"<html><title>{label}</title>Welcome to {label}!</html>")])
        elif r < 0.65:
            store_put(store, m["homepage_url"], [(200, "<html><title>Domain for sale</title></html>")])
        elif r < 0.85:
            store_put(store, m["homepage_url"], [(404, None)])
        else:
            store_put(store, m["homepage_url"], [(None, None)])
    mashups[11]["homepage_url"] = None

    with (out / "dataset.jsonl").open("w") as f:
        for rec in apis + mashups:
            o = {k: (iso(v) if isinstance(v, dt.date) else v) for k, v in rec.items()}
            o = {k: v for k, v in o.items() if v is not None}
            f.write(json.dumps(o, sort_keys=True) + "\n")


def zsamples(out: Path, seed: int):
    """Two longevity samples, one per line, whose biased-variance normal fits
    give z = |mu_a - mu_b| / sqrt(var_a + var_b) = 0.385."""
    rng = random.Random(seed)
    out.mkdir(parents=True, exist_ok=True)

    def shaped(n, mu, sd):
        xs = [rng.gauss(0, 1) for _ in range(n)]
        m = sum(xs) / n
        s = math.sqrt(sum((x - m) ** 2 for x in xs) / n)
        return [round(mu + sd * (x - m) / s) for x in xs]

    def fit(xs):
        m = sum(xs) / len(xs)
        return m, sum((x - m) ** 2 for x in xs) / len(xs)

    a = shaped(400, 2600.0, 700.0)
    ma, va = fit(a)
    # choose the second mean so the statistic lands on 0.385
    b0 = shaped(200, 0.0, 650.0)
    m0, v0 = fit(b0)
    shift = round(ma - 0.385 * math.sqrt(va + v0) - m0)
    b = [x + shift for x in b0]
    (out / "trust_window_longevity.txt").write_text("# days, deathpool 2018-2020\n" + "\n".join(map(str, a)) + "\n")
    (out / "manual_check_longevity.txt").write_text("# days, manually checked sample\n" + "\n".join(map(str, b)) + "\n")


def rq5(out: Path):
    """Pair-survival fixtures. top_pair: 185 mashups invoke the same pair, 63
    still available at the reference date. curve: pairs with frequencies
    spread over several width-20 buckets, survival best between 40 and 60."""
    out.mkdir(parents=True, exist_ok=True)

    def mashup(i, apis, alive, year):
        rec = {
            "kind": "mashup", "id": f"/mashup/p{i:05d}", "name": f"Pair Mashup {i}",
            "start": f"{year}-03-01", "api_ids": apis, "primary_category": "Mapping",
            "labeled_status": "available" if alive else "deprecated",
        }
        if not alive:
            rec["deathpool_date"] = f"{year + 3}-06-01"
        return rec

    def api(name):
        return {"kind": "api", "id": f"/api/{name}", "name": name.title(), "start": "2005-06-01",
                "labeled_status": "available", "primary_category": "Social"}

    # top pair
    recs = [api("twitter"), api("google-maps")]
    for i in range(185):
        recs.append(mashup(i, ["/api/google-maps", "/api/twitter"], i < 63, 2008 + i % 6))
    with (out / "top_pair.jsonl").open("w") as f:
        for r in recs:
            f.write(json.dumps(r, sort_keys=True) + "\n")

    # curve: (frequency, alive) per pair
    buckets = [(8, 2), (12, 3), (15, 4), (25, 8), (30, 9), (35, 11), (45, 24), (50, 27), (55, 30),
               (65, 22), (70, 21), (90, 25), (110, 28)]
    recs = []
    idx = 0
    for p, (freq, alive) in enumerate(buckets):
        a, b = f"c{p:02d}x", f"c{p:02d}y"
        recs += [api(a), api(b)]
        for k in range(freq):
            recs.append(mashup(idx, [f"/api/{a}", f"/api/{b}"], k < alive, 2007 + k % 8))
            idx += 1
    with (out / "curve.jsonl").open("w") as f:
        for r in recs:
            f.write(json.dumps(r, sort_keys=True) + "\n")


def mosoto(out: Path, successors_path: Path):
    """A mashup built on Box and Facebook; Facebook later splits in four and
    two of the successors are retired on the same day."""
    if out.exists():
        shutil.rmtree(out)
    store = out / "probe_store"
    store.mkdir(parents=True)

    def api(slug, name, start, **extra):
        rec = {"kind": "api", "id": f"/api/{slug}", "name": name, "start": start,
               "labeled_status": "available", "primary_category": "Social",
               "endpoint_url": f"https://{slug}.example.com/api"}
        rec.update(extra)
        return rec

    recs = [
        api("box", "Box", "2008-04-10", primary_category="Storage"),
        api("facebook", "Facebook", "2006-08-15", labeled_status="deprecated", deathpool_date="2013-01-20"),
        api("facebook-ads", "Facebook Ads", "2011-02-01", labeled_status="deprecated",
            deathpool_date="2019-03-01", primary_category="Advertising"),
        api("facebook-atlas", "Facebook Atlas", "2011-05-01", labeled_status="deprecated",
            deathpool_date="2019-03-01", primary_category="Advertising"),
        api("facebook-graph", "Facebook Graph", "2011-08-01"),
        api("facebook-marketing", "Facebook Marketing", "2012-03-01", primary_category="Advertising"),
        {"kind": "mashup", "id": "/mashup/mosoto", "name": "Mosoto", "start": "2009-05-01",
         "labeled_status": "available", "homepage_url": "http://www.mosoto.example.com/",
         "primary_category": "Social", "api_ids": ["/api/box", "/api/facebook"],
         "description": "Chat and share files from your desktop."},
    ]
    for r in recs:
        url = r.get("endpoint_url") or r.get("homepage_url")
        body = "<html><title>Mosoto</title>Mosoto desktop chat</html>" if r["kind"] == "mashup" else "{}"
        store_put(store, url, [(200, body)] if r["labeled_status"] == "available" else [(404, None)])
    with (out / "dataset.jsonl").open("w") as f:
        for r in recs:
            f.write(json.dumps(r, sort_keys=True) + "\n")

    table = {
        "_comment": "Curated successors of transferred or split APIs; keys starting with '_' are ignored.",
        "/api/facebook": ["/api/facebook-ads", "/api/facebook-atlas", "/api/facebook-graph",
                          "/api/facebook-marketing"],
    }
    successors_path.write_text(json.dumps(table, indent=2) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", default=str(Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--seed", type=int, default=20201)
    args = ap.parse_args()
    data = Path(args.data)
    realistic(data / "realistic", args.seed)
    zsamples(data / "ztest", args.seed + 1)
    rq5(data / "rq5")
    mosoto(data / "mosoto", data / "successors.json")


if __name__ == "__main__":
    main()
