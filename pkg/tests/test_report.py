import json
import xml.etree.ElementTree as ET

import jsonschema
import numpy as np
import pytest

from distread.corpus import parse_tweets
from distread.errors import EmptyAnalysisError, InputError
from distread.pipeline import AnalysisSettings, analyze, build_report
from distread.report import (
    OutlierReport,
    iso_utc,
    read_scores_csv,
    render_summary,
    render_svg,
    report_schema,
    write_scores_csv,
)
from distread.timeline import ScorePoint, ScoreSeries

SVG = "{http://www.w3.org/2000/svg}"


class FixedScorer:
    """Scores a token list with a plain function; ``None`` means unscorable."""

    def __init__(self, fn):
        self.fn = fn

    def score_tokens(self, tokens, table):
        return self.fn(tokens)


def by_first_token(scores):
    return FixedScorer(lambda tokens: scores.get(tokens[0]))


def make_corpus(words):
    rows = [
        {"id": f"t{k:04d}", "text": f"{w} film {k}", "created_at": iso_utc(1549497600 + 600 * k)}
        for k, w in enumerate(words)
    ]
    return parse_tweets("".join(json.dumps(r) + "\n" for r in rows).encode("utf-8"))


def spike_analysis():
    words = ["meh"] * 60
    words[30:33] = ["wow"] * 3
    scores = {"meh": 0.5, "wow": 0.99}
    corpus = make_corpus(words)
    # jitter the background so the sample is not constant
    scorer = FixedScorer(
        lambda tokens: scores[tokens[0]] + (0.01 * ((int(tokens[2]) * 7) % 5 - 2) if tokens[0] == "meh" else 0.0)
    )
    return corpus, analyze(corpus, None, scorer, AnalysisSettings(window=5))


def test_analysis_finds_spike():
    corpus, result = spike_analysis()
    assert sorted(result.esd.outlier_indices) == [30, 31, 32]
    (region,) = result.regions
    assert region.polarity == "positive"
    assert region.ids == ["t0030", "t0031", "t0032"]
    assert region.top_terms[0] == ["film", 3]


def test_report_validates_and_round_trips():
    corpus, result = spike_analysis()
    report = build_report(result, corpus, {"window": 5}, {"scorer": "fixed"}, "2020-01-01T00:00:00Z")
    data = json.loads(report.to_json())
    jsonschema.validate(data, report_schema())
    assert data["schema_version"] == 1
    again = OutlierReport.from_json(report.to_json())
    assert again == report
    assert again.to_json() == report.to_json()
    assert "ESD: 3 outliers" in render_summary(report)


def test_report_rejects_other_version():
    with pytest.raises(InputError, match="schema_version"):
        OutlierReport.from_json('{"schema_version": 2}')


def test_nothing_scorable():
    corpus = make_corpus(["zzz"] * 10)
    with pytest.raises(EmptyAnalysisError, match="nothing to analyze"):
        analyze(corpus, None, by_first_token({}))


def test_too_few_points():
    corpus = make_corpus(["a", "b"])
    with pytest.raises(EmptyAnalysisError):
        analyze(corpus, None, by_first_token({"a": 0.1, "b": 0.2}))


def series(n, rng):
    points = [ScorePoint(f"id{k}", 1549497600 + 3600 * k, float(rng.random())) for k in range(n)]
    return ScoreSeries(points, [float(v) for v in rng.random(n)], [bool(k % 7 == 0) for k in range(n)])


def test_scores_csv_round_trip(rng):
    s = series(50, rng)
    text = write_scores_csv(s)
    assert text.splitlines()[0] == "id,timestamp,score,smoothed,outlier"
    assert len(text.splitlines()) == 51
    back = read_scores_csv(text)
    assert back == s
    assert write_scores_csv(back) == text


def test_scores_csv_bad_header():
    with pytest.raises(InputError, match="header"):
        read_scores_csv("a,b\n")


@pytest.mark.parametrize("n", [0, 1, 37])
def test_svg_well_formed(n, rng):
    s = series(n, rng)
    regions = [{"start": 0, "end": 0, "polarity": "positive"}] if n else []
    root = ET.fromstring(render_svg(s, regions))
    assert root.tag == SVG + "svg"
    assert root.get("viewBox") == "0 0 1200 400"
    circles = root.findall(f"{SVG}circle")
    assert len(circles) == n
    assert all(c.get("r") == "2" for c in circles)
    outliers = [c for c in circles if "outlier" in c.get("class").split()]
    assert len(outliers) == sum(s.outlier_flags)
    assert len(root.findall(f"{SVG}path[@class='midline']")) == (1 if n else 0)


def test_svg_escapes_ids():
    s = ScoreSeries([ScorePoint("<&>", 0, 0.5)], [0.5], [False])
    ET.fromstring(render_svg(s))


def test_schema_rejects_missing_field():
    corpus, result = spike_analysis()
    data = build_report(result, corpus).to_dict()
    del data["esd"]
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(data, report_schema())


def test_detrend_runs():
    corpus, _ = spike_analysis()
    words = {"meh": 0.5, "wow": 0.99}
    rng = np.random.default_rng(0)
    jitter = {r.id: float(rng.normal(0, 0.01)) for r in corpus.records}
    lookup = {r.tokens: words[r.tokens[0]] + (jitter[r.id] if r.tokens[0] == "meh" else 0.0) for r in corpus.records}
    scorer = FixedScorer(lambda tokens: lookup[tuple(tokens)])
    result = analyze(corpus, None, scorer, AnalysisSettings(window=25, detrend=True))
    assert 30 in result.esd.outlier_indices
