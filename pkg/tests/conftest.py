import os
import sys
from datetime import datetime, timedelta, timezone

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from newspop.corpus import Article
from newspop.textfeat import Gazetteer, LabeledDoc, train_subjectivity


def utc(y, m, d, h=0, mi=0, s=0):
    return datetime(y, m, d, h, mi, s, tzinfo=timezone.utc)


def make_article(i, source="mashable", category="technology", tweets=10, **kw):
    fields = dict(
        id=f"a{i}",
        url=f"http://{source}.example.com/a{i}",
        source=source,
        category=category,
        title="midday roundup briefing notes",
        summary="coverage continues",
        published_at=utc(2011, 8, 8) + timedelta(seconds=i),
        tweets=tweets,
    )
    fields.update(kw)
    return Article(**fields)


@pytest.fixture
def toy_subjectivity_docs():
    subj = [LabeledDoc("awful terrible outrageous", "subjective") for _ in range(10)]
    obj = [LabeledDoc("reported stated announced", "objective") for _ in range(10)]
    return subj + obj


@pytest.fixture
def toy_subjectivity_model(toy_subjectivity_docs):
    return train_subjectivity(toy_subjectivity_docs, smoothing=1.0)


@pytest.fixture
def toy_gazetteer():
    gaz = Gazetteer()
    gaz.add("obama", "person")
    gaz.add("oprah winfrey", "person")
    gaz.add("new york", "place")
    gaz.add("google", "organization")
    return gaz
