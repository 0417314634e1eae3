import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.models.field_models import FieldKind, FieldSpec


@pytest.fixture
def q5():
    return FieldSpec(kind=FieldKind.PADIC, p=5, precision=32)


@pytest.fixture
def q5_short():
    return FieldSpec(kind=FieldKind.PADIC, p=5, precision=12)


@pytest.fixture
def f3t():
    return FieldSpec(kind=FieldKind.LAURENT, p=3, precision=24)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def client():
    from app.main import app

    with TestClient(app) as test_client:
        yield test_client
