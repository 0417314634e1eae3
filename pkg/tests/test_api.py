from app.services import psl2

FIELD = {"kind": "padic", "p": 5, "precision": 32}


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["health_check"] == "/health"


def test_classify(client, q5):
    element = psl2.encode(psl2.diagonal(q5, 1))
    response = client.post("/lab/classify", json={"field": FIELD, "element": element})
    assert response.status_code == 200
    body = response.json()
    assert body["kind"] == "Hyperbolic"
    assert body["translation_length"] == 2
    assert body["oracle_agrees"] is True


def test_classify_malformed_element(client):
    response = client.post("/lab/classify", json={"field": FIELD, "element": "not a matrix"})
    assert response.status_code == 400
    assert response.json()["error"] == "ParseError"


def test_classify_missing_element(client):
    response = client.post("/lab/classify", json={"field": FIELD})
    assert response.status_code == 422
    assert response.json()["error"] == "Validation Error"


def test_reduce(client, q5):
    entries = [psl2.encode(psl2.diagonal(q5, 1)), psl2.encode(psl2.identity(q5))]
    response = client.post("/lab/reduce", json={"field": FIELD, "entries": entries})
    assert response.status_code == 200
    assert response.json()["word"] == "T 1 2"


def test_normalize_common_fixed_vertex(client, q5):
    entries = [psl2.encode(psl2.identity(q5)), psl2.encode(psl2.rotation(q5))]
    response = client.post("/lab/normalize", json={"field": FIELD, "entries": entries, "scan_radius": 1})
    assert response.status_code == 409
    assert response.json()["error"] == "CommonFixedVertex"


def test_certify(client, q5, rng):
    entries = [psl2.encode(psl2.sample_hyperbolic(q5, rng, m=1)), psl2.encode(psl2.sample_elliptic(q5, rng))]
    response = client.post("/lab/certify", json={"field": FIELD, "entries": entries, "word_length": 3})
    assert response.status_code == 200
    assert response.json()["unbounded"]["word"] == "g1"


def test_census(client):
    response = client.post("/lab/prg-census", json={"kind": "PSL2", "p": 5, "k": 2})
    assert response.status_code == 200
    body = response.json()
    assert body["group_order"] == 60
    assert sum(body["orbit_sizes"]) == body["generating_tuples"]


def test_census_budget(client):
    response = client.post("/lab/prg-census", json={"kind": "SL2", "p": 13, "k": 3})
    assert response.status_code == 413
    assert response.json()["details"]["budget"] > 0
