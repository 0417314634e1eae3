import pytest

from app.exceptions import ConfigValidationError, ParseError
from app.models.certificate_models import NotCertifiedReason, UnboundednessWitness
from app.services import bttree, density, psl2
from app.services import localfield as lf
from app.services.nielsen import MarkedTuple


@pytest.fixture
def generic_pair(q5, rng):
    return MarkedTuple((psl2.sample_hyperbolic(q5, rng, m=1), psl2.sample_elliptic(q5, rng)))


def test_letters():
    assert density.parse_letters("g1 g2^-1", 2) == (0, 3)
    assert density.format_letters((0, 3)) == "g1 g2^-1"
    with pytest.raises(ParseError):
        density.parse_letters("g3", 2)
    with pytest.raises(ParseError):
        density.parse_letters("", 2)
    with pytest.raises(ParseError):
        density.parse_letters("h1", 2)


def test_enumerate_reduced_words(generic_pair):
    words = [word for word, _ in density.enumerate_words(generic_pair, 3)]
    assert len(words) == 4 + 12 + 36
    assert words[:4] == [(0,), (1,), (2,), (3,)]
    assert all(b != a ^ 1 for word in words for a, b in zip(word, word[1:]))
    assert [len(w) for w in words] == sorted(len(w) for w in words)


def test_evaluate(generic_pair):
    value = density.evaluate(generic_pair, (0, 1))
    assert value.is_identity()
    assert density.evaluate(generic_pair, (2, 0)).equals(generic_pair[2].compose(generic_pair[1]))


def test_power_exponent():
    assert density.power_exponent(5, 1) == 60
    assert density.power_exponent(5, 2) == 300
    assert density.power_exponent(3, 1) == 12


@pytest.mark.parametrize("valuations", [[2, 3], [-2, 3], [4, 6, 9], [6, -4, 9], [1]])
def test_combine_reaches_valuation_one(valuations):
    exponents = density._combine(valuations)
    assert sum(e * v for e, v in zip(exponents, valuations)) == 1


def test_congruence_witness_in_padic_field(q5):
    base = bttree.base_vertex(q5)
    assert density.check_congruence_witness(psl2.unipotent(q5, lf.from_int(q5, 5)), 1, 1, base)
    assert not density.check_congruence_witness(psl2.unipotent(q5, lf.from_int(q5, 5)), 2, 1, base)
    assert not density.check_congruence_witness(psl2.unipotent(q5, lf.one(q5)), 1, 1, base)
    assert not density.check_congruence_witness(psl2.identity(q5), 1, 1, base)


def test_congruence_witness_rejects_unipotent_torsion(f3t):
    base = bttree.base_vertex(f3t)
    g = psl2.unipotent(f3t, lf.pi_power(f3t, 1))
    assert not density.check_congruence_witness(g, 1, 1, base)


def test_fixed_points_of_diagonal(q5):
    first, second = density.fixed_points(psl2.diagonal(q5, 1))
    assert density.points_distinct([first, second])
    assert not density.points_distinct([first, first])


def test_generic_pair_is_certified(generic_pair):
    certificate = density.certify_dense(generic_pair, word_length=3)
    assert certificate.certified
    assert certificate.reasons == []
    assert certificate.unbounded.word == "g1"
    assert certificate.trace_field.automatic
    assert density.verify_certificate(generic_pair, certificate)


def test_subfield_tuple_misses_trace_field(f3t, rng):
    t = MarkedTuple(
        (
            psl2.embed_subfield(psl2.sample_hyperbolic(f3t, rng, m=1), 2),
            psl2.embed_subfield(psl2.sample_elliptic(f3t, rng), 2),
        )
    )
    certificate = density.certify_dense(t, word_length=3)
    assert not certificate.certified
    assert NotCertifiedReason.TRACE_FIELD in certificate.reasons
    assert certificate.trace_field is None
    assert density.verify_certificate(t, certificate)


def test_single_elliptic_is_bounded(q5, rng):
    t = MarkedTuple((psl2.sample_elliptic(q5, rng),))
    certificate = density.certify_dense(t, word_length=4)
    assert NotCertifiedReason.BOUNDED in certificate.reasons
    assert NotCertifiedReason.ZARISKI in certificate.reasons
    assert certificate.unbounded is None


def test_reasons_shrink_with_word_length(generic_pair):
    previous = None
    for length in (1, 2, 3):
        certificate = density.certify_dense(generic_pair, word_length=length)
        if previous is not None:
            assert set(certificate.reasons) <= set(previous.reasons)
            if previous.unbounded is not None:
                assert certificate.unbounded == previous.unbounded
        previous = certificate


def test_certificate_text_record(generic_pair):
    certificate = density.certify_dense(generic_pair, word_length=3)
    text = density.encode_certificate(certificate)
    assert text.splitlines()[0] == "status=Certified"
    decoded = density.decode_certificate(text)
    assert decoded == certificate
    assert density.verify_certificate(generic_pair, decoded)


def test_decode_certificate_rejects_garbage():
    with pytest.raises(ParseError):
        density.decode_certificate("status Certified")
    with pytest.raises(ParseError):
        density.decode_certificate("status=Certified")


def test_tampered_certificate_fails(generic_pair):
    certificate = density.certify_dense(generic_pair, word_length=3)
    wrong = UnboundednessWitness(word="g1", translation_length=certificate.unbounded.translation_length + 2)
    assert not density.verify_certificate(generic_pair, certificate.model_copy(update={"unbounded": wrong}))


def test_certificate_does_not_verify_for_other_tuple(generic_pair, q5, rng):
    certificate = density.certify_dense(generic_pair, word_length=3)
    other = MarkedTuple((psl2.sample_elliptic(q5, rng), psl2.sample_elliptic(q5, rng)))
    assert not density.verify_certificate(other, certificate)


def test_input_checks(generic_pair, q5):
    with pytest.raises(ConfigValidationError):
        density.certify_dense(generic_pair, word_length=3, nd_level=q5.precision)
    with pytest.raises(ConfigValidationError):
        density.certify_dense(generic_pair, word_length=0)
