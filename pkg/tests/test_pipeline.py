import math
import random

import pytest

from ordersep.config import RunConfig
from ordersep.covergraph import word_order
from ordersep.errors import (
    ConjugatePair,
    EmptyTargets,
    HypothesisViolation,
    NoFactorHom,
    SharedFactorOrder,
)
from ordersep.groupcore import cyclic_group
from ordersep.pipeline import (
    Instance,
    check_hypotheses,
    classify_targets,
    hyperbolic_classes,
    instance_to_json,
    parse_instance,
    reduce_factors,
    run_theorem3,
    run_theorem12,
    separate,
)
from ordersep.verify import verify_certificate
from ordersep.words import FactorSpec, Factors, NormalForm, finite_factors, normalize, power

A = (0, 1)
B = (1, 1)
AB = NormalForm((A, B))
ABAB2 = NormalForm((A, B, (0, 1), (1, 2)))
E = NormalForm(())


@pytest.fixture(scope="session")
def zz3():
    return Factors((FactorSpec("infinite_cyclic"), FactorSpec("finite", cyclic_group(3))))


@pytest.fixture(scope="session")
def zz():
    return Factors((FactorSpec("infinite_cyclic"), FactorSpec("infinite_cyclic")))


def verified(inst, cert):
    data = cert.to_json()
    data["verified"] = True
    return verify_certificate(instance_to_json(inst), data)


class TestCheckHypotheses:
    def test_dihedral_shared_order(self, z2):
        inst = Instance(finite_factors(z2, z2), [NormalForm((A,)), NormalForm(((1, 1),)), AB])
        with pytest.raises(SharedFactorOrder) as exc:
            check_hypotheses(inst)
        assert exc.value.order == 2

    def test_conjugate_rotation(self, f23):
        ba = NormalForm((B, A))
        with pytest.raises(ConjugatePair):
            check_hypotheses(Instance(f23, [AB, ba]))

    def test_inverse_conjugate(self, f23):
        with pytest.raises(ConjugatePair):
            check_hypotheses(Instance(f23, [AB, NormalForm(((1, 2), A))]))

    def test_accepts_standard_triple(self, f23):
        out = check_hypotheses(Instance(f23, [NormalForm((A,)), NormalForm((B,)), AB]))
        assert len(out) == 3

    def test_empty(self, f23):
        with pytest.raises(EmptyTargets):
            check_hypotheses(Instance(f23, []))

    def test_reduces_cyclically(self, f23):
        conjugated = normalize([B, A, (1, 2)], f23)
        out = check_hypotheses(Instance(f23, [conjugated]))
        assert out[0] == NormalForm((A,))


class TestClassify:
    def test_standard(self, f23):
        reduced = [NormalForm((A,)), NormalForm((B,)), AB]
        assert classify_targets(reduced) == ([0], [1], [2])

    def test_hyperbolic_only(self, f23):
        assert classify_targets([AB, ABAB2]) == ([], [], [0, 1])

    def test_identity_to_alpha(self, f23):
        assert classify_targets([E]) == ([0], [], [])


class TestReduceFactors:
    def test_identity_homs_for_distinct_orders(self, f23):
        inst = Instance(f23, [NormalForm((A,)), NormalForm((B,)), AB])
        reduced = check_hypotheses(inst)
        homs, rfactors, mapped = reduce_factors(inst, reduced, classify_targets(reduced))
        assert homs[0].target.n == 2 and homs[1].target.n == 3
        assert mapped == reduced

    def test_modulus_search_for_free_group_powers(self, zz):
        x1 = NormalForm(((0, 1),))
        x3 = NormalForm(((0, 3),))
        y = NormalForm(((1, 1),))
        inst = Instance(zz, [x1, x3, y])
        reduced = check_hypotheses(inst)
        homs, rfactors, mapped = reduce_factors(inst, reduced, classify_targets(reduced))
        m = homs[0].modulus
        from ordersep.groupcore import element_order

        o1 = element_order(homs[0].target, 1 % m)
        o3 = element_order(homs[0].target, 3 % m)
        assert o1 != o3 and o1 > 1 and o3 > 1

    def test_no_factor_hom_for_inseparable_factor(self):
        z5 = cyclic_group(5)
        z9 = cyclic_group(9)
        factors = finite_factors(z5, z9)
        # 1 and 2 in Z/5 are non-conjugate up to inversion but no quotient
        # separates their orders
        inst = Instance(factors, [NormalForm(((0, 1),)), NormalForm(((0, 2),))])
        reduced = check_hypotheses(inst)
        with pytest.raises(NoFactorHom):
            reduce_factors(inst, reduced, classify_targets(reduced))

    def test_gamma_syllables_survive(self, f23):
        inst = Instance(f23, [ABAB2])
        reduced = check_hypotheses(inst)
        homs, rfactors, mapped = reduce_factors(inst, reduced, classify_targets(reduced))
        assert len(mapped[0]) == 4


class TestHyperbolicClasses:
    def test_two_classes(self, f23):
        # ab and abab^2 have non-conjugate roots (different lengths); note
        # that ab^2 would NOT do here: it is a rotation of (ab)^-1
        classes = hyperbolic_classes([0, 1], [AB, ABAB2], f23)
        assert len(classes) == 2

    def test_conjugate_up_to_inversion_diagnosed(self, f23):
        from ordersep.errors import InternalError

        ab2 = NormalForm((A, (1, 2)))  # conjugate to (ab)^-1
        with pytest.raises(InternalError):
            hyperbolic_classes([0, 1], [AB, ab2], f23)

    def test_powers_share_class(self, f23):
        w6, w12 = power(AB, 6, f23), power(AB, 12, f23)
        classes = hyperbolic_classes([0, 1], [w6, w12], f23)
        assert len(classes) == 1
        cls = classes[0]
        assert sorted(abs(k) for _i, k, _l in cls.members) == [1, 2]
        assert cls.root == w6

    def test_mixed_powering_exponents(self, f23):
        # ab powers into (ab)^6 with l=6; (ab)^2 with l=3: same class element
        w2 = power(AB, 2, f23)
        classes = hyperbolic_classes([0, 1], [AB, w2], f23)
        assert len(classes) == 1
        members = classes[0].members
        assert {(abs(k), l) for _i, k, l in members} == {(1, 6), (1, 3)}

    def test_inverse_root_joins_class(self, f23):
        inv = NormalForm(((1, 2), A))  # (ab)^-1
        w = power(AB, 6, f23)
        winv = power(inv, 6, f23)
        classes = hyperbolic_classes([0, 1], [power(AB, 12, f23), winv], f23)
        assert len(classes) == 1
        signs = sorted(k for _i, k, _l in classes[0].members)
        assert signs[0] < 0 < signs[1]


class TestTheorem12:
    def test_standard_triple(self, f23):
        inst = Instance(f23, [NormalForm((A,)), NormalForm((B,)), AB], "theorem12")
        cert = separate(inst)
        values = sorted(cert.orders.values())
        assert len(set(values)) == 3
        assert cert.orders[0] == 2 and cert.orders[1] == 3
        assert verified(inst, cert).verdict

    def test_gamma_empty_uses_base_only(self, f23):
        inst = Instance(f23, [NormalForm((A,)), NormalForm((B,))], "theorem12")
        cert = separate(inst)
        assert len(cert.components) == 1
        assert cert.orders == {0: 2, 1: 3}
        assert verified(inst, cert).verdict

    def test_power_pair(self, f23):
        w6, w12 = power(AB, 6, f23), power(AB, 12, f23)
        inst = Instance(f23, [w6, w12], "theorem12")
        cert = separate(inst)
        assert cert.orders[0] != cert.orders[1]
        assert verified(inst, cert).verdict

    def test_two_roots(self, f23):
        inst = Instance(f23, [ABAB2, power(AB, 6, f23)], "theorem12")
        cert = separate(inst)
        assert cert.orders[0] != cert.orders[1]
        assert verified(inst, cert).verdict

    def test_original_order_is_power_times_class_order(self, f23):
        # order of ab must equal 6 times the order of (ab)^6 on every component
        inst = Instance(f23, [NormalForm((A,)), NormalForm((B,)), AB], "theorem12")
        cert = separate(inst)
        w6 = power(AB, 6, f23)
        for comp in cert.components:
            assert word_order(comp.graph, AB) == 6 * word_order(comp.graph, w6)

    def test_klein_factor(self, klein):
        z3 = cyclic_group(3)
        factors = finite_factors(klein, z3)
        targets = [NormalForm(((0, 1),)), NormalForm(((1, 1),)), NormalForm(((0, 1), (1, 1)))]
        inst = Instance(factors, targets, "theorem12")
        cert = separate(inst)
        assert len(set(cert.orders.values())) == 3
        assert verified(inst, cert).verdict


class TestTheorem3:
    def test_mixed_with_hyperbolic(self, f23):
        inst = Instance(f23, [NormalForm((A,)), NormalForm((B,)), AB], "theorem3")
        cert = separate(inst)
        assert len(set(cert.orders.values())) == 3
        assert verified(inst, cert).verdict

    def test_retraction_case(self, zz3):
        x1 = NormalForm(((0, 1),))
        x3 = NormalForm(((0, 3),))
        b = NormalForm(((1, 1),))
        inst = Instance(zz3, [x1, x3, b], "theorem3")
        cert = separate(inst)
        assert cert.orders[2] == 1
        assert sorted(cert.orders.values())[1] > 1
        assert len(set(cert.orders.values())) == 3
        assert verified(inst, cert).verdict

    def test_identity_branch_finite(self, f23):
        inst = Instance(f23, [E, NormalForm((A,)), NormalForm((B,))], "theorem3")
        cert = separate(inst)
        assert cert.orders == {0: 1, 1: 2, 2: 3}
        assert verified(inst, cert).verdict

    def test_identity_branch_infinite(self, zz3):
        inst = Instance(zz3, [E, NormalForm(((0, 2),)), NormalForm(((1, 1),))], "theorem3")
        cert = separate(inst)
        assert cert.orders[0] == 1
        assert len(set(cert.orders.values())) == 3
        assert verified(inst, cert).verdict

    def test_infinite_u_with_finite_v(self, zz3):
        inst = Instance(
            zz3,
            [NormalForm(((0, 1),)), NormalForm(((1, 1),)), NormalForm(((0, 1), (1, 1)))],
            "theorem3",
        )
        cert = separate(inst)
        assert len(set(cert.orders.values())) == 3
        assert verified(inst, cert).verdict

    def test_target_cap(self, f23):
        words = [NormalForm((A,)), NormalForm((B,)), AB, ABAB2]
        with pytest.raises(HypothesisViolation):
            Instance(f23, words, "theorem3")

    def test_delegates_when_one_sided(self, f23):
        # no factor-1 element: the general pipeline takes over
        inst = Instance(f23, [NormalForm((A,)), AB], "theorem3")
        cert = separate(inst)
        assert cert.orders[0] != cert.orders[1]
        assert verified(inst, cert).verdict


class TestAssemble:
    def test_product_materialized_when_small(self, f23):
        inst = Instance(f23, [NormalForm((A,)), NormalForm((B,))], "theorem12")
        cert = separate(inst)
        assert cert.product is not None
        assert cert.product.vcount == 6

    def test_lcm_orders(self, f23):
        inst = Instance(f23, [ABAB2, power(AB, 6, f23)], "theorem12")
        cert = separate(inst)
        for i, w in enumerate([ABAB2, power(AB, 6, f23)]):
            assert cert.orders[i] == math.lcm(*(word_order(c.graph, w) for c in cert.components))


class TestInstanceJson:
    def test_roundtrip(self, f23):
        inst = Instance(f23, [AB, ABAB2], "theorem12")
        data = instance_to_json(inst)
        back = parse_instance(data)
        assert back.targets == inst.targets
        assert back.mode == "theorem12"

    def test_bad_mode(self, f23):
        from ordersep.errors import ParseError

        with pytest.raises(ParseError):
            parse_instance({"factors": [{"type": "finite", "table": [[0]]}] * 2,
                            "targets": [], "mode": "nonsense"})
