#include "kernelflow/entropy.hpp"
#include "kernelflow/errors.hpp"
#include "kernelflow/monad.hpp"

#include "random_instances.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace kernelflow {
namespace {

using testing::Rng;

// 1/2 ln 2 + 1/2 ln(2/3), evaluated by hand.
constexpr double kHalfLogFourThirds = 0.14384103622589045;

FiniteSpace two_points() { return FiniteSpace({"x1", "x2"}); }

FiniteDistribution dist(const FiniteSpace& s, std::initializer_list<Rational> masses) {
    return FiniteDistribution(s, std::vector<Rational>(masses));
}

CoherentPair coin_pair(const Rational& heads) {
    const FiniteSpace coin({"H", "T"});
    const FiniteSpace omega({"HH", "HT", "TH", "TT"});
    const Rational tails = Rational(1) - heads;
    const auto p = dist(omega, {heads * heads, heads * tails, tails * heads, tails * tails});
    const auto f = PointMap::from_labels(omega, coin, {{"HH", "H"}, {"HT", "H"}, {"TH", "T"}, {"TT", "T"}});
    const StochasticKernel s(coin, omega,
                             {dist(omega, {Rational(2, 3), Rational(1, 3), Rational(0), Rational(0)}),
                              dist(omega, {Rational(0), Rational(0), Rational(1, 3), Rational(2, 3)})});
    return CoherentPair(f, s, p);
}

double kl(std::initializer_list<double> p, std::initializer_list<double> q) {
    double total = 0.0;
    auto qi = q.begin();
    for (double pi : p) {
        if (pi > 0.0) total += pi * std::log(pi / *qi);
        ++qi;
    }
    return total;
}

// --- re_fin ----------------------------------------------------------------------

TEST(ReFin, VanishesOnOptimalHypothesis) {
    const auto xs = FiniteSpace({"a", "b", "c", "d"});
    const auto p = dist(xs, {Rational(1, 8), Rational(3, 8), Rational(1, 4), Rational(1, 4)});
    const auto f = PointMap::from_labels(xs, FiniteSpace({"u", "v"}), {{"a", "u"}, {"b", "u"}, {"c", "v"}, {"d", "v"}});
    const auto value = re_fin(CoherentPair::with_disintegration(f, p));
    EXPECT_EQ(value.value.value(), 0.0);
    EXPECT_TRUE(value.absolutely_coherent);
    ASSERT_TRUE(value.per_point_terms.has_value());
    for (const auto& t : *value.per_point_terms) EXPECT_EQ(t.term, 0.0);
}

TEST(ReFin, HandEvaluatedTwoPointExample) {
    const auto xs = two_points();
    const auto pair = CoherentPair::to_point(FiniteDistribution::uniform(xs), dist(xs, {Rational(1, 4), Rational(3, 4)}));
    const auto value = re_fin(pair);
    EXPECT_NEAR(value.value.value(), kHalfLogFourThirds, 1e-9);
    EXPECT_NEAR(value.value.value(), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
    ASSERT_EQ(value.per_point_terms->size(), 2u);
    EXPECT_EQ((*value.per_point_terms)[1].point, "x2");
    EXPECT_LT((*value.per_point_terms)[1].term, 0.0);
}

TEST(ReFin, InfiniteWithoutAbsoluteContinuity) {
    const auto xs = two_points();
    const auto value = re_fin(CoherentPair::to_point(FiniteDistribution::uniform(xs), dirac("x1", xs)));
    EXPECT_TRUE(value.value.is_infinite());
    EXPECT_FALSE(value.absolutely_coherent);
    EXPECT_FALSE(value.per_point_terms.has_value());
}

TEST(ReFin, ZeroMassPointsContributeNothing) {
    const auto xs = FiniteSpace({"a", "b", "c"});
    const auto p = dist(xs, {Rational(1, 2), Rational(1, 2), Rational(0)});
    const auto forecast = dist(xs, {Rational(1, 4), Rational(1, 4), Rational(1, 2)});
    const auto value = re_fin(CoherentPair::to_point(p, forecast));
    EXPECT_EQ(value.per_point_terms->size(), 2u);
    EXPECT_NEAR(value.value.value(), std::log(2.0), 1e-15);
}

TEST(ReFin, RejectsIncoherentPairs) {
    const auto xs = two_points();
    const FiniteSpace ys({"u", "v"});
    const auto f = PointMap::from_labels(xs, ys, {{"x1", "u"}, {"x2", "v"}});
    const CoherentPair bad(f, StochasticKernel(ys, xs, {dirac("x2", xs), dirac("x1", xs)}),
                           FiniteDistribution::uniform(xs));
    EXPECT_THROW(re_fin(bad), PreconditionError);
    EXPECT_THROW(convex_decompose(bad), PreconditionError);
}

TEST(ReFin, MatchesFloatingPointOracleAndIsNonNegative) {
    Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const auto pair = testing::random_pair(rng);
        const auto value = re_fin(pair);
        const double oracle = testing::oracle_re(pair);
        EXPECT_GE(value.value.value(), 0.0);
        EXPECT_FALSE(std::isnan(value.value.value()));
        if (std::isinf(oracle)) {
            EXPECT_TRUE(value.value.is_infinite());
            EXPECT_FALSE(value.absolutely_coherent);
        } else {
            EXPECT_NEAR(value.value.value(), oracle, 1e-12);
            EXPECT_EQ(value.absolutely_coherent, true);
        }
    }
}

TEST(ReFin, ExactZeroIffOptimal) {
    Rng rng(18);
    int optimal_seen = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto pair = trial % 3 == 0
                              ? CoherentPair::with_disintegration(
                                    testing::random_surjection(rng, testing::make_space("x", 5), testing::make_space("y", 2)),
                                    testing::random_distribution(rng, testing::make_space("x", 5)))
                              : testing::random_pair(rng, 4, 2);
        const auto value = re_fin(pair);
        if (is_optimal(pair)) {
            ++optimal_seen;
            EXPECT_LE(value.value.value(), 1e-12);
        }
        if (value.per_point_terms) {
            const bool all_zero = std::all_of(value.per_point_terms->begin(), value.per_point_terms->end(),
                                              [](const PointTerm& t) { return t.term == 0.0; });
            EXPECT_EQ(all_zero, is_optimal(pair));
        }
    }
    EXPECT_GT(optimal_seen, 100);
}

// --- local_re / convex_decompose -------------------------------------------------

TEST(LocalRe, Cases) {
    const FiniteSpace xs({"a", "b", "c"});
    const FiniteSpace ys({"u", "v", "w"});
    const auto f = PointMap::from_labels(xs, ys, {{"a", "u"}, {"b", "u"}, {"c", "v"}});
    const auto p = dist(xs, {Rational(1, 4), Rational(1, 4), Rational(1, 2)});
    const StochasticKernel s(ys, xs, {dist(xs, {Rational(1, 4), Rational(3, 4), Rational(0)}), dirac("c", xs),
                                      FiniteDistribution::uniform(xs)});
    const CoherentPair pair(f, s, p);
    EXPECT_NEAR(local_re(pair, "u")->value(), kHalfLogFourThirds, 1e-9);
    EXPECT_EQ(local_re(pair, "v")->value(), 0.0);  // singleton fiber
    EXPECT_FALSE(local_re(pair, "w").has_value());  // q(w) = 0

    const auto optimal = CoherentPair::with_disintegration(f, p);
    EXPECT_EQ(local_re(optimal, "u")->value(), 0.0);
    EXPECT_THROW(local_morphism(pair, 2), PreconditionError);
}

TEST(ConvexDecompose, CoinExampleMatchesDirectExpression) {
    for (const Rational& heads : {Rational(1, 2), Rational(3, 5), Rational(1, 7)}) {
        const auto pair = coin_pair(heads);
        const auto decomposition = convex_decompose(pair);
        const double ph = heads.to_double();
        const double pt = 1.0 - ph;
        const double direct = ph * kl({ph, pt}, {2.0 / 3.0, 1.0 / 3.0}) + pt * kl({ph, pt}, {1.0 / 3.0, 2.0 / 3.0});
        ASSERT_EQ(decomposition.entries.size(), 2u);
        EXPECT_EQ(decomposition.entries[0].y, "H");
        EXPECT_EQ(decomposition.entries[0].weight, heads);
        EXPECT_NEAR(decomposition.total.value(), direct, 1e-12);
        EXPECT_NEAR(decomposition.total.value(), re_fin(pair).value.value(), 1e-12);
    }
    // Fair coin: both locals equal KL((1/2,1/2) || (2/3,1/3)) = 1/2 ln(9/8).
    EXPECT_NEAR(convex_decompose(coin_pair(Rational(1, 2))).total.value(), 0.5 * std::log(9.0 / 8.0), 1e-15);
}

TEST(ConvexDecompose, IdentityMapAgreesWithRe) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto xs = testing::make_space("x", testing::uniform_index(rng, 1, 6));
        const auto pair = CoherentPair::identity(testing::random_distribution(rng, xs));
        const auto d = convex_decompose(pair);
        EXPECT_EQ(d.total.value(), 0.0);
        EXPECT_EQ(d.entries.size(), xs.size());
        EXPECT_EQ(d.total, re_fin(pair).value);
    }
}

TEST(ConvexDecompose, AgreesWithReOnRandomPairs) {
    Rng rng(21);
    int infinite = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto pair = testing::random_pair(rng);
        const auto d = convex_decompose(pair);
        const auto re = re_fin(pair).value;
        if (re.is_infinite()) {
            ++infinite;
            EXPECT_TRUE(d.total.is_infinite());
            const bool some_local_infinite = std::any_of(d.entries.begin(), d.entries.end(), [](const auto& e) {
                return e.local && e.local->is_infinite();
            });
            EXPECT_TRUE(some_local_infinite);
        } else {
            EXPECT_NEAR(d.total.value(), re.value(), 1e-12);
        }
    }
    EXPECT_GT(infinite, 10);
}

// --- functoriality ---------------------------------------------------------------

TEST(Functoriality, OptimalPairsGiveZero) {
    const FiniteSpace xs({"a", "b", "c", "d"});
    const auto p = dist(xs, {Rational(1, 8), Rational(3, 8), Rational(1, 4), Rational(1, 4)});
    const FiniteSpace ys({"u", "v"});
    const auto f = PointMap::from_labels(xs, ys, {{"a", "u"}, {"b", "u"}, {"c", "v"}, {"d", "v"}});
    const auto first = CoherentPair::with_disintegration(f, p);
    const auto second = CoherentPair::with_disintegration(PointMap::to_point(ys, FiniteSpace::singleton()), first.q());
    const auto check = check_functoriality(first, second);
    ASSERT_TRUE(check.residual.has_value());
    EXPECT_EQ(*check.residual, 0.0);
    EXPECT_EQ(check.composite.value(), 0.0);
}

TEST(Functoriality, CaseTwoSecondNotAbsolutelyCoherent) {
    const FiniteSpace xs({"a", "b"});
    const FiniteSpace ys({"u", "v"});
    const auto p = dist(xs, {Rational(1, 3), Rational(2, 3)});
    const auto first = CoherentPair::with_disintegration(PointMap::from_labels(xs, ys, {{"a", "u"}, {"b", "v"}}), p);
    const auto second = CoherentPair::to_point(first.q(), dirac("u", ys));
    const auto check = check_functoriality(first, second);
    EXPECT_TRUE(check.second.is_infinite());
    EXPECT_TRUE(check.composite.is_infinite());
    EXPECT_TRUE(check.infinite_agreement);
    EXPECT_FALSE(check.residual.has_value());
}

TEST(Functoriality, CaseThreeFirstNotAbsolutelyCoherent) {
    const FiniteSpace xs({"a", "b", "c"});
    const FiniteSpace ys({"u", "v"});
    const auto p = FiniteDistribution::uniform(xs);
    const auto f = PointMap::from_labels(xs, ys, {{"a", "u"}, {"b", "u"}, {"c", "v"}});
    const CoherentPair first(f, StochasticKernel(ys, xs, {dirac("a", xs), dirac("c", xs)}), p);
    const auto second = CoherentPair::to_point(first.q(), FiniteDistribution::uniform(ys));
    const auto check = check_functoriality(first, second);
    EXPECT_TRUE(check.first.is_infinite());
    EXPECT_TRUE(check.second.is_finite());
    EXPECT_TRUE(check.infinite_agreement);
    EXPECT_TRUE(check.holds(1e-10));
}

TEST(Functoriality, HoldsOnRandomComposablePairs) {
    Rng rng(500);
    for (int trial = 0; trial < 500; ++trial) {
        const auto [first, second] = testing::random_composable(rng, trial % 2 == 0);
        const auto check = check_functoriality(first, second);
        EXPECT_TRUE(check.holds(1e-10)) << "trial " << trial;
    }
}

TEST(Functoriality, NeedsFiberSupportAtNullPoints) {
    // s_{y2} sits outside its (empty) fiber because X has a single point, so
    // the pair is coherent only q-almost everywhere and the chain rule fails.
    const FiniteSpace xs({"a"});
    const FiniteSpace ys({"y1", "y2"});
    const auto f = PointMap::from_labels(xs, ys, {{"a", "y1"}});
    const CoherentPair first(f, StochasticKernel(ys, xs, {dirac("a", xs), dirac("a", xs)}), dirac("a", xs));
    ASSERT_TRUE(first.coherent());
    EXPECT_FALSE(first.report().fiber_supported_everywhere);
    const auto second = CoherentPair::to_point(first.q(), FiniteDistribution::uniform(ys));
    const auto check = check_functoriality(first, second);
    ASSERT_TRUE(check.residual.has_value());
    EXPECT_NEAR(*check.residual, -std::log(2.0), 1e-15);
}

TEST(Functoriality, RejectsNonComposablePairs) {
    const FiniteSpace xs({"a", "b"});
    const auto a = CoherentPair::identity(FiniteDistribution::uniform(xs));
    const auto b = CoherentPair::identity(dirac("a", xs));
    EXPECT_THROW(check_functoriality(a, b), DomainError);
}

// --- lower semicontinuity --------------------------------------------------------

TEST(LowerSemicontinuity, ConstantSequence) {
    const auto xs = two_points();
    const auto target = CoherentPair::to_point(FiniteDistribution::uniform(xs), dist(xs, {Rational(1, 4), Rational(3, 4)}));
    const auto result = check_lsc_on_sequence(target, std::vector<CoherentPair>(5, target));
    EXPECT_TRUE(result.satisfied);
    EXPECT_EQ(result.liminf_estimate, re_fin(target).value);
}

TEST(LowerSemicontinuity, ShrinkingPerturbationOfUniform) {
    const auto xs = two_points();
    const auto s = FiniteDistribution::uniform(xs);
    const auto target = CoherentPair::to_point(s, s);
    std::vector<CoherentPair> sequence;
    double previous = INFINITY;
    for (long n = 3; n <= 200; ++n) {
        const auto pn = dist(xs, {Rational(1, 2) + Rational(1, n), Rational(1, 2) - Rational(1, n)});
        sequence.push_back(CoherentPair::to_point(pn, s));
        const double value = re_fin(sequence.back()).value.value();
        const double a = 0.5 + 1.0 / static_cast<double>(n);
        EXPECT_NEAR(value, kl({a, 1.0 - a}, {0.5, 0.5}), 1e-15);
        EXPECT_LT(value, previous);
        previous = value;
    }
    const auto result = check_lsc_on_sequence(target, sequence);
    EXPECT_TRUE(result.satisfied);
    EXPECT_LT(result.liminf_estimate.value(), 1e-4);
}

TEST(LowerSemicontinuity, DetectsAJumpUp) {
    // A target above every tail value violates the inequality.
    const auto xs = two_points();
    const auto s = FiniteDistribution::uniform(xs);
    const auto target = CoherentPair::to_point(dist(xs, {Rational(9, 10), Rational(1, 10)}), s);
    const auto result = check_lsc_on_sequence(target, std::vector<CoherentPair>(4, CoherentPair::to_point(s, s)));
    EXPECT_FALSE(result.satisfied);
}

TEST(LowerSemicontinuity, RejectsEmptyAndMisshapedInput) {
    const auto xs = two_points();
    const auto target = CoherentPair::to_point(FiniteDistribution::uniform(xs), FiniteDistribution::uniform(xs));
    EXPECT_THROW(check_lsc_on_sequence(target, {}), DomainError);
    const auto not_to_point = CoherentPair::identity(FiniteDistribution::uniform(xs));
    EXPECT_THROW(check_lsc_on_sequence(target, {not_to_point}), DomainError);
}

// --- scaled functor --------------------------------------------------------------

TEST(ScaledFunctor, Conventions) {
    const auto xs = two_points();
    const auto finite = CoherentPair::to_point(FiniteDistribution::uniform(xs), dist(xs, {Rational(1, 4), Rational(3, 4)}));
    const auto infinite = CoherentPair::to_point(FiniteDistribution::uniform(xs), dirac("x1", xs));
    const auto optimal = CoherentPair::to_point(FiniteDistribution::uniform(xs), FiniteDistribution::uniform(xs));
    EXPECT_EQ(scaled_functor(ExtendedNonNegReal(0.0), finite).value(), 0.0);
    EXPECT_EQ(scaled_functor(ExtendedNonNegReal(0.0), infinite).value(), 0.0);
    EXPECT_NEAR(scaled_functor(ExtendedNonNegReal(2.0), finite).value(), std::log(4.0 / 3.0), 1e-12);
    EXPECT_TRUE(scaled_functor(ExtendedNonNegReal::infinity(), finite).is_infinite());
    EXPECT_EQ(scaled_functor(ExtendedNonNegReal::infinity(), optimal).value(), 0.0);
}

TEST(ScaledFunctor, SatisfiesTheLaws) {
    Rng rng(77);
    const ExtendedNonNegReal c(3.5);
    const MorphismFunctional scaled = [&](const CoherentPair& m) { return scaled_functor(c, m); };
    for (int trial = 0; trial < 200; ++trial) {
        const auto [first, second] = testing::random_composable(rng, trial % 2 == 0);
        EXPECT_TRUE(check_functoriality(first, second, scaled).holds(1e-10));
        const auto d = convex_decompose(first, scaled);
        const auto direct = scaled(first);
        if (direct.is_infinite()) {
            EXPECT_TRUE(d.total.is_infinite());
        } else {
            EXPECT_NEAR(d.total.value(), direct.value(), 1e-12);
        }
    }
}

TEST(ExtendedNonNegReal, Arithmetic) {
    const auto inf = ExtendedNonNegReal::infinity();
    EXPECT_TRUE((inf + ExtendedNonNegReal(1.0)).is_infinite());
    EXPECT_EQ((inf * ExtendedNonNegReal(0.0)).value(), 0.0);
    EXPECT_EQ((ExtendedNonNegReal(0.0) * inf).value(), 0.0);
    EXPECT_TRUE((inf * ExtendedNonNegReal(0.5)).is_infinite());
    EXPECT_THROW(ExtendedNonNegReal(-1e-3), DomainError);
    EXPECT_THROW(ExtendedNonNegReal(NAN), DomainError);
    EXPECT_EQ(inf.to_string(), "inf");
    EXPECT_EQ(ExtendedNonNegReal(0.143841036225890).to_string(), "0.143841036");
}

}  // namespace
}  // namespace kernelflow
