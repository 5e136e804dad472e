#include "doctest.h"

#include "adagrid/monotone.hpp"
#include "adagrid/oracle.hpp"
#include "adagrid/rng.hpp"
#include "adagrid/static_designs.hpp"

#include <algorithm>

using namespace adagrid;

namespace {

// O(n^2) maximal elements under <=, used as an independent reference.
std::vector<UnitPoint> brute_maximal(const std::vector<UnitPoint>& pts) {
    std::vector<UnitPoint> out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
            if (pts[i] == pts[j]) continue;
            bool le = true;
            for (std::size_t k = 0; k < pts[i].dimension(); ++k) le = le && pts[i][k] <= pts[j][k];
            dominated = le;
        }
        if (!dominated && std::find(out.begin(), out.end(), pts[i]) == out.end()) out.push_back(pts[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<UnitPoint> sorted(std::vector<UnitPoint> v) {
    std::sort(v.begin(), v.end());
    return v;
}

UnitPoint random_point(Rng& rng, std::size_t p, int resolution = 0) {
    std::vector<double> x(p);
    for (auto& c : x) {
        c = rng.uniform01();
        if (resolution > 0) c = std::floor(c * resolution) / resolution;
    }
    return UnitPoint(x);
}

}  // namespace

TEST_SUITE("core") {
    TEST_CASE("dominance examples") {
        CHECK(dominates_leq({0.2, 0.3}, {0.2, 0.9}));
        CHECK_FALSE(dominates_leq({0.5, 0.1}, {0.4, 0.9}));
        UnitPoint x{0.3, 0.7, 0.1};
        CHECK(dominates_leq(x, x));
        CHECK_THROWS_AS(dominates_leq({0.1}, {0.1, 0.2}), UsageError);
    }

    TEST_CASE("unit point validation") {
        CHECK_THROWS_AS(UnitPoint({1.5}), UsageError);
        CHECK_THROWS_AS(UnitPoint({-0.1, 0.2}), UsageError);
        CHECK_NOTHROW(UnitPoint({0.0, 1.0}));
    }

    TEST_CASE("classification examples") {
        DesignState s(2);
        s.insert({{0.5, 0.5}, Label::Negative});
        CHECK(s.classify(UnitPoint{0.25, 0.25}) == Certainty::CertainNegative);
        CHECK(s.classify(UnitPoint{0.75, 0.75}) == Certainty::Unknown);
        s.insert({{0.6, 0.6}, Label::Positive});
        CHECK(s.classify(UnitPoint{0.7, 0.9}) == Certainty::CertainPositive);
        CHECK(s.classify(UnitPoint{0.55, 0.55}) == Certainty::Unknown);
    }

    TEST_CASE("insertion examples") {
        DesignState s(2);
        s.insert({{0.5, 0.5}, Label::Negative});
        CHECK(s.neg_frontier() == std::vector<UnitPoint>{{0.5, 0.5}});

        DesignState a(2);
        a.insert({{0.5, 0.25}, Label::Negative});
        a.insert({{0.25, 0.5}, Label::Negative});
        CHECK(sorted(a.neg_frontier()) == sorted({{0.5, 0.25}, {0.25, 0.5}}));

        DesignState b(2);
        b.insert({{0.25, 0.25}, Label::Negative});
        b.insert({{0.5, 0.5}, Label::Negative});
        CHECK(b.neg_frontier() == std::vector<UnitPoint>{{0.5, 0.5}});
    }

    TEST_CASE("non-monotone observation reports both witnesses and leaves the state alone") {
        DesignState s(2);
        s.insert({{0.4, 0.4}, Label::Positive});
        const DesignState before = s;
        try {
            s.insert({{0.6, 0.7}, Label::Negative});
            FAIL("expected NonMonotoneError");
        } catch (const NonMonotoneError& e) {
            CHECK(e.negative_witness().point == UnitPoint{0.6, 0.7});
            CHECK(e.positive_witness().point == UnitPoint{0.4, 0.4});
        }
        CHECK(s == before);
    }

    TEST_CASE("frontiers match brute-force maximal and minimal elements") {
        Rng rng(11);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t p = 1 + trial % 4;
            StaircaseOracle f(p, 6, 1000 + trial);
            DesignState s(p);
            std::vector<UnitPoint> neg, pos;
            for (int i = 0; i < 200; ++i) {
                const UnitPoint x = random_point(rng, p, trial % 2 ? 8 : 0);
                const Label l = f.evaluate(x);
                s.insert({x, l}, CandidatePolicy::Keep);
                (l == Label::Negative ? neg : pos).push_back(x);
            }
            CHECK(sorted(s.neg_frontier()) == brute_maximal(neg));
            std::vector<UnitPoint> pos_reflected;
            for (const auto& x : pos) pos_reflected.push_back(x.reflected());
            std::vector<UnitPoint> expected_pos;
            for (const auto& x : brute_maximal(pos_reflected)) expected_pos.push_back(x.reflected());
            CHECK(sorted(s.pos_frontier()) == sorted(expected_pos));
            CHECK(s.negative_count() == neg.size());

            // Transitivity audit: nothing certain-negative dominates something certain-positive.
            for (int q = 0; q < 200; ++q) {
                const UnitPoint a = random_point(rng, p);
                const UnitPoint b = random_point(rng, p);
                if (dominates_leq(b, a) && s.classify(b) == Certainty::CertainPositive) {
                    CHECK(s.classify(a) != Certainty::CertainNegative);
                }
            }
        }
    }

    TEST_CASE("frontiers are independent of insertion order") {
        Rng rng(5);
        StaircaseOracle f(3, 5, 77);
        std::vector<LabeledPoint> obs;
        for (int i = 0; i < 60; ++i) {
            const UnitPoint x = random_point(rng, 3, 4);
            obs.push_back({x, f.evaluate(x)});
        }
        DesignState ref(3);
        for (const auto& o : obs) ref.insert(o, CandidatePolicy::Keep);
        for (int perm = 0; perm < 10; ++perm) {
            std::shuffle(obs.begin(), obs.end(), rng.engine());
            DesignState s(3);
            for (const auto& o : obs) s.insert(o, CandidatePolicy::Keep);
            CHECK(s.neg_frontier() == ref.neg_frontier());
            CHECK(s.pos_frontier() == ref.pos_frontier());
        }
    }

    TEST_CASE("pruning removes certain candidates and counts them") {
        DesignState s(2);
        s.set_candidates({{0.0, 0.0}, {0.25, 0.5}, {0.5, 0.5}, {1.0, 1.0}, {0.75, 0.25}});
        const std::size_t removed = s.insert({{0.5, 0.5}, Label::Negative});
        CHECK(removed == 3);
        CHECK(s.candidates() == std::vector<UnitPoint>{{0.75, 0.25}, {1.0, 1.0}});
        for (const auto& c : s.candidates()) CHECK(s.classify(c) == Certainty::Unknown);
    }

    TEST_CASE("comparable pairs") {
        CHECK(count_comparable_pairs({{0.0, 1.0}, {1.0, 0.0}}) == 0);
        CHECK(count_comparable_pairs(gen_sg(2, 81)) == 1944);
        CHECK(count_comparable_pairs(gen_sg(5, 243)) == 7533);
        CHECK(count_comparable_pairs(gen_si(2, 81)) == 1944);

        // Brute-force reference and the C(n,2) ceiling.
        Rng rng(3);
        for (std::size_t p = 1; p <= 3; ++p) {
            std::vector<UnitPoint> pts;
            for (int i = 0; i < 40; ++i) pts.push_back(random_point(rng, p, 5));
            std::uint64_t brute = 0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                for (std::size_t j = i + 1; j < pts.size(); ++j) {
                    brute += dominates_leq(pts[i], pts[j]) || dominates_leq(pts[j], pts[i]);
                }
            }
            CHECK(count_comparable_pairs(pts) == brute);
            CHECK(brute <= 40 * 39 / 2);
            if (p == 1) CHECK(brute == 40 * 39 / 2);
        }
    }
}
