#include "doctest.h"
#include "test_support.hpp"

#include "kleinian/configuration.hpp"
#include "kleinian/errors.hpp"
#include "kleinian/numeric.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <set>

using namespace kleinian;
using namespace testsupport;

TEST_CASE("constant L and the derived quasi-geodesic constants") {
    // acosh(x) = ln(x + sqrt(x^2 - 1)); for x = 2 sqrt 2 that is ln(2 sqrt 2 + sqrt 7).
    double oracle = 2 * std::log(2 * std::sqrt(2.0) + std::sqrt(7.0)) + 1;
    CHECK(constant_L() == doctest::Approx(oracle).epsilon(1e-15));
    CHECK(constant_L() == doctest::Approx(4.40008441411334).epsilon(1e-13));
    CHECK(constant_A() == doctest::Approx(18 * oracle).epsilon(1e-15));
    CHECK(constant_B() == doctest::Approx(4 + 12 * oracle).epsilon(1e-15));
    // The commonly quoted decimals (4.400246, 79.2044, 56.8030) agree to a few 1e-3.
    CHECK(std::abs(constant_L() - 4.400246) < 5e-3);
    CHECK(std::abs(constant_A() - 79.2044) < 5e-3);
    CHECK(std::abs(constant_B() - 56.8030) < 5e-3);
}

TEST_CASE("build rejects bad parameters") {
    CHECK_THROWS_AS(build_configuration(0), Error);
    CHECK_THROWS_AS(build_configuration(2, 0.0), Error);
    CHECK_THROWS_AS(build_configuration(2, -1.0), Error);
    CHECK_THROWS_AS(build_configuration(2, NAN), Error);
    CHECK(build_configuration(2).ell() == 6 * constant_L());
}

TEST_CASE("axes are mutually orthogonal at O and lie in the right planes") {
    for (int n = 1; n <= 3; ++n) {
        Configuration c = build_configuration(n);
        HPoint o = c.base();
        CHECK(d(dist(o, HPoint::origin(2 * n))) == 0.0);
        for (int j = 1; j <= n; ++j)
            for (int s = 0; s <= 1; ++s) {
                Geodesic g = c.axis(j, s);
                CHECK(d(dist(g.base(), o)) < 1e-12);
                CHECK(d(g.dir()(Configuration::axis_coordinate(j, s))) == 1.0);
                for (int k = 1; k <= n; ++k)
                    for (int t = 0; t <= 1; ++t) {
                        if (k == j && t == s) continue;
                        Real ang = angle_at(o, g.dir(), c.axis(k, t).dir());
                        CHECK(std::abs(d(ang) - M_PI / 2) < 1e-9);
                    }
                // Plane Sigma_b holds axis (j, s) exactly when b_j = s.
                for (const Plane& b : c.planes()) {
                    bool expect = b[static_cast<size_t>(j - 1)] - '0' == s;
                    double r = d(c.plane(b).containment_residual(g.dir()));
                    CHECK((r < 1e-12) == expect);
                }
            }
        CHECK(c.planes().size() == (1u << n));
    }
    CHECK_THROWS_AS(build_configuration(2).plane("012"), Error);
    CHECK_THROWS_AS(build_configuration(2).plane("0x"), Error);
}

TEST_CASE("n = 2 plane intersections") {
    Configuration c = build_configuration(2);
    SubspaceIntersection line = subspace_intersection(c.plane("00"), c.plane("01"));
    REQUIRE(std::holds_alternative<GeodesicSubspace>(line));
    CHECK(std::get<GeodesicSubspace>(line).dim() == 1);
    CHECK(d(std::get<GeodesicSubspace>(line).containment_residual(c.axis(1, 0).dir())) < 1e-12);
    SubspaceIntersection pt = subspace_intersection(c.plane("00"), c.plane("11"));
    REQUIRE(std::holds_alternative<HPoint>(pt));
    CHECK(d(dist(std::get<HPoint>(pt), c.base())) < 1e-12);
}

TEST_CASE("n = 3: intersection dimension equals the number of agreeing entries") {
    Configuration c = build_configuration(3);
    auto planes = c.planes();
    int pairs = 0;
    for (size_t i = 0; i < planes.size(); ++i)
        for (size_t k = i + 1; k < planes.size(); ++k) {
            int agree = 0;
            for (size_t j = 0; j < 3; ++j) agree += planes[i][j] == planes[k][j];
            // Independent rank oracle: the coordinate spans meet in the span of
            // e0 and the shared coordinate axes, so the rank is 1 + agree.
            SubspaceIntersection x = subspace_intersection(c.plane(planes[i]), c.plane(planes[k]));
            int dim = std::holds_alternative<HPoint>(x) ? 0 : std::get<GeodesicSubspace>(x).dim();
            CHECK(dim == agree);
            ++pairs;
        }
    CHECK(pairs == 28);
}

TEST_CASE("generators preserve their plane, fix their axis endpoints, and translate by their length") {
    Configuration c = build_configuration(2);
    PrecisionGuard guard(bits_for_distance(4 * c.max_letter_length()));
    for (int j = 1; j <= 2; ++j)
        for (int s = 0; s <= 1; ++s) {
            Mat g = c.generator(j, s);
            CHECK(d(lorentz_residual(g)) < 1e-12);
            Geodesic ax = c.axis(j, s);
            CHECK(d(chordal(apply(g, boundary_endpoint(ax, 1)), boundary_endpoint(ax, 1))) < 1e-12);
            CHECK(d(chordal(apply(g, boundary_endpoint(ax, -1)), boundary_endpoint(ax, -1))) < 1e-12);
            HPoint go = HPoint::normalized(g * c.base().v());
            CHECK(d(dist(go, c.base())) == doctest::Approx(c.generator_length(s)).epsilon(1e-12));
            Mat inv = c.generator(j, s, -1);
            CHECK(d(((g * inv) - Mat::Identity(5, 5)).cwiseAbs().maxCoeff()) < 1e-12);
            for (const Plane& b : c.planes()) {
                if (b[static_cast<size_t>(j - 1)] - '0' != s) continue;
                GeodesicSubspace moved = c.plane(b).transformed(g);
                for (Eigen::Index col = 0; col < moved.basis().cols(); ++col)
                    CHECK(d(c.plane(b).containment_residual(moved.basis().col(col))) < 1e-12);
            }
        }
    CHECK(c.generator_length(1) == doctest::Approx(c.ell() * golden_ratio()));
}

TEST_CASE("rebuilding is bit-identical") {
    CHECK(configuration_to_json(build_configuration(3)) == configuration_to_json(build_configuration(3)));
    CHECK(configuration_to_json(build_configuration(2, 30.5)) == configuration_to_json(build_configuration(2, 30.5)));
}

TEST_CASE("JSON round trip is bit-exact") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ell(1.0, 100.0);
    for (int k = 0; k < 20; ++k) {
        int n = 1 + k % 3;
        Configuration c = build_configuration(n, ell(rng));
        if (k % 2) c = c.conjugated(random_isometry(rng, 2 * n, 0.5));
        std::string text = configuration_to_json(c);
        Configuration back = configuration_from_json(text);
        double e1 = back.ell(), e2 = c.ell();
        CHECK(std::memcmp(&e1, &e2, sizeof(double)) == 0);
        REQUIRE(back.frame_entries().size() == c.frame_entries().size());
        for (size_t i = 0; i < c.frame_entries().size(); ++i)
            CHECK(std::memcmp(&back.frame_entries()[i], &c.frame_entries()[i], sizeof(double)) == 0);
        CHECK(configuration_to_json(back) == text);
    }
}

TEST_CASE("JSON layout: stable keys and 17 significant digits") {
    Configuration c = build_configuration(2, 0.1);
    std::string text = configuration_to_json(c);
    auto doc = nlohmann::json::parse(text);
    CHECK(doc["format"] == "kleinian-configuration");
    CHECK(doc["n"] == 2);
    CHECK(doc["frame"].size() == 25);
    CHECK(doc["axes"].size() == 4);
    CHECK(doc["generators"].size() == 4);
    CHECK(doc["generators"][0]["matrix"].size() == 25);
    CHECK(text.find("\"ell\": 0.10000000000000001") != std::string::npos);
}

TEST_CASE("JSON parse errors") {
    auto code_of = [](const std::string& text) {
        try {
            configuration_from_json(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Precondition;
    };
    CHECK(code_of("{not json") == ErrorCode::ParseError);
    CHECK(code_of("{\"n\": 2, \"ell\": 26.4}") == ErrorCode::ParseError);
    CHECK(code_of("{\"format\": \"kleinian-configuration\", \"ell\": 26.4}") == ErrorCode::ParseError);
    CHECK(code_of("{\"format\": \"kleinian-configuration\", \"n\": 2, \"ell\": 26.4, \"frame\": [1, 0]}") ==
          ErrorCode::ParseError);
    CHECK(code_of("{\"format\": \"kleinian-configuration\", \"n\": 0, \"ell\": 26.4}") ==
          ErrorCode::InvalidParameters);
    // A tampered generator matrix is detected.
    auto doc = nlohmann::json::parse(configuration_to_json(build_configuration(1)));
    doc["generators"][0]["matrix"][0] = 2.0;
    CHECK(code_of(doc.dump()) == ErrorCode::ParseError);
    CHECK_NOTHROW(configuration_from_json("{\"format\": \"kleinian-configuration\", \"n\": 1, \"ell\": 26.4}"));
    CHECK_THROWS_AS(load_configuration("/nonexistent/dir/c.json"), Error);
}

TEST_CASE("reduced sequences: count and shortlex-free reduction") {
    // 4n letters, each later letter avoids the inverse of its predecessor:
    // sum_{k=1..d} 4n (4n-1)^{k-1}.
    for (int n = 1; n <= 3; ++n)
        for (int depth = 1; depth <= 3; ++depth) {
            long expect = 0, term = 4 * n;
            for (int k = 1; k <= depth; ++k, term *= 4 * n - 1) expect += term;
            auto words = reduced_sequences(n, depth);
            CHECK(static_cast<long>(words.size()) == expect);
            std::set<std::string> distinct;
            for (const Word& w : words) {
                CHECK(is_freely_reduced(w));
                distinct.insert(format_word(w));
            }
            CHECK(distinct.size() == words.size());
        }
}

TEST_CASE("validation: depth-one separation equals ell") {
    // A translation of length t along an axis orthogonal to gamma at O moves
    // gamma to distance exactly t; translations along gamma itself fix it.
    Configuration c = build_configuration(2);
    ValidationReport rep = validate_configuration(c, 1);
    CHECK(rep.passed);
    CHECK(rep.min_separation == doctest::Approx(c.ell()).epsilon(1e-12));
    CHECK(rep.orthogonality_residual < 1e-12);
    CHECK(rep.intersection_residual < 1e-12);
    CHECK(rep.words_checked == 8);
    CHECK(rep.pairs_checked == 8 * 4 - 8);
}

TEST_CASE("validation: Pythagorean oracle for two commuting orthogonal translations") {
    // a2+ b2+ moves O to x0 = cosh(l) cosh(l phi), and gamma_1 to a geodesic at
    // distance acosh(cosh(l) cosh(l phi)).
    double ell = 3.0;
    Configuration c = build_configuration(2, ell);
    PrecisionGuard guard(bits_for_distance(3 * ell));
    Mat h = c.word_isometry(parse_word("a2+ b2+"));
    Geodesic moved = c.axis(1, 0).transformed(h);
    double expect = std::acosh(std::cosh(ell) * std::cosh(ell * golden_ratio()));
    CHECK(d(common_perpendicular(c.axis(1, 0), moved).length) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("validation: default configuration passes at depth 3") {
    for (int n : {1, 2}) {
        ValidationReport rep = validate_configuration(build_configuration(n), 3);
        CHECK(rep.passed);
        CHECK(rep.min_separation >= 3 * constant_L());
        CHECK(!rep.violation.has_value());
        CHECK(rep.depth == 3);
    }
}

TEST_CASE("validation: short translations violate separation and name the word") {
    Configuration c = build_configuration(2, 0.1);
    try {
        validate_configuration(c, 2);
        FAIL("expected SeparationViolation");
    } catch (const ValidationError& e) {
        CHECK(e.code() == ErrorCode::SeparationViolation);
        CHECK(!e.report().passed);
        CHECK(e.report().min_separation < 3 * constant_L());
        CHECK(!e.report().min_word.empty());
        CHECK(std::string(e.what()).find(e.report().min_word) != std::string::npos);
    }
    ValidationReport rep = inspect_configuration(c, 2);
    CHECK(!rep.passed);
    CHECK(rep.min_separation == doctest::Approx(0.1).epsilon(1e-9));
    CHECK_THROWS_AS(inspect_configuration(c, 0), Error);
}

TEST_CASE("validation is invariant under a change of frame") {
    std::mt19937_64 rng(32);
    Configuration c = build_configuration(2);
    Configuration q = c.conjugated(random_isometry(rng, 4, 0.7));
    ValidationReport a = inspect_configuration(c, 2), b = inspect_configuration(q, 2);
    CHECK(b.passed);
    CHECK(b.min_separation == doctest::Approx(a.min_separation).epsilon(1e-9));
    CHECK(b.orthogonality_residual < 1e-9);
}

TEST_CASE("word isometry equals the letter product; free cancellation does not change it") {
    // Translations along axes of different factors do not commute, so only
    // free reduction preserves the letter product. The isometry of a group
    // element is the letter product of its normal form.
    Configuration c = build_configuration(2, 2.0);
    PrecisionGuard guard(bits_for_distance(12 * c.max_letter_length()));
    std::mt19937_64 rng(33);
    std::uniform_int_distribution<int> fac(1, 2), gen(0, 1), sgn(0, 1), len(1, 6);
    for (int k = 0; k < 500; ++k) {
        Word w;
        int l = len(rng);
        for (int i = 0; i < l; ++i) w.push_back(Letter{fac(rng), gen(rng), sgn(rng) ? 1 : -1});
        Mat direct = Mat::Identity(5, 5);
        for (const Letter& x : w) direct = direct * c.letter(x);
        double scale = d(direct.cwiseAbs().maxCoeff());
        CHECK(d((c.word_isometry(w) - direct).cwiseAbs().maxCoeff()) <= 1e-8 * scale);
        CHECK(d((c.word_isometry(free_reduce(w)) - direct).cwiseAbs().maxCoeff()) <= 1e-8 * scale);
        Mat e = c.element_isometry(w);
        CHECK(d((c.element_isometry(reduce(w)) - e).cwiseAbs().maxCoeff()) == 0.0);
    }
    // The commutator of two factors is trivial as a group element but not as a letter product.
    Word comm = parse_word("a1+ b2+ a1- b2-");
    CHECK(reduce(comm).empty());
    CHECK(d((c.element_isometry(comm) - Mat::Identity(5, 5)).cwiseAbs().maxCoeff()) == 0.0);
    CHECK(d((c.word_isometry(comm) - Mat::Identity(5, 5)).cwiseAbs().maxCoeff()) > 1e-3);
    CHECK(c.word_length_bound(parse_word("a1+ b2-")) == doctest::Approx(2.0 + 2.0 * golden_ratio()));
}
