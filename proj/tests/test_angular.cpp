#include "doctest.h"

#include "tempocont/angular.hpp"
#include "tempocont/error.hpp"
#include "tempocont/random.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace tempocont;

TEST_CASE("encode axis cases") {
    const auto e0 = encode(0.0);
    CHECK(e0.c == 1.0);
    CHECK(e0.s == 0.0);
    const auto e1 = encode(kPi / 2);
    CHECK(std::abs(e1.c) < 1e-15);
    CHECK(e1.s == 1.0);
    const auto e2 = encode(kPi);
    CHECK(e2.c == -1.0);
    CHECK(std::abs(e2.s) < 1e-15);
}

TEST_CASE("encode is unit norm and rejects non-finite input") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const auto e = encode(rng.uniform(-50.0, 50.0));
        CHECK(std::abs(e.c * e.c + e.s * e.s - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(encode(std::numeric_limits<double>::quiet_NaN()), InvalidArgument);
    CHECK_THROWS_AS(encode(std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST_CASE("decode examples") {
    CHECK(decode({1.0, 0.0}) == 0.0);
    CHECK(std::abs(decode({0.0, -2.0}) + kPi / 2) < 1e-15);
    CHECK(std::abs(decode(encode(2.5)) - 2.5) < 1e-12);
    CHECK(decode({-1.0, 0.0}) == kPi);
    CHECK(decode({-1.0, -0.0}) == kPi);  // range is (-pi, pi]
}

TEST_CASE("decode errors") {
    CHECK_THROWS_AS(decode({0.0, 0.0}), DegenerateEncoding);
    CHECK_THROWS_AS(decode({1e-13, -1e-13}), DegenerateEncoding);
    CHECK_THROWS_AS(decode({std::nan(""), 1.0}), InvalidArgument);
    CHECK_NOTHROW(decode({1e-11, 0.0}));
}

TEST_CASE("property: decode(encode(theta)) round trip over 1e4 angles") {
    Rng rng(17);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double theta = rng.uniform(-kPi, kPi);
        if (theta == -kPi) theta = kPi;
        worst = std::max(worst, std::abs(decode(encode(theta)) - theta));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("property: decode is invariant to positive scaling") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const HeadingEncoding e{rng.normal(), rng.normal()};
        const double k = std::exp(rng.uniform(-10.0, 10.0));
        CHECK(std::abs(decode({k * e.c, k * e.s}) - decode(e)) < 1e-12);
    }
}

TEST_CASE("angle_diff examples") {
    CHECK(std::abs(angle_diff(kPi - 0.01, -kPi + 0.01) - 0.02) < 1e-12);
    CHECK(angle_diff(1.234, 1.234) == 0.0);
    CHECK(angle_diff(-3.0, -3.0) == 0.0);
    CHECK(std::abs(angle_diff(0.3, -0.2) - 0.5) < 1e-15);
    CHECK_THROWS_AS(angle_diff(std::nan(""), 0.0), InvalidArgument);
}

TEST_CASE("property: angle_diff symmetric, bounded, 2*pi*k invariant") {
    Rng rng(8);
    for (int i = 0; i < 2000; ++i) {
        const double a = rng.uniform(-10.0, 10.0);
        const double b = rng.uniform(-10.0, 10.0);
        const double d = angle_diff(a, b);
        CHECK(d >= 0.0);
        CHECK(d <= kPi);
        CHECK(d == angle_diff(b, a));
        const int k = static_cast<int>(rng.index(7)) - 3;
        CHECK(std::abs(angle_diff(a + 2.0 * kPi * k, b) - d) < 1e-9);
    }
}

TEST_CASE("wrap_angle range") {
    CHECK(wrap_angle(kPi) == kPi);
    CHECK(wrap_angle(-kPi) == kPi);
    CHECK(std::abs(wrap_angle(3 * kPi / 2) + kPi / 2) < 1e-15);
    Rng rng(4);
    for (int i = 0; i < 1000; ++i) {
        const double w = wrap_angle(rng.uniform(-100.0, 100.0));
        CHECK(w > -kPi);
        CHECK(w <= kPi);
    }
}

TEST_CASE("evaluate identity and maximal error") {
    Rng rng(10);
    std::vector<HeadingEncoding> labels, flipped;
    for (int i = 0; i < 50; ++i) {
        const double t = rng.uniform(-kPi, kPi);
        labels.push_back(encode(t));
        flipped.push_back(encode(t + kPi));
    }
    const auto same = evaluate(labels, labels);
    CHECK(same.mse == 0.0);
    CHECK(same.mean_angle_diff == 0.0);
    CHECK(same.accuracy == 1.0);
    CHECK(same.n_samples == 50);
    const auto worst = evaluate(flipped, labels);
    CHECK(worst.accuracy == 0.0);
    CHECK(worst.mean_angle_diff == doctest::Approx(kPi).epsilon(1e-12));
}

TEST_CASE("evaluate on four hand-built samples matches a per-sample recount") {
    // errors of 0.1 and 0.3 rad are correct, 0.5 and 2.0 rad are not
    const std::vector<double> truth{0.0, 1.0, -2.0, 3.0};
    const std::vector<double> offsets{0.1, -0.3, 0.5, 2.0};
    std::vector<HeadingEncoding> labels, preds;
    for (std::size_t i = 0; i < 4; ++i) {
        labels.push_back(encode(truth[i]));
        const double scale = 0.5 + static_cast<double>(i);  // raw outputs are not unit norm
        const auto e = encode(truth[i] + offsets[i]);
        preds.push_back({scale * e.c, scale * e.s});
    }
    double mse = 0.0, diff = 0.0;
    int correct = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        mse += std::pow(preds[i].c - labels[i].c, 2) + std::pow(preds[i].s - labels[i].s, 2);
        const double a = std::atan2(preds[i].s, preds[i].c);
        const double b = std::atan2(labels[i].s, labels[i].c);
        double d = std::fmod(std::abs(a - b), 2 * kPi);
        if (d > kPi) d = 2 * kPi - d;
        diff += d;
        if (d < kPi / 8) ++correct;
    }
    const auto r = evaluate(preds, labels);
    CHECK(r.accuracy == 0.5);
    CHECK(correct == 2);
    CHECK(r.mse == doctest::Approx(mse / 4).epsilon(1e-14));
    CHECK(r.mean_angle_diff == doctest::Approx(diff / 4).epsilon(1e-12));
    CHECK(r.mean_angle_diff == doctest::Approx((0.1 + 0.3 + 0.5 + 2.0) / 4).epsilon(1e-12));
}

TEST_CASE("property: evaluate equals a naive per-sample loop bit for bit") {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1 + rng.index(40);
        std::vector<HeadingEncoding> p, l;
        for (std::size_t i = 0; i < n; ++i) {
            p.push_back({rng.normal(), rng.normal()});
            l.push_back(encode(rng.uniform(-kPi, kPi)));
        }
        double mse = 0.0, diff = 0.0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dc = p[i].c - l[i].c, ds = p[i].s - l[i].s;
            mse += dc * dc + ds * ds;
            const double d = angle_diff(decode(p[i]), decode(l[i]));
            diff += d;
            if (d < kAccuracyThreshold) ++correct;
        }
        const auto r = evaluate(p, l);
        CHECK(r.mse == mse / static_cast<double>(n));
        CHECK(r.mean_angle_diff == diff / static_cast<double>(n));
        CHECK(r.accuracy == static_cast<double>(correct) / static_cast<double>(n));
        const auto m = evaluate(to_matrix(p), to_matrix(l));
        CHECK(m.mse == r.mse);
        CHECK(m.mean_angle_diff == r.mean_angle_diff);
        CHECK(m.accuracy == r.accuracy);
    }
}

TEST_CASE("accuracy threshold is strict") {
    // nudge the sine until the decoded angle lands exactly on pi/8
    const HeadingEncoding label{1.0, 0.0};
    HeadingEncoding pred = encode(kAccuracyThreshold);
    for (int k = 0; k < 64 && decode(pred) != kAccuracyThreshold; ++k)
        pred.s = std::nextafter(pred.s, decode(pred) < kAccuracyThreshold ? 1.0 : 0.0);
    REQUIRE(angle_diff(decode(pred), decode(label)) == kAccuracyThreshold);
    const std::vector<HeadingEncoding> p{pred}, l{label};
    CHECK(evaluate(p, l).accuracy == 0.0);
}

TEST_CASE("evaluate errors") {
    const std::vector<HeadingEncoding> one{{1.0, 0.0}}, two{{1.0, 0.0}, {0.0, 1.0}}, none;
    CHECK_THROWS_AS(evaluate(one, two), InvalidArgument);
    CHECK_THROWS_AS(evaluate(none, none), InvalidArgument);
    const std::vector<HeadingEncoding> zero{{0.0, 0.0}};
    CHECK_THROWS_AS(evaluate(zero, one), DegenerateEncoding);
}

TEST_CASE("evaluate_lenient counts degenerate predictions as wrong") {
    const std::vector<HeadingEncoding> p{{0.0, 0.0}, {1.0, 0.0}};
    const std::vector<HeadingEncoding> l{{1.0, 0.0}, {1.0, 0.0}};
    const auto r = evaluate_lenient(p, l);
    CHECK(r.n_degenerate == 1);
    CHECK(r.degenerate());
    CHECK(r.accuracy == 0.5);
    CHECK(r.mean_angle_diff == doctest::Approx(kPi / 2));
    CHECK(r.mse == doctest::Approx(0.5));
}
