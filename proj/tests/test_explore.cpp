#include <cmath>
#include <stdexcept>

#include "cpr/explore.hpp"
#include "doctest.h"

using namespace cpr;

TEST_CASE("threshold scan on the base system") {
    DegreeDistribution d3 = DegreeDistribution::regular(3);
    EvolveOptions opts;
    StabilityClassifier c =
        make_single_class_classifier(d3, SuccessModel::slotted_aloha(), 1, 1, opts);
    ThresholdResult r = find_threshold(c, 0.5, 0.9, 1e-3);
    CHECK(r.G_star == doctest::Approx(0.8184).epsilon(2e-3));
    CHECK(r.step == doctest::Approx(1e-3));
    // Rounded to 4 decimals.
    CHECK(std::abs(r.G_star * 10000.0 - std::round(r.G_star * 10000.0)) < 1e-9);
    // The recorded classifications are monotone consistent.
    double max_stable = 0.0, min_unstable = 1e9;
    for (auto [g, stable] : r.classifications) {
        if (stable)
            max_stable = std::max(max_stable, g);
        else
            min_unstable = std::min(min_unstable, g);
    }
    CHECK(max_stable < min_unstable);
}

TEST_CASE("hierarchical scan equals a flat scan") {
    DegreeDistribution d3 = DegreeDistribution::regular(3);
    EvolveOptions opts;
    StabilityClassifier c =
        make_single_class_classifier(d3, SuccessModel::slotted_aloha(), 1, 1, opts);
    double step = 1e-3, lo = 0.5, hi = 0.9;
    ThresholdResult r = find_threshold(c, lo, hi, step);
    // Flat ascending scan at the same resolution.
    double flat = lo;
    int n = static_cast<int>(std::round((hi - lo) / step));
    for (int i = 1; i <= n; ++i) {
        double g = lo + i * step;
        if (!c(g)) break;
        flat = g;
    }
    CHECK(r.G_star == doctest::Approx(std::round(flat * 10000.0) / 10000.0).epsilon(1e-12));
}

TEST_CASE("threshold scan error paths") {
    StabilityClassifier never = [](double) { return false; };
    CHECK_THROWS_AS(find_threshold(never, 0.5, 0.9, 1e-2), std::runtime_error);
    StabilityClassifier always = [](double) { return true; };
    CHECK_THROWS_AS(find_threshold(always, 0.5, 0.9, 1e-2), std::runtime_error);
}

TEST_CASE("bisection agrees with the scan") {
    DegreeDistribution d4 = DegreeDistribution::regular(4);
    EvolveOptions opts;
    StabilityClassifier c =
        make_single_class_classifier(d4, SuccessModel::slotted_aloha(), 1, 1, opts);
    double bis = bisection_threshold(c, 0.5, 0.9, 1e-5);
    CHECK(bis == doctest::Approx(0.7722).epsilon(1e-3));
}

TEST_CASE("coupled classifier saturates toward the potential threshold") {
    DegreeDistribution d3 = DegreeDistribution::regular(3);
    EvolveOptions opts;
    opts.max_iter = 10000;
    StabilityClassifier c =
        make_single_class_classifier(d3, SuccessModel::slotted_aloha(), 2, 40, opts);
    CHECK(c(0.90));
    CHECK(!c(0.93));
}

TEST_CASE("two class system construction") {
    DegreeDistribution d1 = DegreeDistribution::regular(5);
    DegreeDistribution d2({{2, 0.5102}, {4, 0.4898}});
    CprSystem share = make_two_class_system(TwoClassPolicy::CompleteSharing, 0.3, 0.2, d1, d2);
    share.validate();
    CHECK(share.K() == 2);
    CHECK(share.J() == 2);
    CHECK(share.partition[0] == doctest::Approx(0.5));
    CHECK(share.routing[0][0] == doctest::Approx(0.5));
    CHECK(share.routing[1][0] == doctest::Approx(0.5));
    CprSystem res = make_two_class_system(TwoClassPolicy::ReceiverReservation, 0.3, 0.2, d1, d2);
    res.validate();
    CHECK(res.routing[1][0] == doctest::Approx(0.0));
    CHECK(res.routing[1][1] == doctest::Approx(1.0));
}

TEST_CASE("region boundary sweep") {
    DegreeDistribution d1 = DegreeDistribution::regular(5);
    DegreeDistribution d2({{2, 0.5102}, {4, 0.4898}});
    EvolveOptions opts;
    opts.max_iter = 2000;
    RegionBoundary r1 = region_boundary_2d(TwoClassPolicy::CompleteSharing, d1, d2, 1, 16, 0.1,
                                           opts, 2, 1.01, 1.01);
    RegionBoundary r2 = region_boundary_2d(TwoClassPolicy::CompleteSharing, d1, d2, 2, 16, 0.1,
                                           opts, 2, 1.01, 1.01);
    REQUIRE(!r1.points.empty());
    REQUIRE(!r2.points.empty());
    // Wider windows only enlarge the region.
    CHECK(r2.points.size() >= r1.points.size());
    for (size_t i = 0; i < r1.points.size(); ++i) {
        CHECK(r2.points[i].first == doctest::Approx(r1.points[i].first));
        CHECK(r2.points[i].second >= r1.points[i].second - 1e-12);
    }
    // Every boundary point respects the outer bound curve.
    REQUIRE(r1.bound_curve.size() >= r1.points.size());
    for (size_t i = 0; i < r1.points.size(); ++i)
        CHECK(r1.points[i].second <= r1.bound_curve[i].second + 1e-9);

    // Scheduling independence: same sweep on one worker.
    RegionBoundary serial = region_boundary_2d(TwoClassPolicy::CompleteSharing, d1, d2, 1, 16,
                                               0.1, opts, 1, 1.01, 1.01);
    REQUIRE(serial.points.size() == r1.points.size());
    for (size_t i = 0; i < r1.points.size(); ++i) {
        CHECK(serial.points[i].first == r1.points[i].first);
        CHECK(serial.points[i].second == r1.points[i].second);
    }
}
