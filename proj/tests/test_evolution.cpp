#include <cmath>
#include <stdexcept>
#include <vector>

#include "cpr/evolution.hpp"
#include "doctest.h"

using namespace cpr;

namespace {

CprSystem irsa(double G, int d) {
    return CprSystem::single(G, DegreeDistribution::regular(d),
                             SuccessModel::slotted_aloha());
}

}  // namespace

TEST_CASE("zero load decodes in one step") {
    EvolutionTrace t = cpr_evolve(irsa(0.0, 3));
    CHECK(t.converged);
    CHECK(is_stable(t));
    CHECK(t.final_q[0][0] == doctest::Approx(0.0));
    CHECK(t.final_success[0][0] == doctest::Approx(1.0));
}

TEST_CASE("base recursion stability regimes") {
    EvolutionTrace stable = cpr_evolve(irsa(0.80, 3));
    CHECK(stable.converged);
    CHECK(is_stable(stable));

    EvolutionTrace unstable = cpr_evolve(irsa(0.95, 3));
    CHECK(unstable.converged);
    CHECK(!is_stable(unstable));
    CHECK(unstable.final_q[0][0] > 0.1);
    // Fixed point consistency: q = lambda(p) and the recursion is satisfied.
    double q = unstable.final_q[0][0];
    double p = unstable.final_p[0][0];
    DegreeDistribution d3 = DegreeDistribution::regular(3);
    CHECK(d3.edge_gf(p) == doctest::Approx(q).epsilon(1e-8));
    double rho = 0.95 * 3.0 * q;
    CHECK(d3.edge_gf(1.0 - std::exp(-rho)) == doctest::Approx(q).epsilon(1e-6));
}

TEST_CASE("iterates are monotone non-increasing") {
    EvolveOptions opts;
    opts.record_history = true;
    opts.max_iter = 500;
    EvolutionTrace t = cpr_evolve(irsa(0.9, 4), opts);
    for (size_t i = 1; i < t.history.size(); ++i)
        CHECK(t.history[i][0][0] <= t.history[i - 1][0][0] + 1e-14);
}

TEST_CASE("uniform circular coupling reproduces the base recursion") {
    EvolveOptions opts;
    opts.record_history = true;
    opts.max_iter = 400;
    CprSystem base = irsa(0.85, 3);
    EvolutionTrace tb = cpr_evolve(base, opts);
    for (int w : {1, 2, 3}) {
        CcprSystem sys = CcprSystem::circular(base, 12, w);
        EvolutionTrace tc = ccpr_evolve(sys, opts);
        REQUIRE(tc.history.size() == tb.history.size());
        for (size_t i = 0; i < tb.history.size(); ++i)
            for (int l = 0; l < 12; ++l)
                CHECK(tc.history[i][0][l] == doctest::Approx(tb.history[i][0][0]).epsilon(1e-12));
    }
}

TEST_CASE("window of one decouples the stages") {
    CprSystem base = irsa(0.9, 3);
    CcprSystem sys = CcprSystem::punctured(base, 8, 1);
    // w=1 punctured zeroes no stages, so every stage runs the base recursion.
    EvolutionTrace tc = ccpr_evolve(sys);
    EvolutionTrace tb = cpr_evolve(base);
    for (int l = 0; l < 8; ++l)
        CHECK(tc.final_q[0][l] == doctest::Approx(tb.final_q[0][0]).epsilon(1e-10));
}

TEST_CASE("specialized convolutional path matches the general recursion") {
    for (double G : {0.85, 0.93}) {
        for (int w : {1, 2, 3}) {
            int L = 20;
            CprSystem base = irsa(G, 3);
            EvolveOptions opts;
            opts.max_iter = 5000;
            EvolutionTrace general =
                w == 1 ? cpr_evolve(base, opts)
                       : ccpr_evolve(CcprSystem::punctured(base, L, w), opts);
            EvolutionTrace fast = convolutional_irsa_evolve(G, 3, w, L, opts);
            REQUIRE(fast.final_q[0].size() == general.final_q[0].size());
            for (size_t l = 0; l < general.final_q[0].size(); ++l)
                CHECK(fast.final_q[0][l] ==
                      doctest::Approx(general.final_q[0][l]).epsilon(1e-12));
            CHECK(fast.iterations_used == general.iterations_used);
        }
    }
}

TEST_CASE("puncturing moves the threshold past the base one") {
    // d=3: base threshold is near 0.818; the w=2, L=40 coupled system decodes
    // at 0.91 but not at 0.93.
    EvolveOptions opts;
    opts.max_iter = 20000;
    CcprSystem good = CcprSystem::punctured(irsa(0.91, 3), 40, 2);
    CHECK(is_stable(ccpr_evolve(good, opts)));
    CcprSystem bad = CcprSystem::punctured(irsa(0.93, 3), 40, 2);
    CHECK(!is_stable(ccpr_evolve(bad, opts)));
    // The base system is already unstable at both loads.
    CHECK(!is_stable(cpr_evolve(irsa(0.91, 3), opts)));
}

TEST_CASE("one-sided recursion shape") {
    CcprSystem sys = CcprSystem::punctured(irsa(0.93, 3), 40, 3);
    EvolveOptions one;
    one.max_iter = 1;
    EvolutionTrace first = one_sided_evolve(sys, one);
    double cap = 1.0 - std::exp(-0.93 * 3.0);
    for (double p : first.final_p[0]) CHECK(p <= cap + 1e-12);

    EvolveOptions opts;
    opts.max_iter = 20000;
    EvolutionTrace t = one_sided_evolve(sys, opts);
    const std::vector<double>& p = t.final_p[0];
    // Non-decreasing in the stage index, constant past the boundary stage.
    for (size_t l = 1; l < p.size(); ++l) CHECK(p[l] >= p[l - 1] - 1e-12);
    int Lt = 40 - 3 + 1;
    for (int l = Lt - 1; l < 40; ++l) CHECK(p[l] == doctest::Approx(p[Lt - 1]).epsilon(1e-14));
}

TEST_CASE("one-sided fixed point dominates the punctured system") {
    for (double G : {0.85, 0.93}) {
        for (int w : {2, 3, 4}) {
            int L = 40, Lt = L - w + 1;
            CcprSystem sys = CcprSystem::punctured(irsa(G, 3), L, w);
            EvolveOptions opts;
            opts.max_iter = 30000;
            EvolutionTrace tp = ccpr_evolve(sys, opts);
            EvolutionTrace ts = one_sided_evolve(sys, opts);
            for (int m = 0; m < Lt; ++m)
                CHECK(tp.final_p[0][m] <= ts.final_p[0][m + w - 1] + 1e-6);
        }
    }
}

TEST_CASE("stage load validation") {
    CprSystem base = irsa(0.8, 3);
    CcprSystem sys = CcprSystem::punctured(base, 10, 3);
    sys.stage_loads[9][0] = 0.8;  // punctured stages must stay empty
    CHECK_THROWS_AS(sys.validate(), std::invalid_argument);

    CcprSystem bad_w = CcprSystem::circular(base, 4, 1);
    bad_w.w = 5;
    CHECK_THROWS_AS(bad_w.validate(), std::invalid_argument);

    CcprSystem bad_shape = CcprSystem::circular(base, 4, 2);
    bad_shape.stage_loads.pop_back();
    CHECK_THROWS_AS(bad_shape.validate(), std::invalid_argument);

    EvolveOptions bad_tol;
    bad_tol.tol = 0.0;
    CHECK_THROWS_AS(cpr_evolve(base, bad_tol), std::invalid_argument);
}

TEST_CASE("probe and stability helpers") {
    CcprSystem sys = CcprSystem::punctured(irsa(0.5, 3), 10, 2);
    EvolutionTrace t = ccpr_evolve(sys);
    CHECK(probe_q(t, 0, 4) == t.final_q[0][4]);
    CHECK(is_stable(t, 1e-5));
    CHECK(!is_stable(t, 0.0));
}
