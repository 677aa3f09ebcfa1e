#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cpr/evolution.hpp"
#include "cpr/mcsim.hpp"
#include "doctest.h"

using namespace cpr;

namespace {

CprSystem irsa(double G, int d) {
    return CprSystem::single(G, DegreeDistribution::regular(d),
                             SuccessModel::slotted_aloha());
}

// A single-stage instance with one receiver block and hand-placed users.
PeelingInstance manual_instance(int D, int num_receivers, int K) {
    PeelingInstance inst;
    inst.T = num_receivers;
    inst.L = 1;
    inst.w = 1;
    inst.K = K;
    inst.receiver_class.assign(num_receivers, 0);
    inst.receiver_stage.assign(num_receivers, 0);
    inst.receiver_phi_D.assign(num_receivers, D);
    inst.receiver_contents.assign(num_receivers, {});
    inst.receiver_decoded.assign(num_receivers, std::vector<long long>(K, 0));
    return inst;
}

void add_user(PeelingInstance& inst, int cls, std::vector<int> copies) {
    SimUser u;
    u.cls = cls;
    u.degree = static_cast<int>(copies.size());
    u.copies = copies;
    int uid = static_cast<int>(inst.users.size());
    for (int r : copies) inst.receiver_contents[r].push_back(uid);
    inst.users.push_back(std::move(u));
}

}  // namespace

TEST_CASE("two-fold receiver decodes at most two packets") {
    PeelingInstance two = manual_instance(2, 1, 1);
    add_user(two, 0, {0});
    add_user(two, 0, {0});
    peel(two);
    CHECK(two.users[0].decoded);
    CHECK(two.users[1].decoded);
    CHECK(two.receiver_decoded[0][0] == 2);
    CHECK(check_decoded_in_capacity(two) == -1);

    PeelingInstance three = manual_instance(2, 1, 1);
    add_user(three, 0, {0});
    add_user(three, 0, {0});
    add_user(three, 0, {0});
    peel(three);
    CHECK(!three.users[0].decoded);
    CHECK(!three.users[1].decoded);
    CHECK(!three.users[2].decoded);
    CHECK(three.receiver_decoded[0][0] == 0);
}

TEST_CASE("cancellation chains propagate across rounds") {
    // Receiver 0 holds only user A; decoding A unblocks user B at receiver 1.
    PeelingInstance inst = manual_instance(1, 2, 1);
    add_user(inst, 0, {0, 1});
    add_user(inst, 0, {1});
    int rounds = peel(inst);
    CHECK(rounds == 2);
    CHECK(inst.users[0].decoded);
    CHECK(inst.users[1].decoded);
    CHECK(inst.receiver_decoded[0][0] == 1);
    CHECK(inst.receiver_decoded[1][0] == 1);
    CHECK(check_decoded_in_capacity(inst) == -1);
}

TEST_CASE("near-far receiver decodes one of each class") {
    PeelingInstance inst = manual_instance(-1, 2, 2);
    add_user(inst, 0, {0});
    add_user(inst, 1, {0});
    add_user(inst, 0, {1});
    add_user(inst, 0, {1});
    peel(inst);
    CHECK(inst.users[0].decoded);
    CHECK(inst.users[1].decoded);
    CHECK(!inst.users[2].decoded);  // two same-class packets collide
    CHECK(!inst.users[3].decoded);
    CHECK(check_decoded_in_capacity(inst) == -1);
}

TEST_CASE("capacity check flags an impossible decode record") {
    PeelingInstance inst = manual_instance(2, 2, 1);
    inst.receiver_decoded[1][0] = 3;
    CHECK(check_decoded_in_capacity(inst) == 1);
}

TEST_CASE("instance construction is deterministic in the seed") {
    CprSystem sys = irsa(0.6, 3);
    PeelingInstance a = build_instance(sys, 500, 42);
    PeelingInstance b = build_instance(sys, 500, 42);
    REQUIRE(a.users.size() == b.users.size());
    for (size_t i = 0; i < a.users.size(); ++i) {
        CHECK(a.users[i].copies == b.users[i].copies);
        CHECK(a.users[i].cls == b.users[i].cls);
    }
    PeelingInstance c = build_instance(sys, 500, 43);
    bool same = a.users.size() == c.users.size();
    if (same)
        for (size_t i = 0; i < a.users.size() && same; ++i)
            same = a.users[i].copies == c.users[i].copies;
    CHECK(!same);
}

TEST_CASE("sampled degrees follow the distribution") {
    DegreeDistribution mixed({{2, 0.5102}, {4, 0.4898}});
    CprSystem sys = CprSystem::single(0.8, mixed, SuccessModel::slotted_aloha());
    PeelingInstance inst = build_instance(sys, 20000, 7);
    long long twos = 0;
    for (const SimUser& u : inst.users) {
        CHECK((u.degree == 2 || u.degree == 4));
        CHECK(u.copies.size() == static_cast<size_t>(u.degree));
        if (u.degree == 2) ++twos;
    }
    double frac = static_cast<double>(twos) / inst.users.size();
    CHECK(frac == doctest::Approx(0.5102).epsilon(0.05));
}

TEST_CASE("peeling outcome is order independent") {
    CcprSystem sys = CcprSystem::punctured(irsa(0.85, 3), 8, 2);
    PeelingInstance base = build_instance(sys, 400, 99);
    PeelingInstance synchronous = base;
    peel(synchronous);
    std::vector<char> want;
    for (const SimUser& u : synchronous.users) want.push_back(u.decoded ? 1 : 0);

    std::mt19937_64 rng(123);
    std::vector<int> order(base.receiver_contents.size());
    std::iota(order.begin(), order.end(), 0);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(order.begin(), order.end(), rng);
        PeelingInstance copy = base;
        peel_sequential(copy, order);
        for (size_t i = 0; i < copy.users.size(); ++i)
            CHECK(static_cast<char>(copy.users[i].decoded) == want[i]);
        CHECK(check_decoded_in_capacity(copy) == -1);
    }
}

TEST_CASE("every decode record stays in the receiver capacity region") {
    CcprSystem sys = CcprSystem::punctured(irsa(0.9, 3), 10, 2);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        PeelingInstance inst = build_instance(sys, 300, seed);
        peel(inst);
        CHECK(check_decoded_in_capacity(inst) == -1);
    }
    // Near-far system.
    CprSystem nf;
    nf.G = {0.4, 0.4};
    nf.degree = {DegreeDistribution::regular(3), DegreeDistribution::regular(3)};
    nf.routing = {{1.0}, {1.0}};
    nf.partition = {1.0};
    nf.success = {SuccessModel::near_far()};
    PeelingInstance inst = build_instance(nf, 500, 5);
    peel(inst);
    CHECK(check_decoded_in_capacity(inst) == -1);
}

TEST_CASE("simulation tracks density evolution in the stable regime") {
    CprSystem sys = irsa(0.5, 3);
    SimResult res = simulate(sys, 10000, 5, 2024);
    EvolutionTrace de = cpr_evolve(sys);
    double predicted = de.final_success[0][0];
    CHECK(predicted == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(res.success_rate[0] - predicted) < 3.0 * res.std_err[0] + 0.01);
    CHECK(res.users_total[0] > 0);
    CHECK(res.users_decoded[0] <= res.users_total[0]);
}

TEST_CASE("simulated success degrades past the threshold") {
    SimResult good = simulate(irsa(0.78, 3), 4000, 3, 11);
    SimResult bad = simulate(irsa(0.95, 3), 4000, 3, 11);
    CHECK(good.success_rate[0] > 0.95);
    CHECK(bad.success_rate[0] < 0.6);
}

TEST_CASE("finite size gap shrinks with the instance size") {
    // Above the threshold the empirical rate approaches the unstable fixed
    // point as T grows.
    CprSystem sys = irsa(0.9, 3);
    EvolutionTrace de = cpr_evolve(sys);
    double predicted = de.final_success[0][0];
    SimResult small = simulate(sys, 500, 40, 31);
    SimResult large = simulate(sys, 50000, 2, 31);
    double err_small = std::abs(small.success_rate[0] - predicted);
    double err_large = std::abs(large.success_rate[0] - predicted);
    CHECK(err_large < err_small);
}
