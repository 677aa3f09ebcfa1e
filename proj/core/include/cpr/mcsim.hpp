#ifndef CPR_MCSIM_HPP
#define CPR_MCSIM_HPP

#include <cstdint>
#include <vector>

#include "cpr/system.hpp"

namespace cpr {

struct SimUser {
    int cls = 0;
    int stage = 0;
    int degree = 0;
    std::vector<int> copies;  // receiver ids holding one copy each
    bool decoded = false;
};

/// One sampled bipartite decoding instance. Receivers are numbered globally
/// across stages; `receiver_phi_D` holds the receiver's decoding rule (D >= 1
/// for a D-fold receiver, -1 for near-far).
struct PeelingInstance {
    int T = 0;
    int L = 1;
    int w = 1;
    int K = 1;
    std::uint64_t seed = 0;
    std::vector<int> receiver_class;
    std::vector<int> receiver_stage;
    std::vector<int> receiver_phi_D;
    std::vector<std::vector<int>> receiver_contents;  // undecoded copy user ids
    std::vector<SimUser> users;
    /// Per-receiver per-class counts of packets the receiver itself decoded,
    /// accumulated over peeling rounds.
    std::vector<std::vector<long long>> receiver_decoded;
};

/// Samples an instance: class-k user counts per stage are
/// Poisson(G_k^{(l)} T), degrees follow the class degree distribution, each
/// copy picks a stage uniformly in the window, a receiver class from the
/// routing row, and a receiver uniformly within that class and stage.
PeelingInstance build_instance(const CcprSystem& system, int T, std::uint64_t seed);
PeelingInstance build_instance(const CprSystem& system, int T, std::uint64_t seed);

/// Synchronous SIC peeling: each round every receiver applies its phi rule to
/// its current contents (mark phase), then all newly decoded users' copies
/// are removed everywhere (sweep phase). Returns the number of rounds.
int peel(PeelingInstance& instance);

/// Sequential peeling variant: receivers are processed one at a time in the
/// given order with immediate copy removal, repeated until a full pass makes
/// no progress. With a monotone all-or-nothing phi this reaches the same
/// fixed point as `peel`, which is what the order-independence test checks.
int peel_sequential(PeelingInstance& instance, const std::vector<int>& receiver_order);

/// Verifies that every receiver's accumulated decoded vector y satisfies
/// phi(y) = y. Returns the offending receiver id, or -1 if all pass.
int check_decoded_in_capacity(const PeelingInstance& instance);

struct SimResult {
    std::vector<double> success_rate;  // per user class
    std::vector<double> std_err;       // binomial standard error
    std::vector<long long> users_total;
    std::vector<long long> users_decoded;
    std::uint64_t seed = 0;
    int rounds = 0;
};

/// Runs `rounds` independent instances and aggregates per-class decode
/// fractions. Instance i uses a seed derived from (seed, i), so results do
/// not depend on scheduling.
SimResult simulate(const CcprSystem& system, int T, int rounds, std::uint64_t seed);
SimResult simulate(const CprSystem& system, int T, int rounds, std::uint64_t seed);

}  // namespace cpr

#endif
