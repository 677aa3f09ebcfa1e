#include "cpr/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace cpr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int phi_code_for(const SuccessModel& model, std::mt19937_64& rng) {
    switch (model.kind()) {
        case SuccessModel::Kind::SlottedAloha:
            return 1;
        case SuccessModel::Kind::DFold:
            return model.dfold_D();
        case SuccessModel::Kind::DFoldMixture: {
            const auto& w = model.mixture_weights();
            std::discrete_distribution<int> pick(w.begin(), w.end());
            return pick(rng) + 1;
        }
        case SuccessModel::Kind::NearFar:
            return -1;
    }
    throw std::logic_error("unreachable");
}

std::vector<long long> contents_counts(const PeelingInstance& inst, int r) {
    std::vector<long long> n(inst.K, 0);
    for (int uid : inst.receiver_contents[r]) ++n[inst.users[uid].cls];
    return n;
}

/// phi applied to a count vector for the receiver's rule.
bool decodes_fully(const PeelingInstance& inst, int r, const std::vector<long long>& n) {
    long long total = 0;
    for (long long v : n) total += v;
    if (total == 0) return false;
    int code = inst.receiver_phi_D[r];
    if (code > 0) return total <= code;
    return n[0] <= 1 && n[1] <= 1;
}

void remove_user_copies(PeelingInstance& inst, int uid) {
    for (int r : inst.users[uid].copies) {
        auto& c = inst.receiver_contents[r];
        c.erase(std::remove(c.begin(), c.end(), uid), c.end());
    }
}

int sample_degree(const DegreeDistribution& dist, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    double cum = 0.0;
    int last = 0;
    for (const auto& [d, c] : dist.coeffs()) {
        cum += c;
        last = d;
        if (u <= cum) return d;
    }
    return last;
}

}  // namespace

PeelingInstance build_instance(const CcprSystem& system, int T, std::uint64_t seed) {
    system.validate();
    if (T < 1) throw std::invalid_argument("need at least one receiver per stage");
    const CprSystem& base = system.base;
    const int K = base.K();
    const int J = base.J();
    const int L = system.L;
    const int w = system.w;

    std::mt19937_64 rng(splitmix64(seed));

    PeelingInstance inst;
    inst.T = T;
    inst.L = L;
    inst.w = w;
    inst.K = K;
    inst.seed = seed;

    // Receivers: per stage, F_j T receivers of class j (last class absorbs
    // rounding). Track the id range of each (stage, class) block.
    std::vector<int> class_count(J);
    int assigned = 0;
    for (int j = 0; j < J; ++j) {
        class_count[j] = j + 1 == J ? T - assigned
                                    : static_cast<int>(std::floor(base.partition[j] * T + 0.5));
        assigned += class_count[j];
    }
    if (assigned > T) throw std::invalid_argument("partition rounding exceeds T");
    std::vector<std::vector<int>> block_start(L, std::vector<int>(J));
    for (int l = 0; l < L; ++l) {
        int off = l * T;
        for (int j = 0; j < J; ++j) {
            block_start[l][j] = off;
            off += class_count[j];
        }
    }
    const int R = L * T;
    inst.receiver_class.resize(R);
    inst.receiver_stage.resize(R);
    inst.receiver_phi_D.resize(R);
    inst.receiver_contents.assign(R, {});
    inst.receiver_decoded.assign(R, std::vector<long long>(K, 0));
    for (int l = 0; l < L; ++l)
        for (int j = 0; j < J; ++j)
            for (int i = 0; i < class_count[j]; ++i) {
                int r = block_start[l][j] + i;
                inst.receiver_class[r] = j;
                inst.receiver_stage[r] = l;
                inst.receiver_phi_D[r] = phi_code_for(base.success[j], rng);
            }

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            double mean = system.stage_loads[l][k] * T;
            long long count = mean > 0.0 ? std::poisson_distribution<long long>(mean)(rng) : 0;
            for (long long u = 0; u < count; ++u) {
                SimUser user;
                user.cls = k;
                user.stage = l;
                user.degree = sample_degree(base.degree[k], rng);
                for (int c = 0; c < user.degree; ++c) {
                    int stage = (l + std::uniform_int_distribution<int>(0, w - 1)(rng)) % L;
                    double uj = unif(rng);
                    int j = 0;
                    double cum = 0.0;
                    for (; j < J; ++j) {
                        cum += base.routing[k][j];
                        if (uj <= cum) break;
                    }
                    if (j == J) j = J - 1;
                    int r = block_start[stage][j] +
                            std::uniform_int_distribution<int>(0, class_count[j] - 1)(rng);
                    user.copies.push_back(r);
                }
                int uid = static_cast<int>(inst.users.size());
                for (int r : user.copies) inst.receiver_contents[r].push_back(uid);
                inst.users.push_back(std::move(user));
            }
        }
    }
    return inst;
}

PeelingInstance build_instance(const CprSystem& system, int T, std::uint64_t seed) {
    return build_instance(CcprSystem::circular(system, 1, 1), T, seed);
}

int peel(PeelingInstance& inst) {
    const int R = static_cast<int>(inst.receiver_contents.size());
    int rounds = 0;
    while (true) {
        // Mark phase: evaluate every receiver against the same pre-round state.
        std::vector<int> to_decode;
        std::vector<char> marked(inst.users.size(), 0);
        for (int r = 0; r < R; ++r) {
            if (inst.receiver_contents[r].empty()) continue;
            std::vector<long long> n = contents_counts(inst, r);
            if (!decodes_fully(inst, r, n)) continue;
            for (int k = 0; k < inst.K; ++k) inst.receiver_decoded[r][k] += n[k];
            for (int uid : inst.receiver_contents[r]) {
                if (!marked[uid]) {
                    marked[uid] = 1;
                    to_decode.push_back(uid);
                }
            }
        }
        if (to_decode.empty()) break;
        // Sweep phase: remove all copies of the newly decoded users.
        for (int uid : to_decode) {
            inst.users[uid].decoded = true;
            remove_user_copies(inst, uid);
        }
        ++rounds;
    }
    return rounds;
}

int peel_sequential(PeelingInstance& inst, const std::vector<int>& receiver_order) {
    int passes = 0;
    bool progress = true;
    while (progress) {
        progress = false;
        for (int r : receiver_order) {
            if (inst.receiver_contents[r].empty()) continue;
            std::vector<long long> n = contents_counts(inst, r);
            if (!decodes_fully(inst, r, n)) continue;
            for (int k = 0; k < inst.K; ++k) inst.receiver_decoded[r][k] += n[k];
            std::vector<int> batch = inst.receiver_contents[r];
            for (int uid : batch) {
                inst.users[uid].decoded = true;
                remove_user_copies(inst, uid);
            }
            progress = true;
        }
        ++passes;
    }
    return passes;
}

int check_decoded_in_capacity(const PeelingInstance& inst) {
    for (size_t r = 0; r < inst.receiver_decoded.size(); ++r) {
        const auto& y = inst.receiver_decoded[r];
        long long total = 0;
        for (long long v : y) total += v;
        if (total == 0) continue;
        int code = inst.receiver_phi_D[r];
        bool ok = code > 0 ? total <= code : (y[0] <= 1 && y[1] <= 1);
        if (!ok) return static_cast<int>(r);
    }
    return -1;
}

SimResult simulate(const CcprSystem& system, int T, int rounds, std::uint64_t seed) {
    if (rounds < 1) throw std::invalid_argument("need at least one round");
    const int K = system.base.K();
    SimResult result;
    result.seed = seed;
    result.rounds = rounds;
    result.users_total.assign(K, 0);
    result.users_decoded.assign(K, 0);
    for (int i = 0; i < rounds; ++i) {
        PeelingInstance inst = build_instance(system, T, splitmix64(seed) ^ static_cast<std::uint64_t>(i));
        peel(inst);
        for (const SimUser& u : inst.users) {
            ++result.users_total[u.cls];
            if (u.decoded) ++result.users_decoded[u.cls];
        }
    }
    result.success_rate.assign(K, 1.0);
    result.std_err.assign(K, 0.0);
    for (int k = 0; k < K; ++k) {
        if (result.users_total[k] == 0) continue;
        double n = static_cast<double>(result.users_total[k]);
        double p = result.users_decoded[k] / n;
        result.success_rate[k] = p;
        result.std_err[k] = std::sqrt(std::max(p * (1.0 - p), 1.0 / n) / n);
    }
    return result;
}

SimResult simulate(const CprSystem& system, int T, int rounds, std::uint64_t seed) {
    return simulate(CcprSystem::circular(system, 1, 1), T, rounds, seed);
}

}  // namespace cpr
