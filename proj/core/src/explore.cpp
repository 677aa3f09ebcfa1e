#include "cpr/explore.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace cpr {

namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

ThresholdResult find_threshold(const StabilityClassifier& classify, double G_lo, double G_hi,
                               double step) {
    if (!(step > 0.0)) throw std::invalid_argument("scan step must be positive");
    if (!(G_hi > G_lo)) throw std::invalid_argument("scan range is empty");

    ThresholdResult result;
    result.step = step;
    auto check = [&](double G) {
        bool stable = classify(G);
        result.classifications.emplace_back(G, stable);
        return stable;
    };
    if (!check(G_lo)) throw std::runtime_error("scan start is already unstable");

    const long long N = static_cast<long long>(std::floor((G_hi - G_lo) / step + 1e-9));
    long long lo = 0;
    long long first_unstable = -1;  // grid index, -1 while unknown
    for (long long level : {100LL, 10LL, 1LL}) {
        long long limit = first_unstable >= 0 ? first_unstable : N + 1;
        for (long long i = lo + level; i < limit && i <= N; i += level) {
            if (check(G_lo + i * step)) {
                lo = i;
            } else {
                first_unstable = i;
                break;
            }
        }
    }
    if (first_unstable < 0)
        throw std::runtime_error("no instability found below the scan upper limit");
    result.G_star = round4(G_lo + lo * step);
    return result;
}

double bisection_threshold(const StabilityClassifier& classify, double G_lo, double G_hi,
                           double tol) {
    if (!classify(G_lo)) throw std::runtime_error("bisection start is already unstable");
    if (classify(G_hi)) throw std::runtime_error("bisection upper end is stable");
    while (G_hi - G_lo > tol) {
        double mid = 0.5 * (G_lo + G_hi);
        (classify(mid) ? G_lo : G_hi) = mid;
    }
    return G_lo;
}

StabilityClassifier make_single_class_classifier(const DegreeDistribution& degree,
                                                 const SuccessModel& success, int w, int L,
                                                 const EvolveOptions& opts) {
    return [degree, success, w, L, opts](double G) {
        if (w == 1) {
            CprSystem sys = CprSystem::single(G, degree, success);
            return is_stable(cpr_evolve(sys, opts));
        }
        CprSystem base = CprSystem::single(G, degree, success);
        CcprSystem sys = CcprSystem::punctured(std::move(base), L, w);
        return is_stable(ccpr_evolve(sys, opts));
    };
}

CprSystem make_two_class_system(TwoClassPolicy policy, double G1, double G2,
                                const DegreeDistribution& dist1,
                                const DegreeDistribution& dist2) {
    CprSystem sys;
    sys.G = {G1, G2};
    sys.degree = {dist1, dist2};
    sys.partition = {0.5, 0.5};
    sys.success = {SuccessModel::slotted_aloha(), SuccessModel::slotted_aloha()};
    if (policy == TwoClassPolicy::CompleteSharing)
        sys.routing = {{0.5, 0.5}, {0.5, 0.5}};
    else
        sys.routing = {{0.5, 0.5}, {0.0, 1.0}};
    return sys;
}

RegionBoundary region_boundary_2d(TwoClassPolicy policy, const DegreeDistribution& dist1,
                                  const DegreeDistribution& dist2, int w, int L,
                                  double grid_step, const EvolveOptions& opts, int threads,
                                  double G1_max, double G2_max) {
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");
    if (threads < 1) threads = 1;

    RegionBoundary region;
    region.policy = policy;
    region.grid_step = grid_step;
    region.w = w;
    region.L = L;

    const int probe_stage = w == 1 ? 0 : L / 2 - 1;
    auto point_stable = [&](double G1, double G2) {
        CprSystem base = make_two_class_system(policy, G1, G2, dist1, dist2);
        EvolutionTrace trace;
        int stage = probe_stage;
        if (w == 1) {
            trace = cpr_evolve(base, opts);
        } else {
            trace = ccpr_evolve(CcprSystem::punctured(std::move(base), L, w), opts);
        }
        for (int k = 0; k < 2; ++k)
            if (!(probe_q(trace, k, stage) < 1e-5)) return false;
        return true;
    };

    // One column: largest stable G2 for this G1, or no value when even
    // G2 = 0 is unstable.
    auto column = [&](int i) -> std::optional<double> {
        double G1 = i * grid_step;
        if (!point_stable(G1, 0.0)) return std::nullopt;
        int jmax = static_cast<int>(std::floor(G2_max / grid_step + 1e-9));
        int best = 0;
        for (int j = 1; j <= jmax; ++j) {
            if (!point_stable(G1, j * grid_step)) break;
            best = j;
        }
        return best * grid_step;
    };

    const int imax = static_cast<int>(std::floor(G1_max / grid_step + 1e-9));
    std::vector<std::optional<double>> results(imax + 1);
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            int i = next.fetch_add(1);
            if (i > imax) return;
            results[i] = column(i);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (int i = 0; i <= imax; ++i) {
        if (!results[i]) break;
        double G1 = i * grid_step;
        region.points.emplace_back(G1, *results[i]);
        region.bound_curve.emplace_back(G1, policy_bound_curve(policy, dist1, dist2, G1));
    }
    return region;
}

}  // namespace cpr
