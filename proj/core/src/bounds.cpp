#include "cpr/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace cpr {

namespace {

/// E[min(Poisson(mu), B)] = sum_{tau<B} tau pmf(tau) + B P(Poisson >= B).
double expected_min_poisson(double mu, int B) {
    double pmf = std::exp(-mu);
    double head = 0.0, cum = pmf;
    for (int t = 1; t < B; ++t) {
        pmf *= mu / t;
        head += t * pmf;
        cum += pmf;
    }
    return head + B * (1.0 - cum);
}

BoundVerdict verdict_from_slack(double slack) {
    return {slack >= 0.0, slack};
}

double dfold_bound_rhs(int D, double x) {
    double pmf = std::exp(-x);
    double sum = D * pmf;
    for (int t = 1; t < D; ++t) {
        pmf *= x / t;
        sum += (D - t) * pmf;
    }
    return D - sum;
}

}  // namespace

BoundVerdict outer_bound_satisfied(const CprSystem& system, const CapacityEnvelope& envelope) {
    system.validate();
    if (static_cast<int>(envelope.b.size()) != system.K())
        throw std::invalid_argument("envelope length does not match K");
    for (int b : envelope.b)
        if (b != 0 && b != 1) throw std::invalid_argument("envelope weights must be binary");
    if (envelope.B < 1) throw std::invalid_argument("envelope bound must be positive");

    double lhs = 0.0;
    for (int k = 0; k < system.K(); ++k) lhs += envelope.b[k] * system.G[k];
    double rhs = 0.0;
    for (int j = 0; j < system.J(); ++j) {
        double mu = 0.0;
        for (int k = 0; k < system.K(); ++k)
            mu += envelope.b[k] * system.G[k] * system.degree[k].mean_degree() *
                  system.routing[k][j] / system.partition[j];
        rhs += system.partition[j] * expected_min_poisson(mu, envelope.B);
    }
    return verdict_from_slack(rhs - lhs);
}

BoundVerdict dfold_mixture_bound(double G, const DegreeDistribution& dist,
                                 const std::vector<double>& weights) {
    if (G < 0.0) throw std::domain_error("negative offered load");
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("negative mixture weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("mixture weights must sum to 1");
    double x = G * dist.mean_degree();
    double rhs = 0.0;
    for (size_t i = 0; i < weights.size(); ++i)
        rhs += weights[i] * dfold_bound_rhs(static_cast<int>(i) + 1, x);
    return verdict_from_slack(rhs - G);
}

double mixture_bound_root(const DegreeDistribution& dist, const std::vector<double>& weights) {
    auto slack = [&](double G) { return dfold_mixture_bound(G, dist, weights).slack; };
    double lo = 1e-9;
    if (slack(lo) <= 0.0) throw std::runtime_error("mixture bound root bracket failure");
    double hi = 1.0;
    while (slack(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e9) throw std::runtime_error("mixture bound root bracket failure");
    }
    while (hi - lo > 1e-7) {
        double mid = 0.5 * (lo + hi);
        (slack(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<BoundVerdict> nearfar_bounds(double G1, double G2,
                                         const DegreeDistribution& dist1,
                                         const DegreeDistribution& dist2) {
    if (G1 < 0.0 || G2 < 0.0) throw std::domain_error("negative offered load");
    double m1 = dist1.mean_degree(), m2 = dist2.mean_degree();
    std::vector<BoundVerdict> out;
    out.push_back(verdict_from_slack(1.0 - std::exp(-G1 * m1) - G1));
    out.push_back(verdict_from_slack(1.0 - std::exp(-G2 * m2) - G2));
    double mu = G1 * m1 + G2 * m2;
    out.push_back(verdict_from_slack(expected_min_poisson(mu, 2) - G1 - G2));
    return out;
}

std::vector<BoundVerdict> two_class_policy_bounds(TwoClassPolicy policy, double G1, double G2,
                                                  const DegreeDistribution& dist1,
                                                  const DegreeDistribution& dist2) {
    if (G1 < 0.0 || G2 < 0.0) throw std::domain_error("negative offered load");
    double m1 = dist1.mean_degree(), m2 = dist2.mean_degree();
    std::vector<BoundVerdict> out;
    if (policy == TwoClassPolicy::CompleteSharing) {
        out.push_back(verdict_from_slack(
            1.0 - std::exp(-G1 * m1 - G2 * m2) - G1 - G2));
    } else {
        out.push_back(verdict_from_slack(
            1.0 - 0.5 * std::exp(-G1 * m1) - 0.5 * std::exp(-G1 * m1 - 2.0 * G2 * m2) -
            G1 - G2));
        out.push_back(verdict_from_slack(0.5 - 0.5 * std::exp(-2.0 * G2 * m2) - G2));
    }
    return out;
}

double policy_bound_curve(TwoClassPolicy policy, const DegreeDistribution& dist1,
                          const DegreeDistribution& dist2, double G1) {
    auto ok = [&](double G2) {
        for (const auto& v : two_class_policy_bounds(policy, G1, G2, dist1, dist2))
            if (!v.holds) return false;
        return true;
    };
    if (!ok(0.0)) return 0.0;
    double hi = 1.0;
    while (ok(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw std::runtime_error("policy bound curve bracket failure");
    }
    double lo = 0.0;
    while (hi - lo > 1e-6) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

bool envelope_valid(const PhiReceiver& receiver, const CapacityEnvelope& envelope,
                    int n_max) {
    const int K = receiver.num_classes();
    if (static_cast<int>(envelope.b.size()) != K)
        throw std::invalid_argument("envelope length does not match receiver classes");
    std::vector<long long> n(K, 0);
    while (true) {
        std::vector<long long> dec = receiver.decode(n);
        bool in_region = dec == n;
        if (in_region) {
            long long weighted = 0;
            for (int k = 0; k < K; ++k) weighted += envelope.b[k] * dec[k];
            if (weighted > envelope.B) return false;
        }
        int j = 0;
        while (j < K && n[j] == n_max) n[j++] = 0;
        if (j == K) return true;
        ++n[j];
    }
}

}  // namespace cpr
