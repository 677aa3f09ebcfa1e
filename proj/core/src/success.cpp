#include "cpr/success.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cpr {

namespace {

double total_load(std::span<const double> rho) {
    double s = 0.0;
    for (double r : rho) {
        if (r < 0.0) throw std::domain_error("negative offered load");
        s += r;
    }
    return s;
}

/// P(Poisson(x) <= D-1), the D-fold ALOHA success probability.
double dfold_success(int D, double x) {
    double term = std::exp(-x);
    double sum = term;
    for (int t = 1; t < D; ++t) {
        term *= x / t;
        sum += term;
    }
    return sum;
}

/// int_0^x of dfold_success: D - e^{-x} sum_{tau=0}^{D-1} (D-tau) x^tau/tau!.
double dfold_integral(int D, double x) {
    double pmf = std::exp(-x);
    double sum = D * pmf;
    for (int t = 1; t < D; ++t) {
        pmf *= x / t;
        sum += (D - t) * pmf;
    }
    return D - sum;
}

/// d/dx of dfold_success: -e^{-x} x^{D-1}/(D-1)!.
double dfold_derivative(int D, double x) {
    double v = std::exp(-x);
    for (int t = 1; t < D; ++t) v *= x / t;
    return -v;
}

}  // namespace

PhiReceiver PhiReceiver::dfold(int D) {
    if (D < 1) throw std::invalid_argument("D-fold receiver needs D >= 1");
    PhiReceiver r;
    r.kind_ = Kind::DFold;
    r.D_ = D;
    r.num_classes_ = 1;
    return r;
}

PhiReceiver PhiReceiver::near_far() {
    PhiReceiver r;
    r.kind_ = Kind::NearFar;
    r.num_classes_ = 2;
    return r;
}

std::vector<long long> PhiReceiver::decode(const std::vector<long long>& n) const {
    for (long long v : n)
        if (v < 0) throw std::domain_error("negative packet count");
    if (kind_ == Kind::DFold) {
        long long total = std::accumulate(n.begin(), n.end(), 0LL);
        if (total <= D_) return n;
        return std::vector<long long>(n.size(), 0);
    }
    if (n.size() != 2) throw std::invalid_argument("near-far receiver expects two classes");
    if (n[0] <= 1 && n[1] <= 1) return n;
    return {0, 0};
}

std::vector<long long> PhiReceiver::failure(const std::vector<long long>& n) const {
    std::vector<long long> dec = decode(n);
    std::vector<long long> out(n.size());
    for (size_t i = 0; i < n.size(); ++i) out[i] = n[i] - dec[i];
    return out;
}

SuccessModel SuccessModel::slotted_aloha() {
    SuccessModel m;
    m.kind_ = Kind::SlottedAloha;
    return m;
}

SuccessModel SuccessModel::dfold(int D) {
    if (D < 1) throw std::invalid_argument("D-fold model needs D >= 1");
    SuccessModel m;
    m.kind_ = Kind::DFold;
    m.D_ = D;
    return m;
}

SuccessModel SuccessModel::dfold_mixture(std::vector<double> weights) {
    double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("mixture weights must sum to 1");
    for (double w : weights)
        if (w < 0.0) throw std::invalid_argument("negative mixture weight");
    SuccessModel m;
    m.kind_ = Kind::DFoldMixture;
    m.weights_ = std::move(weights);
    return m;
}

SuccessModel SuccessModel::near_far() {
    SuccessModel m;
    m.kind_ = Kind::NearFar;
    return m;
}

double SuccessModel::success_prob(int k, std::span<const double> rho) const {
    if (kind_ == Kind::NearFar) {
        if (rho.size() != 2) throw std::invalid_argument("near-far model expects two classes");
        if (rho[0] < 0.0 || rho[1] < 0.0) throw std::domain_error("negative offered load");
        double mx = std::max(rho[0], rho[1]);
        return induced_success_from_phi(PhiReceiver::near_far(), k, rho,
                                        poisson_truncation(mx));
    }
    return success_prob(total_load(rho));
}

double SuccessModel::success_prob(double rho) const {
    if (rho < 0.0) throw std::domain_error("negative offered load");
    switch (kind_) {
        case Kind::SlottedAloha:
            return std::exp(-rho);
        case Kind::DFold:
            return dfold_success(D_, rho);
        case Kind::DFoldMixture: {
            double v = 0.0;
            for (size_t i = 0; i < weights_.size(); ++i)
                v += weights_[i] * dfold_success(static_cast<int>(i) + 1, rho);
            return v;
        }
        case Kind::NearFar:
            throw std::invalid_argument("near-far model has no scalar success probability");
    }
    throw std::logic_error("unreachable");
}

double SuccessModel::integral(double x) const {
    if (x < 0.0) throw std::domain_error("negative integration limit");
    switch (kind_) {
        case Kind::SlottedAloha:
            return -std::expm1(-x);
        case Kind::DFold:
            return dfold_integral(D_, x);
        case Kind::DFoldMixture: {
            double v = 0.0;
            for (size_t i = 0; i < weights_.size(); ++i)
                v += weights_[i] * dfold_integral(static_cast<int>(i) + 1, x);
            return v;
        }
        case Kind::NearFar:
            throw std::invalid_argument("near-far model has no closed-form integral");
    }
    throw std::logic_error("unreachable");
}

double SuccessModel::derivative(double x) const {
    if (x < 0.0) throw std::domain_error("negative argument");
    switch (kind_) {
        case Kind::SlottedAloha:
            return -std::exp(-x);
        case Kind::DFold:
            return dfold_derivative(D_, x);
        case Kind::DFoldMixture: {
            double v = 0.0;
            for (size_t i = 0; i < weights_.size(); ++i)
                v += weights_[i] * dfold_derivative(static_cast<int>(i) + 1, x);
            return v;
        }
        case Kind::NearFar:
            throw std::invalid_argument("near-far model has no scalar derivative");
    }
    throw std::logic_error("unreachable");
}

double SuccessModel::inverse(double y) const {
    if (!(y > 0.0 && y <= 1.0))
        throw std::domain_error("inverse success probability needs y in (0,1]");
    if (y == 1.0) return 0.0;
    double hi = 1.0;
    while (success_prob(hi) > y) hi *= 2.0;
    double lo = 0.0;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        (success_prob(mid) > y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

int poisson_truncation(double mean) {
    if (mean < 0.0) throw std::domain_error("negative Poisson mean");
    if (mean == 0.0) return 0;
    double pmf = std::exp(-mean);
    double cum = pmf;
    int n = 0;
    while (1.0 - cum >= 1e-12 && n < 10000) {
        ++n;
        pmf *= mean / n;
        cum += pmf;
    }
    return n;
}

double induced_success_from_phi(const PhiReceiver& receiver, int k,
                                std::span<const double> rho, int truncation) {
    const int K = receiver.num_classes();
    if (static_cast<int>(rho.size()) != K)
        throw std::invalid_argument("load vector size does not match receiver classes");
    if (k < 0 || k >= K) throw std::invalid_argument("class index out of range");
    for (double r : rho)
        if (r < 0.0) throw std::domain_error("negative offered load");

    // Precompute Poisson pmfs per class up to the truncation point.
    std::vector<std::vector<double>> pmf(K);
    for (int j = 0; j < K; ++j) {
        pmf[j].resize(truncation + 1);
        pmf[j][0] = std::exp(-rho[j]);
        for (int n = 1; n <= truncation; ++n) pmf[j][n] = pmf[j][n - 1] * rho[j] / n;
    }

    // E[phi_k(N + e_k) / (N_k + 1)] by full enumeration of the truncated box.
    std::vector<long long> n(K, 0);
    double expectation = 0.0;
    while (true) {
        double weight = 1.0;
        for (int j = 0; j < K; ++j) weight *= pmf[j][n[j]];
        if (weight > 0.0) {
            std::vector<long long> arrived = n;
            arrived[k] += 1;
            std::vector<long long> dec = receiver.decode(arrived);
            expectation += weight * static_cast<double>(dec[k]) /
                           static_cast<double>(n[k] + 1);
        }
        int j = 0;
        while (j < K && n[j] == truncation) n[j++] = 0;
        if (j == K) break;
        ++n[j];
    }
    return expectation;
}

}  // namespace cpr
