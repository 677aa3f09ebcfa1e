#include "cpr/degree.hpp"

#include <cmath>
#include <stdexcept>

namespace cpr {

DegreeDistribution::DegreeDistribution(std::map<int, double> coeffs)
    : coeffs_(std::move(coeffs)) {
    double sum = 0.0;
    for (const auto& [d, c] : coeffs_) {
        if (d < 0) throw std::invalid_argument("negative degree");
        if (c < -1e-12 || c > 1.0 + 1e-12)
            throw std::invalid_argument("degree coefficient outside [0,1]");
        if ((d == 0 || d == 1) && c != 0.0)
            throw std::invalid_argument("degree distribution must have no mass on degrees 0 and 1");
        sum += c;
        mean_ += d * c;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("degree coefficients must sum to 1");
    if (!(mean_ > 0.0))
        throw std::invalid_argument("mean degree must be positive");
}

DegreeDistribution DegreeDistribution::regular(int d) {
    return DegreeDistribution({{d, 1.0}});
}

double DegreeDistribution::gf(double x) const {
    double v = 0.0;
    for (const auto& [d, c] : coeffs_) v += c * std::pow(x, d);
    return v;
}

double DegreeDistribution::gf_prime(double x) const {
    double v = 0.0;
    for (const auto& [d, c] : coeffs_)
        if (d >= 1) v += c * d * std::pow(x, d - 1);
    return v;
}

double DegreeDistribution::gf_second(double x) const {
    double v = 0.0;
    for (const auto& [d, c] : coeffs_)
        if (d >= 2) v += c * d * (d - 1) * std::pow(x, d - 2);
    return v;
}

double DegreeDistribution::edge_gf(double x) const { return gf_prime(x) / mean_; }
double DegreeDistribution::edge_gf_prime(double x) const { return gf_second(x) / mean_; }

double DegreeDistribution::edge_gf_second(double x) const {
    double v = 0.0;
    for (const auto& [d, c] : coeffs_)
        if (d >= 3) v += c * d * (d - 1) * (d - 2) * std::pow(x, d - 3);
    return v / mean_;
}

double DegreeDistribution::edge_gf_inverse(double q) const {
    if (q < 0.0 || q > 1.0) throw std::domain_error("edge_gf_inverse argument outside [0,1]");
    if (q == 0.0) return 0.0;
    if (q == 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        (edge_gf(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

int DegreeDistribution::max_degree() const {
    return coeffs_.empty() ? 0 : coeffs_.rbegin()->first;
}

double eval_degree(const DegreeDistribution& dist, DegreeEval which, double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("eval_degree argument outside [0,1]");
    switch (which) {
        case DegreeEval::Lambda: return dist.gf(x);
        case DegreeEval::LambdaPrime: return dist.gf_prime(x);
        case DegreeEval::lambda: return dist.edge_gf(x);
    }
    throw std::logic_error("unreachable");
}

}  // namespace cpr
