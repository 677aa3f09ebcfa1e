#ifndef CPR_DEGREE_HPP
#define CPR_DEGREE_HPP

#include <map>
#include <string>

namespace cpr {

/// Repetition-degree distribution of a user class, stored as a finite
/// coefficient map {d -> probability of transmitting d copies}.
///
/// Requirements checked at construction:
///   - coefficients in [0,1], summing to 1 (within 1e-12)
///   - no mass on degrees 0 or 1 (every packet is sent at least twice)
class DegreeDistribution {
public:
    explicit DegreeDistribution(std::map<int, double> coeffs);

    /// All packets sent exactly d times.
    static DegreeDistribution regular(int d);

    /// Generating function of the degree distribution, sum_d c_d x^d.
    double gf(double x) const;
    /// Derivative of the generating function.
    double gf_prime(double x) const;
    /// Second derivative of the generating function.
    double gf_second(double x) const;
    /// Mean degree, gf_prime(1).
    double mean_degree() const { return mean_; }

    /// Edge-perspective (excess) degree generating function,
    /// gf_prime(x) / mean_degree().
    double edge_gf(double x) const;
    double edge_gf_prime(double x) const;
    double edge_gf_second(double x) const;

    /// Inverse of edge_gf on [0,1] (strictly increasing), bisection to 1e-12.
    double edge_gf_inverse(double q) const;

    const std::map<int, double>& coeffs() const { return coeffs_; }
    int max_degree() const;

    bool operator==(const DegreeDistribution&) const = default;

private:
    std::map<int, double> coeffs_;
    double mean_ = 0.0;
};

enum class DegreeEval { Lambda, LambdaPrime, lambda };

/// Evaluate the requested generating function at x in [0,1].
/// Throws std::domain_error outside [0,1].
double eval_degree(const DegreeDistribution& dist, DegreeEval which, double x);

}  // namespace cpr

#endif
