#ifndef CPR_POTENTIAL_HPP
#define CPR_POTENTIAL_HPP

#include <utility>
#include <vector>

#include "cpr/degree.hpp"
#include "cpr/success.hpp"

namespace cpr {

/// Scalar admissible system of a single-class CPR:
///   f(p;G) = 1 - P_suc(p G Lambda'(1)),   h(p) = lambda(p).
/// The density-evolution update is p <- f(h(p); G).
class ScalarSystem {
public:
    ScalarSystem(DegreeDistribution degree, SuccessModel success);

    double f(double p, double G) const;
    double f_prime(double p, double G) const;  // d f / d p at fixed G
    double h(double p) const;
    double h_prime(double p) const;
    double h_second(double p) const;

    /// int_0^x P_suc(r) dr, closed form when available, adaptive Simpson
    /// quadrature (tolerance 1e-10) otherwise.
    double success_integral(double x) const;
    /// Same integral, always by quadrature; used to cross-check closed forms.
    double success_integral_quadrature(double x) const;

    const DegreeDistribution& degree() const { return degree_; }
    const SuccessModel& success() const { return success_; }

private:
    DegreeDistribution degree_;
    SuccessModel success_;
};

/// Potential function
///   U(p;G) = lambda(p)(p-1) - Lambda(p)/Lambda'(1)
///            + (1/(G Lambda'(1))) int_0^{G Lambda'(1) lambda(p)} P_suc,
/// with U(p;0) = 0 by the G -> 0 limit.
double potential_value(const ScalarSystem& sys, double p, double G);

/// potential_value with the integral forced through quadrature.
double potential_value_quadrature(const ScalarSystem& sys, double p, double G);

/// Balance function U'(p;G) = lambda'(p) (p - 1 + P_suc(G Lambda'(p))).
double balance_value(const ScalarSystem& sys, double p, double G);

/// G_s* = inf_{p in (0,1]} P_suc^{-1}(1-p) / Lambda'(p), grid scan (1e4
/// points) plus golden-section refinement to 1e-6.
double single_system_threshold(const ScalarSystem& sys);

/// G_conv* = sup{G : min_{p in [0,1]} U(p;G) >= 0}, outer bisection on G
/// (the minimum is strictly decreasing in G), inner grid minimization.
double potential_threshold(const ScalarSystem& sys);

/// G_up*, the unique positive solution of G = int_0^{G Lambda'(1)} P_suc.
double potential_upper_bound(const ScalarSystem& sys);

/// u(G) = sup{p~ : U'(p;G) >= 0 for all p in [0,p~]}. Requires G > G_s*.
double minimum_unstable_fixed_point(const ScalarSystem& sys, double G);

/// Delta E(G) = min_{p in [u(G),1]} U(p;G). Requires G > G_s*.
double energy_gap(const ScalarSystem& sys, double G);

/// K_{f,h} = ||h'|| + ||h'||^2 ||f'|| + ||h''|| with sups over p in [0,1];
/// f' is taken at the given G.
double k_fh_constant(const ScalarSystem& sys, double G);

/// K_{f,h} / Delta E(G); any integer window w strictly above this value
/// certifies stability of the w-coupled system at load G. Requires
/// G_s* < G < G_conv*.
double saturation_window_bound(const ScalarSystem& sys, double G);

struct PotentialReport {
    double G_s_star = 0.0;
    double G_conv_star = 0.0;
    double G_up_star = 0.0;
    /// Samples on a G grid strictly inside (G_s*, G_conv*).
    std::vector<std::pair<double, double>> u_of_G;
    std::vector<std::pair<double, double>> delta_E;
    std::vector<std::pair<double, double>> window_bound;
    /// K_{f,h} evaluated at G_conv*.
    double K_fh = 0.0;
};

PotentialReport potential_report(const ScalarSystem& sys, int samples = 20);

/// Deterministic (p, U, U') samples of the potential at one load, plus the
/// zero crossings of U located between adjacent samples by bisection.
struct PotentialProfile {
    double G = 0.0;
    std::vector<double> p;
    std::vector<double> U;
    std::vector<double> U_prime;
    std::vector<double> zero_crossings;
};

PotentialProfile potential_profile(const ScalarSystem& sys, double G, int resolution = 1000);

}  // namespace cpr

#endif
