#ifndef CPR_BOUNDS_HPP
#define CPR_BOUNDS_HPP

#include <vector>

#include "cpr/degree.hpp"
#include "cpr/success.hpp"
#include "cpr/system.hpp"

namespace cpr {

/// Binary weight vector b with integer bound B: for every count vector n in
/// the receiver's capacity region, sum_k b_k phi_k(n) <= B.
struct CapacityEnvelope {
    std::vector<int> b;
    int B = 1;
};

/// Signed outcome of a bound check. Slack is (right side) - (left side); the
/// bound holds iff slack >= 0.
struct BoundVerdict {
    bool holds = true;
    double slack = 0.0;
};

/// Generic outer bound on a stable offered load:
///   sum_k b_k G_k <= sum_j F_j (E[min(Poisson(mu_j), B)]),
/// mu_j = sum_k b_k G_k Lambda'_k(1) r_{k,j} / F_j. Throws if b is not
/// binary or its length does not match K.
BoundVerdict outer_bound_satisfied(const CprSystem& system, const CapacityEnvelope& envelope);

/// Single-class bound for a mixture of D-fold receivers:
///   G <= sum_D pi_D (D - sum_{tau<D} (D-tau) e^{-G m} (G m)^tau / tau!),
/// m = Lambda'(1).
BoundVerdict dfold_mixture_bound(double G, const DegreeDistribution& dist,
                                 const std::vector<double>& weights);

/// Largest G satisfying dfold_mixture_bound with equality, bisection to 1e-6.
double mixture_bound_root(const DegreeDistribution& dist, const std::vector<double>& weights);

/// The three envelope bounds of the near-far receiver with J=1:
/// (1,0)/B=1, (0,1)/B=1, (1,1)/B=2, in that order.
std::vector<BoundVerdict> nearfar_bounds(double G1, double G2,
                                         const DegreeDistribution& dist1,
                                         const DegreeDistribution& dist2);

enum class TwoClassPolicy { CompleteSharing, ReceiverReservation };

/// Outer bounds for the two-class slotted-ALOHA system with F=(0.5,0.5).
/// Complete sharing yields one constraint; receiver reservation yields two
/// (the (1,1)/B=1 and (0,1)/B=1 envelopes).
std::vector<BoundVerdict> two_class_policy_bounds(TwoClassPolicy policy, double G1, double G2,
                                                  const DegreeDistribution& dist1,
                                                  const DegreeDistribution& dist2);

/// For a fixed G1, the largest G2 with non-negative slack under all the
/// policy's constraints, located by bisection to 1e-6.
double policy_bound_curve(TwoClassPolicy policy, const DegreeDistribution& dist1,
                          const DegreeDistribution& dist2, double G1);

/// Brute-force validation of an envelope against a receiver: checks
/// sum_k b_k phi_k(n) <= B for all n in {0..n_max}^K with phi(n) = n.
bool envelope_valid(const PhiReceiver& receiver, const CapacityEnvelope& envelope,
                    int n_max = 6);

}  // namespace cpr

#endif
