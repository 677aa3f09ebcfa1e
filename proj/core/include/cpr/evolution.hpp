#ifndef CPR_EVOLUTION_HPP
#define CPR_EVOLUTION_HPP

#include <vector>

#include "cpr/system.hpp"

namespace cpr {

struct EvolveOptions {
    int max_iter = 100000;
    double tol = 1e-8;
    /// Store every q iterate in EvolutionTrace::history. Off by default since
    /// long runs would hold max_iter * K * L doubles.
    bool record_history = false;
};

/// Result of a density-evolution run. Vectors are indexed [class][stage];
/// base (uncoupled) systems have a single stage. `loads` holds the final
/// per-receiver-class offered loads, indexed [receiver class][stage][user
/// class].
struct EvolutionTrace {
    std::vector<std::vector<double>> final_q;
    std::vector<std::vector<double>> final_p;
    std::vector<std::vector<std::vector<double>>> loads;
    std::vector<std::vector<double>> final_success;
    bool converged = false;
    int iterations_used = 0;
    /// Present only when EvolveOptions::record_history is set; history[i] is
    /// the q matrix after iteration i (history[0] is the all-ones start).
    std::vector<std::vector<std::vector<double>>> history;
};

/// Density evolution for a base CPR from q = all-ones until the max-norm
/// update drops below tol or max_iter is reached.
EvolutionTrace cpr_evolve(const CprSystem& system, const EvolveOptions& opts = {});

/// Density evolution for a circular or punctured convolutional CPR. Stage
/// windows wrap circularly; puncturing enters only through zero stage loads.
EvolutionTrace ccpr_evolve(const CcprSystem& system, const EvolveOptions& opts = {});

/// Specialized single-class path for convolutional IRSA (slotted ALOHA,
/// regular degree d, punctured). Must agree with ccpr_evolve on the matching
/// system to 1e-12.
EvolutionTrace convolutional_irsa_evolve(double G, int d, int w, int L,
                                         const EvolveOptions& opts = {});

/// One-sided auxiliary recursion for a single-class punctured system, with
/// the boundary clamp p_l = p_{L-w+1} for l >= L-w+1 applied after every
/// iteration. Its fixed point dominates the punctured system's (after index
/// reversal), which is what the threshold-saturation argument uses.
EvolutionTrace one_sided_evolve(const CcprSystem& system, const EvolveOptions& opts = {});

/// Stable iff every final q entry is below eps.
bool is_stable(const EvolutionTrace& trace, double eps = 1e-5);

/// q value of one class at one stage (0-based), for region-boundary probes.
double probe_q(const EvolutionTrace& trace, int k, int stage);

}  // namespace cpr

#endif
