#ifndef CPR_EXPLORE_HPP
#define CPR_EXPLORE_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpr/bounds.hpp"
#include "cpr/evolution.hpp"
#include "cpr/system.hpp"

namespace cpr {

/// Maps a load to a stability verdict (true = stable).
using StabilityClassifier = std::function<bool(double)>;

struct ThresholdResult {
    /// Last stable grid point, rounded to 4 decimals.
    double G_star = 0.0;
    double step = 0.0;
    /// Every point actually classified during the scan, in evaluation order.
    std::vector<std::pair<double, bool>> classifications;
};

/// Ascending scan over [G_lo, G_hi] at resolution `step`, reporting the last
/// stable grid point before the first unstable one. The scan runs coarse to
/// fine (100x, 10x, 1x step); under the monotone stability assumption this
/// yields the same answer as a flat scan. Throws if G_lo is unstable or no
/// instability is found by G_hi.
ThresholdResult find_threshold(const StabilityClassifier& classify, double G_lo, double G_hi,
                               double step = 1e-4);

/// Faster bracket refinement for property tests: bisects between a stable
/// G_lo and an unstable G_hi down to `tol` and returns the stable end.
double bisection_threshold(const StabilityClassifier& classify, double G_lo, double G_hi,
                           double tol = 1e-6);

/// Stability classifier for a single-class system: w=1 runs the base CPR
/// recursion, w>1 the punctured convolutional recursion with L stages.
/// Stable means every final q is below 1e-5.
StabilityClassifier make_single_class_classifier(const DegreeDistribution& degree,
                                                 const SuccessModel& success, int w, int L,
                                                 const EvolveOptions& opts);

/// Two-class slotted-ALOHA system with J=2 and F=(0.5,0.5); routing follows
/// the policy (sharing: all 0.5; reservation: class 2 only to receiver 2).
CprSystem make_two_class_system(TwoClassPolicy policy, double G1, double G2,
                                const DegreeDistribution& dist1,
                                const DegreeDistribution& dist2);

struct RegionBoundary {
    TwoClassPolicy policy = TwoClassPolicy::CompleteSharing;
    double grid_step = 0.01;
    int w = 1;
    int L = 1;
    /// (G1, largest stable G2) per grid column, ascending in G1. Columns
    /// whose G2=0 point is already unstable end the sweep.
    std::vector<std::pair<double, double>> points;
    /// Outer-bound curve (G1, max G2 with non-negative slack) on the same
    /// G1 grid.
    std::vector<std::pair<double, double>> bound_curve;
};

/// Grid sweep of the two-class stability boundary. Stability of a grid point
/// is probed at stage L/2 (all classes' q below 1e-5), matching the
/// classification used for the published boundaries. Columns run in parallel
/// on `threads` workers; results are collected in grid order regardless of
/// scheduling.
RegionBoundary region_boundary_2d(TwoClassPolicy policy, const DegreeDistribution& dist1,
                                  const DegreeDistribution& dist2, int w, int L,
                                  double grid_step, const EvolveOptions& opts,
                                  int threads = 1, double G1_max = 1.2, double G2_max = 1.2);

}  // namespace cpr

#endif
