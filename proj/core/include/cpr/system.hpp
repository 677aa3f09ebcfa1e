#ifndef CPR_SYSTEM_HPP
#define CPR_SYSTEM_HPP

#include <vector>

#include "cpr/degree.hpp"
#include "cpr/success.hpp"

namespace cpr {

/// A coded Poisson receiver system with K user classes and J receiver
/// classes: normalized offered loads G_k, per-class degree distributions,
/// routing matrix r_{k,j}, receiver partition fractions F_j, and one success
/// model per receiver class. The receiver count T does not appear here; the
/// analytic recursions are its infinite-size limit.
struct CprSystem {
    std::vector<double> G;
    std::vector<DegreeDistribution> degree;
    std::vector<std::vector<double>> routing;
    std::vector<double> partition;
    std::vector<SuccessModel> success;

    int K() const { return static_cast<int>(G.size()); }
    int J() const { return static_cast<int>(partition.size()); }

    /// Throws std::invalid_argument on any malformed field.
    void validate() const;

    /// Single-class single-receiver shorthand.
    static CprSystem single(double G, DegreeDistribution degree, SuccessModel success);
};

/// Convolutional (spatially coupled) extension: L stages coupled over a
/// window of w stages. Stage loads are per stage and user class; puncturing
/// zeroes the last w-1 stages' loads but keeps all L stages in the recursion.
struct CcprSystem {
    enum class Mode { Circular, Punctured };

    CprSystem base;
    int L = 1;
    int w = 1;
    Mode mode = Mode::Circular;
    std::vector<std::vector<double>> stage_loads;  // L x K

    static CcprSystem circular(CprSystem base, int L, int w);
    static CcprSystem circular(CprSystem base, int L, int w,
                               std::vector<std::vector<double>> stage_loads);
    static CcprSystem punctured(CprSystem base, int L, int w);

    void validate() const;
};

}  // namespace cpr

#endif
