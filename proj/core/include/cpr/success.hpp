#ifndef CPR_SUCCESS_HPP
#define CPR_SUCCESS_HPP

#include <span>
#include <vector>

namespace cpr {

/// Deterministic receiver map phi from per-class packet counts to decoded
/// counts. Variants:
///   - DFold(D): all packets decode iff the total count is at most D
///   - NearFar: two classes, (n1,n2) decodes iff n1 <= 1 and n2 <= 1
class PhiReceiver {
public:
    static PhiReceiver dfold(int D);
    static PhiReceiver near_far();

    int num_classes() const { return num_classes_; }

    /// phi(n): decoded counts.
    std::vector<long long> decode(const std::vector<long long>& n) const;
    /// phi^c(n) = n - phi(n): counts that remain undecoded.
    std::vector<long long> failure(const std::vector<long long>& n) const;

private:
    enum class Kind { DFold, NearFar };
    Kind kind_;
    int D_ = 0;
    int num_classes_ = 1;
};

/// Per-receiver-class success probability P_suc,k(rho) under a Poisson
/// offered-load vector rho (one entry per user class hitting the receiver).
class SuccessModel {
public:
    enum class Kind { SlottedAloha, DFold, DFoldMixture, NearFar };

    static SuccessModel slotted_aloha();
    static SuccessModel dfold(int D);
    /// weights[i] is the probability of a D = i+1 receiver; weights sum to 1.
    static SuccessModel dfold_mixture(std::vector<double> weights);
    static SuccessModel near_far();

    Kind kind() const { return kind_; }
    /// Number of load-vector entries the model distinguishes. SlottedAloha and
    /// DFold act on the scalar total load, so any K is accepted; NearFar
    /// requires exactly two.
    int num_classes() const { return kind_ == Kind::NearFar ? 2 : 1; }

    double success_prob(int k, std::span<const double> rho) const;
    double success_prob(double rho) const;

    /// True when integral() has a closed form (everything except NearFar).
    bool has_closed_form_integral() const { return kind_ != Kind::NearFar; }

    /// Integral of the scalar success probability, int_0^x P_suc(r) dr.
    double integral(double x) const;
    /// d/dx of the scalar success probability.
    double derivative(double x) const;
    /// Inverse of the scalar success probability on [0, inf), bisection to
    /// 1e-12. Requires y in (0, 1].
    double inverse(double y) const;

    int dfold_D() const { return D_; }
    const std::vector<double>& mixture_weights() const { return weights_; }

private:
    Kind kind_;
    int D_ = 0;
    std::vector<double> weights_;
};

/// Success probability of the Poisson receiver induced by a phi-ALOHA
/// receiver: E[phi_k(N + e_k) / (N_k + 1)] with N_j ~ Poisson(rho_j)
/// independent, counts truncated at `truncation` (tail mass below 1e-12 when
/// chosen by poisson_truncation).
double induced_success_from_phi(const PhiReceiver& receiver, int k,
                                std::span<const double> rho, int truncation);

/// Smallest N with P(Poisson(mean) > N) < 1e-12.
int poisson_truncation(double mean);

}  // namespace cpr

#endif
