#include "cpr/evolution.hpp"

#include <cmath>
#include <stdexcept>

namespace cpr {

namespace {

/// Clamp rounding noise into [0,1]; anything beyond the guard band is a bug
/// in the recursion, not noise, so it throws.
double checked_probability(double v) {
    if (v < 0.0) {
        if (v < -1e-12) throw std::runtime_error("probability below 0 beyond guard band");
        return 0.0;
    }
    if (v > 1.0) {
        if (v > 1.0 + 1e-12) throw std::runtime_error("probability above 1 beyond guard band");
        return 1.0;
    }
    return v;
}

void fill_p_from_q(const CprSystem& base, const std::vector<std::vector<double>>& q,
                   std::vector<std::vector<double>>& p) {
    const int K = base.K();
    p.assign(K, {});
    for (int k = 0; k < K; ++k) {
        p[k].resize(q[k].size());
        for (size_t l = 0; l < q[k].size(); ++l)
            p[k][l] = base.degree[k].edge_gf_inverse(q[k][l]);
    }
}

}  // namespace

EvolutionTrace cpr_evolve(const CprSystem& system, const EvolveOptions& opts) {
    system.validate();
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const int K = system.K();
    const int J = system.J();

    // rho_tilde[j][k]: full offered load of class k at a class j receiver.
    std::vector<std::vector<double>> rho_tilde(J, std::vector<double>(K));
    for (int j = 0; j < J; ++j)
        for (int k = 0; k < K; ++k)
            rho_tilde[j][k] = system.G[k] * system.degree[k].mean_degree() *
                              system.routing[k][j] / system.partition[j];

    std::vector<double> q(K, 1.0), qnew(K);
    std::vector<std::vector<double>> scaled(J, std::vector<double>(K));
    std::vector<double> inner(K);

    EvolutionTrace trace;
    auto snapshot = [&](const std::vector<double>& qq) {
        std::vector<std::vector<double>> m(K, std::vector<double>(1));
        for (int k = 0; k < K; ++k) m[k][0] = qq[k];
        return m;
    };
    if (opts.record_history) trace.history.push_back(snapshot(q));

    int iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        for (int j = 0; j < J; ++j)
            for (int k = 0; k < K; ++k) scaled[j][k] = q[k] * rho_tilde[j][k];
        for (int k = 0; k < K; ++k) {
            double s = 0.0;
            for (int j = 0; j < J; ++j)
                s += system.routing[k][j] * system.success[j].success_prob(k, scaled[j]);
            inner[k] = checked_probability(1.0 - s);
            qnew[k] = checked_probability(system.degree[k].edge_gf(inner[k]));
        }
        double diff = 0.0;
        for (int k = 0; k < K; ++k) diff = std::max(diff, std::abs(qnew[k] - q[k]));
        q = qnew;
        ++iter;
        if (opts.record_history) trace.history.push_back(snapshot(q));
        if (diff < opts.tol) {
            converged = true;
            break;
        }
    }

    trace.converged = converged;
    trace.iterations_used = iter;
    trace.final_q = snapshot(q);
    fill_p_from_q(system, trace.final_q, trace.final_p);
    trace.loads.assign(J, {});
    for (int j = 0; j < J; ++j) {
        for (int k = 0; k < K; ++k) scaled[j][k] = q[k] * rho_tilde[j][k];
        trace.loads[j] = {scaled[j]};
    }
    trace.final_success.assign(K, std::vector<double>(1));
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        for (int j = 0; j < J; ++j)
            s += system.routing[k][j] * system.success[j].success_prob(k, trace.loads[j][0]);
        trace.final_success[k][0] =
            checked_probability(1.0 - system.degree[k].gf(checked_probability(1.0 - s)));
    }
    return trace;
}

EvolutionTrace ccpr_evolve(const CcprSystem& system, const EvolveOptions& opts) {
    system.validate();
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const CprSystem& base = system.base;
    const int K = base.K();
    const int J = base.J();
    const int L = system.L;
    const int w = system.w;

    // c[k][j]: per-window-slot load factor Lambda'_k(1) r_{k,j} / (F_j w).
    std::vector<std::vector<double>> c(K, std::vector<double>(J));
    for (int k = 0; k < K; ++k)
        for (int j = 0; j < J; ++j)
            c[k][j] = base.degree[k].mean_degree() * base.routing[k][j] /
                      (base.partition[j] * w);

    std::vector<std::vector<double>> q(K, std::vector<double>(L, 1.0));
    std::vector<std::vector<double>> qnew(K, std::vector<double>(L));
    // rho[j][l][k] and the per-stage success values psuc[j][l][k].
    std::vector<std::vector<std::vector<double>>> rho(
        J, std::vector<std::vector<double>>(L, std::vector<double>(K)));
    std::vector<std::vector<std::vector<double>>> psuc = rho;

    auto compute_loads = [&]() {
        for (int j = 0; j < J; ++j)
            for (int l = 0; l < L; ++l)
                for (int k = 0; k < K; ++k) {
                    double s = 0.0;
                    for (int t = 0; t < w; ++t) {
                        int idx = (l - t + L) % L;
                        s += q[k][idx] * system.stage_loads[idx][k];
                    }
                    rho[j][l][k] = c[k][j] * s;
                }
    };
    auto compute_success = [&]() {
        for (int j = 0; j < J; ++j)
            for (int l = 0; l < L; ++l) {
                if (base.success[j].kind() == SuccessModel::Kind::NearFar) {
                    for (int k = 0; k < K; ++k)
                        psuc[j][l][k] = base.success[j].success_prob(k, rho[j][l]);
                } else {
                    double v = base.success[j].success_prob(0, rho[j][l]);
                    for (int k = 0; k < K; ++k) psuc[j][l][k] = v;
                }
            }
    };

    EvolutionTrace trace;
    if (opts.record_history) trace.history.push_back(q);

    int iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        compute_loads();
        compute_success();
        double diff = 0.0;
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l) {
                double s = 0.0;
                for (int t = 0; t < w; ++t) {
                    int idx = (l + t) % L;
                    for (int j = 0; j < J; ++j)
                        s += base.routing[k][j] * psuc[j][idx][k] / w;
                }
                qnew[k][l] = checked_probability(
                    base.degree[k].edge_gf(checked_probability(1.0 - s)));
                diff = std::max(diff, std::abs(qnew[k][l] - q[k][l]));
            }
        q = qnew;
        ++iter;
        if (opts.record_history) trace.history.push_back(q);
        if (diff < opts.tol) {
            converged = true;
            break;
        }
    }

    trace.converged = converged;
    trace.iterations_used = iter;
    trace.final_q = q;
    fill_p_from_q(base, q, trace.final_p);
    compute_loads();
    compute_success();
    trace.loads = rho;
    trace.final_success.assign(K, std::vector<double>(L));
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < L; ++l) {
            double s = 0.0;
            for (int t = 0; t < w; ++t) {
                int idx = (l + t) % L;
                for (int j = 0; j < J; ++j)
                    s += base.routing[k][j] * psuc[j][idx][k] / w;
            }
            trace.final_success[k][l] = checked_probability(
                1.0 - base.degree[k].gf(checked_probability(1.0 - s)));
        }
    return trace;
}

EvolutionTrace convolutional_irsa_evolve(double G, int d, int w, int L,
                                         const EvolveOptions& opts) {
    if (d < 2) throw std::invalid_argument("regular degree must be >= 2");
    if (w == 1) {
        CprSystem base = CprSystem::single(G, DegreeDistribution::regular(d),
                                           SuccessModel::slotted_aloha());
        return cpr_evolve(base, opts);
    }
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (w < 1 || w > L) throw std::invalid_argument("window must satisfy 1 <= w <= L");
    if (G < 0.0) throw std::domain_error("negative offered load");

    const double cfac = static_cast<double>(d) / w;
    std::vector<double> gload(L, G);
    for (int l = L - w + 1; l < L; ++l) gload[l] = 0.0;

    std::vector<double> q(L, 1.0), qnew(L), rho(L), ps(L);
    EvolutionTrace trace;
    auto snapshot = [&](const std::vector<double>& qq) {
        return std::vector<std::vector<double>>{qq};
    };
    if (opts.record_history) trace.history.push_back(snapshot(q));

    int iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        for (int l = 0; l < L; ++l) {
            double s = 0.0;
            for (int t = 0; t < w; ++t) {
                int idx = (l - t + L) % L;
                s += q[idx] * gload[idx];
            }
            rho[l] = cfac * s;
            ps[l] = std::exp(-rho[l]);
        }
        double diff = 0.0;
        for (int l = 0; l < L; ++l) {
            double s = 0.0;
            for (int t = 0; t < w; ++t) s += ps[(l + t) % L] / w;
            double inner = checked_probability(1.0 - s);
            qnew[l] = checked_probability(std::pow(inner, d - 1));
            diff = std::max(diff, std::abs(qnew[l] - q[l]));
        }
        q = qnew;
        ++iter;
        if (opts.record_history) trace.history.push_back(snapshot(q));
        if (diff < opts.tol) {
            converged = true;
            break;
        }
    }

    trace.converged = converged;
    trace.iterations_used = iter;
    trace.final_q = snapshot(q);
    DegreeDistribution dist = DegreeDistribution::regular(d);
    trace.final_p.assign(1, std::vector<double>(L));
    for (int l = 0; l < L; ++l) trace.final_p[0][l] = dist.edge_gf_inverse(q[l]);
    for (int l = 0; l < L; ++l) {
        double s = 0.0;
        for (int t = 0; t < w; ++t) {
            int idx = (l - t + L) % L;
            s += q[idx] * gload[idx];
        }
        rho[l] = cfac * s;
        ps[l] = std::exp(-rho[l]);
    }
    trace.loads.assign(1, std::vector<std::vector<double>>(L, std::vector<double>(1)));
    for (int l = 0; l < L; ++l) trace.loads[0][l][0] = rho[l];
    trace.final_success.assign(1, std::vector<double>(L));
    for (int l = 0; l < L; ++l) {
        double s = 0.0;
        for (int t = 0; t < w; ++t) s += ps[(l + t) % L] / w;
        trace.final_success[0][l] = checked_probability(
            1.0 - dist.gf(checked_probability(1.0 - s)));
    }
    return trace;
}

EvolutionTrace one_sided_evolve(const CcprSystem& system, const EvolveOptions& opts) {
    system.validate();
    if (system.base.K() != 1 || system.base.J() != 1)
        throw std::invalid_argument("one-sided system requires a single user and receiver class");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const int L = system.L;
    const int w = system.w;
    const int Lt = L - w + 1;  // boundary stage index (1-based L-w+1)
    const double G = system.base.G[0];
    const DegreeDistribution& dist = system.base.degree[0];
    const SuccessModel& suc = system.base.success[0];
    const double gl1 = G * dist.mean_degree();

    std::vector<double> p(L, 1.0), pnew(L), hv(L), fv(L);
    EvolutionTrace trace;
    auto snapshot = [&](const std::vector<double>& pp) {
        return std::vector<std::vector<double>>{pp};
    };
    if (opts.record_history) trace.history.push_back(snapshot(p));

    int iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        for (int l = 0; l < L; ++l) hv[l] = dist.edge_gf(p[l]);
        for (int lh = 0; lh < L; ++lh) {
            double s = 0.0;
            for (int t = lh; t <= std::min(lh + w - 1, L - 1); ++t) s += hv[t];
            fv[lh] = 1.0 - suc.success_prob(checked_probability(s / w) * gl1);
        }
        double diff = 0.0;
        for (int l = 0; l < L; ++l) {
            double s = 0.0;
            for (int lh = std::max(0, l - w + 1); lh <= l; ++lh) s += fv[lh];
            pnew[l] = checked_probability(s / w);
        }
        // Boundary clamp: stages past L-w+1 mirror the boundary stage.
        for (int l = Lt; l < L; ++l) pnew[l] = pnew[Lt - 1];
        for (int l = 0; l < L; ++l) diff = std::max(diff, std::abs(pnew[l] - p[l]));
        p = pnew;
        ++iter;
        if (opts.record_history) trace.history.push_back(snapshot(p));
        if (diff < opts.tol) {
            converged = true;
            break;
        }
    }

    trace.converged = converged;
    trace.iterations_used = iter;
    trace.final_p = snapshot(p);
    trace.final_q.assign(1, std::vector<double>(L));
    for (int l = 0; l < L; ++l) trace.final_q[0][l] = dist.edge_gf(p[l]);
    trace.final_success.assign(1, std::vector<double>(L));
    for (int l = 0; l < L; ++l)
        trace.final_success[0][l] = checked_probability(1.0 - dist.gf(p[l]));
    return trace;
}

bool is_stable(const EvolutionTrace& trace, double eps) {
    for (const auto& row : trace.final_q)
        for (double v : row)
            if (!(v < eps)) return false;
    return true;
}

double probe_q(const EvolutionTrace& trace, int k, int stage) {
    return trace.final_q.at(k).at(stage);
}

}  // namespace cpr
