#include "cpr/potential.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace cpr {

namespace {

double adaptive_simpson(const std::function<double(double)>& fn, double a, double b,
                        double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = fn(lm), frm = fn(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(fn, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           adaptive_simpson(fn, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double integrate(const std::function<double(double)>& fn, double a, double b, double tol) {
    if (b <= a) return 0.0;
    double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(fn, a, b, fa, fm, fb, whole, tol, 50);
}

struct Refined {
    double x;
    double value;
};

/// Golden-section minimization of fn on [lo,hi] to x-tolerance xtol.
Refined golden_min(const std::function<double(double)>& fn, double lo, double hi,
                   double xtol) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = fn(x1), f2 = fn(x2);
    while (b - a > xtol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = fn(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = fn(x2);
        }
    }
    double x = 0.5 * (a + b);
    return {x, fn(x)};
}

/// Grid scan (n+1 points on [lo,hi]) followed by golden-section refinement in
/// the bracketing cells around the best grid point.
Refined grid_min(const std::function<double(double)>& fn, double lo, double hi, int n,
                 double xtol) {
    double best = fn(lo);
    int besti = 0;
    for (int i = 1; i <= n; ++i) {
        double x = lo + (hi - lo) * i / n;
        double v = fn(x);
        if (v < best) {
            best = v;
            besti = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, besti - 1) / n;
    double b = lo + (hi - lo) * std::min(n, besti + 1) / n;
    Refined r = golden_min(fn, a, b, xtol);
    if (best < r.value) return {lo + (hi - lo) * besti / n, best};
    return r;
}

}  // namespace

ScalarSystem::ScalarSystem(DegreeDistribution degree, SuccessModel success)
    : degree_(std::move(degree)), success_(std::move(success)) {
    if (success_.kind() == SuccessModel::Kind::NearFar)
        throw std::invalid_argument("scalar admissible systems need a scalar success model");
}

double ScalarSystem::f(double p, double G) const {
    if (p < 0.0 || p > 1.0) throw std::domain_error("p outside [0,1]");
    if (G < 0.0) throw std::domain_error("negative offered load");
    return 1.0 - success_.success_prob(p * G * degree_.mean_degree());
}

double ScalarSystem::f_prime(double p, double G) const {
    if (p < 0.0 || p > 1.0) throw std::domain_error("p outside [0,1]");
    if (G < 0.0) throw std::domain_error("negative offered load");
    double scale = G * degree_.mean_degree();
    return -success_.derivative(p * scale) * scale;
}

double ScalarSystem::h(double p) const { return degree_.edge_gf(p); }
double ScalarSystem::h_prime(double p) const { return degree_.edge_gf_prime(p); }
double ScalarSystem::h_second(double p) const { return degree_.edge_gf_second(p); }

double ScalarSystem::success_integral(double x) const {
    if (success_.has_closed_form_integral()) return success_.integral(x);
    return success_integral_quadrature(x);
}

double ScalarSystem::success_integral_quadrature(double x) const {
    if (x < 0.0) throw std::domain_error("negative integration limit");
    return integrate([this](double r) { return success_.success_prob(r); }, 0.0, x, 1e-10);
}

namespace {

double potential_impl(const ScalarSystem& sys, double p, double G, bool quadrature) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("p outside [0,1]");
    if (G < 0.0) throw std::domain_error("negative offered load");
    if (G == 0.0) return 0.0;
    const double m = sys.degree().mean_degree();
    double lam = sys.degree().edge_gf(p);
    double integral = quadrature ? sys.success_integral_quadrature(G * m * lam)
                                 : sys.success_integral(G * m * lam);
    return lam * (p - 1.0) - sys.degree().gf(p) / m + integral / (G * m);
}

}  // namespace

double potential_value(const ScalarSystem& sys, double p, double G) {
    return potential_impl(sys, p, G, false);
}

double potential_value_quadrature(const ScalarSystem& sys, double p, double G) {
    return potential_impl(sys, p, G, true);
}

double balance_value(const ScalarSystem& sys, double p, double G) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("p outside [0,1]");
    if (G < 0.0) throw std::domain_error("negative offered load");
    return sys.degree().edge_gf_prime(p) *
           (p - 1.0 + sys.success().success_prob(G * sys.degree().gf_prime(p)));
}

double single_system_threshold(const ScalarSystem& sys) {
    // p = 0 is a 0/0 limit and p = 1 sends the inverse to infinity, so the
    // scan stays one grid step inside (0,1).
    const int n = 10000;
    auto ratio = [&sys, n](double p) {
        p = std::min(std::max(p, 1.0 / n), 1.0 - 1.0 / n);
        return sys.success().inverse(1.0 - p) / sys.degree().gf_prime(p);
    };
    Refined r = grid_min(ratio, 1.0 / n, 1.0 - 1.0 / n, n - 2, 1e-6);
    return r.value;
}

namespace {

double min_potential(const ScalarSystem& sys, double G) {
    Refined r = grid_min([&](double p) { return potential_value(sys, p, G); }, 0.0, 1.0,
                         10000, 1e-8);
    return r.value;
}

}  // namespace

double potential_threshold(const ScalarSystem& sys) {
    // U(0;G) = 0 exactly, so on the stable side the true minimum is 0; the
    // refinement around p=0 can land a few ulps below it, hence the guard
    // band on the sign test. G_s* < G_conv* always holds, and starting there
    // keeps 1/G factors away from the cancellation-prone small-G regime.
    auto nonnegative = [&](double G) { return min_potential(sys, G) >= -1e-12; };
    double lo = single_system_threshold(sys);
    if (!nonnegative(lo))
        throw std::runtime_error("potential threshold bracket failure at the low end");
    double hi = 1.0;
    while (nonnegative(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw std::runtime_error("potential threshold bracket failure");
    }
    while (hi - lo > 1e-7) {
        double mid = 0.5 * (lo + hi);
        (nonnegative(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double potential_upper_bound(const ScalarSystem& sys) {
    const double m = sys.degree().mean_degree();
    auto gap = [&](double G) { return sys.success_integral(G * m) - G; };
    double lo = 1e-9;
    if (gap(lo) <= 0.0) throw std::runtime_error("area bound bracket failure at the low end");
    double hi = 1.0;
    while (gap(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e9) throw std::runtime_error("area bound bracket failure");
    }
    while (hi - lo > 1e-7) {
        double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double minimum_unstable_fixed_point(const ScalarSystem& sys, double G) {
    if (!(G > single_system_threshold(sys)))
        throw std::domain_error("minimum unstable fixed point needs G above G_s*");
    const int n = 100000;
    double prev = 0.0;
    for (int i = 1; i <= n; ++i) {
        double p = static_cast<double>(i) / n;
        if (balance_value(sys, p, G) < 0.0) {
            double lo = prev, hi = p;
            while (hi - lo > 1e-8) {
                double mid = 0.5 * (lo + hi);
                (balance_value(sys, mid, G) >= 0.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev = p;
    }
    throw std::runtime_error("balance function has no sign change; G may be below G_s*");
}

double energy_gap(const ScalarSystem& sys, double G) {
    double u = minimum_unstable_fixed_point(sys, G);
    Refined r = grid_min([&](double p) { return potential_value(sys, p, G); }, u, 1.0,
                         10000, 1e-8);
    return r.value;
}

double k_fh_constant(const ScalarSystem& sys, double G) {
    if (G < 0.0) throw std::domain_error("negative offered load");
    // lambda has non-negative coefficients, so its derivatives peak at p=1.
    double hp = sys.h_prime(1.0);
    double hpp = sys.h_second(1.0);
    const double scale = G * sys.degree().mean_degree();
    double dmax;
    switch (sys.success().kind()) {
        case SuccessModel::Kind::SlottedAloha:
            // |P'(x)| = e^{-x}, maximal at x=0.
            dmax = 1.0;
            break;
        case SuccessModel::Kind::DFold: {
            // |P'(x)| = e^{-x} x^{D-1}/(D-1)!, maximal at x = D-1 (clamped).
            double x = std::min(static_cast<double>(sys.success().dfold_D() - 1), scale);
            dmax = std::abs(sys.success().derivative(x));
            break;
        }
        default: {
            dmax = 0.0;
            const int n = 1000000;
            for (int i = 0; i <= n; ++i)
                dmax = std::max(dmax, std::abs(sys.success().derivative(scale * i / n)));
            break;
        }
    }
    double fp = scale * dmax;
    return hp + hp * hp * fp + hpp;
}

double saturation_window_bound(const ScalarSystem& sys, double G) {
    double gs = single_system_threshold(sys);
    double gc = potential_threshold(sys);
    if (!(G > gs && G < gc))
        throw std::domain_error("window bound is defined for G in (G_s*, G_conv*)");
    return k_fh_constant(sys, G) / energy_gap(sys, G);
}

PotentialReport potential_report(const ScalarSystem& sys, int samples) {
    PotentialReport rep;
    rep.G_s_star = single_system_threshold(sys);
    rep.G_conv_star = potential_threshold(sys);
    rep.G_up_star = potential_upper_bound(sys);
    rep.K_fh = k_fh_constant(sys, rep.G_conv_star);
    if (samples > 0) {
        for (int i = 1; i <= samples; ++i) {
            double G = rep.G_s_star +
                       (rep.G_conv_star - rep.G_s_star) * i / (samples + 1);
            double u = minimum_unstable_fixed_point(sys, G);
            double de = energy_gap(sys, G);
            rep.u_of_G.emplace_back(G, u);
            rep.delta_E.emplace_back(G, de);
            rep.window_bound.emplace_back(G, k_fh_constant(sys, G) / de);
        }
    }
    return rep;
}

PotentialProfile potential_profile(const ScalarSystem& sys, double G, int resolution) {
    if (resolution < 2) throw std::invalid_argument("profile needs at least two samples");
    PotentialProfile prof;
    prof.G = G;
    prof.p.reserve(resolution + 1);
    for (int i = 0; i <= resolution; ++i) {
        double p = static_cast<double>(i) / resolution;
        prof.p.push_back(p);
        prof.U.push_back(potential_value(sys, p, G));
        prof.U_prime.push_back(balance_value(sys, p, G));
    }
    for (int i = 1; i <= resolution; ++i) {
        double a = prof.p[i - 1], b = prof.p[i];
        double fa = prof.U[i - 1], fb = prof.U[i];
        if (fa == 0.0 && i == 1) continue;  // U(0;G) = 0 is not a crossing
        if ((fa < 0.0) == (fb < 0.0)) continue;
        while (b - a > 1e-10) {
            double mid = 0.5 * (a + b);
            double fm = potential_value(sys, mid, G);
            if ((fm < 0.0) == (fa < 0.0)) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        prof.zero_crossings.push_back(0.5 * (a + b));
    }
    return prof;
}

}  // namespace cpr
