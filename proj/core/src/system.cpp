#include "cpr/system.hpp"

#include <cmath>
#include <stdexcept>

namespace cpr {

void CprSystem::validate() const {
    const int k = K();
    const int j = J();
    if (k < 1 || j < 1) throw std::invalid_argument("system needs at least one user and receiver class");
    if (static_cast<int>(degree.size()) != k)
        throw std::invalid_argument("degree distribution count does not match K");
    if (static_cast<int>(routing.size()) != k)
        throw std::invalid_argument("routing matrix row count does not match K");
    if (static_cast<int>(success.size()) != j)
        throw std::invalid_argument("success model count does not match J");
    for (double g : G)
        if (g < 0.0 || !std::isfinite(g)) throw std::invalid_argument("offered load must be finite and >= 0");
    for (const auto& row : routing) {
        if (static_cast<int>(row.size()) != j)
            throw std::invalid_argument("routing matrix column count does not match J");
        double sum = 0.0;
        for (double r : row) {
            if (r < 0.0) throw std::invalid_argument("negative routing probability");
            sum += r;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("routing matrix rows must sum to 1");
    }
    double fsum = 0.0;
    for (double f : partition) {
        if (!(f > 0.0)) throw std::invalid_argument("partition fractions must be positive");
        fsum += f;
    }
    if (std::abs(fsum - 1.0) > 1e-12)
        throw std::invalid_argument("partition fractions must sum to 1");
    for (const auto& s : success) {
        if (s.kind() == SuccessModel::Kind::NearFar && k != 2)
            throw std::invalid_argument("near-far receivers require exactly two user classes");
    }
}

CprSystem CprSystem::single(double G, DegreeDistribution degree, SuccessModel success) {
    CprSystem sys;
    sys.G = {G};
    sys.degree = {std::move(degree)};
    sys.routing = {{1.0}};
    sys.partition = {1.0};
    sys.success = {std::move(success)};
    return sys;
}

CcprSystem CcprSystem::circular(CprSystem base, int L, int w) {
    std::vector<std::vector<double>> loads(L, base.G);
    return circular(std::move(base), L, w, std::move(loads));
}

CcprSystem CcprSystem::circular(CprSystem base, int L, int w,
                                std::vector<std::vector<double>> stage_loads) {
    CcprSystem sys;
    sys.base = std::move(base);
    sys.L = L;
    sys.w = w;
    sys.mode = Mode::Circular;
    sys.stage_loads = std::move(stage_loads);
    sys.validate();
    return sys;
}

CcprSystem CcprSystem::punctured(CprSystem base, int L, int w) {
    CcprSystem sys;
    sys.base = std::move(base);
    sys.L = L;
    sys.w = w;
    sys.mode = Mode::Punctured;
    sys.stage_loads.assign(L, sys.base.G);
    for (int l = L - w + 1; l < L; ++l)
        sys.stage_loads[l].assign(sys.base.K(), 0.0);
    sys.validate();
    return sys;
}

void CcprSystem::validate() const {
    base.validate();
    if (L < 1) throw std::invalid_argument("stage count must be >= 1");
    if (w < 1 || w > L) throw std::invalid_argument("window must satisfy 1 <= w <= L");
    if (static_cast<int>(stage_loads.size()) != L)
        throw std::invalid_argument("stage load row count does not match L");
    for (const auto& row : stage_loads) {
        if (static_cast<int>(row.size()) != base.K())
            throw std::invalid_argument("stage load column count does not match K");
        for (double g : row)
            if (g < 0.0 || !std::isfinite(g))
                throw std::invalid_argument("stage load must be finite and >= 0");
    }
    if (mode == Mode::Punctured) {
        for (int l = L - w + 1; l < L; ++l)
            for (double g : stage_loads[l])
                if (g != 0.0)
                    throw std::invalid_argument("punctured mode requires zero loads on the last w-1 stages");
    }
}

}  // namespace cpr
