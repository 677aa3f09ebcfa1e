#include "cpr/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "cpr/bounds.hpp"
#include "cpr/evolution.hpp"
#include "cpr/explore.hpp"
#include "cpr/mcsim.hpp"
#include "cpr/potential.hpp"
#include "cpr/version.hpp"

namespace cpr {

namespace {

using nlohmann::json;

void check_fields(const json& obj, const std::vector<std::string>& allowed,
                  const std::string& context) {
    if (!obj.is_object()) throw ConfigError(context + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const auto& a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError(context + ": unknown field '" + key + "'");
    }
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("field '" + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key)) throw ConfigError(context + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(context + ": field '" + key + "': " + e.what());
    }
}

SuccessModel parse_success(const json& obj, const std::string& context) {
    check_fields(obj, {"model", "D", "weights"}, context);
    std::string model = require<std::string>(obj, "model", context);
    try {
        if (model == "slotted-aloha") return SuccessModel::slotted_aloha();
        if (model == "dfold") return SuccessModel::dfold(require<int>(obj, "D", context));
        if (model == "dfold-mixture")
            return SuccessModel::dfold_mixture(
                require<std::vector<double>>(obj, "weights", context));
        if (model == "near-far") return SuccessModel::near_far();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(context + ": " + e.what());
    }
    throw ConfigError(context + ": unknown success model '" + model + "'");
}

DegreeDistribution parse_degree(const json& obj, const std::string& context) {
    try {
        if (obj.is_number_integer()) return DegreeDistribution::regular(obj.get<int>());
        check_fields(obj, {"regular", "coeffs"}, context);
        if (obj.contains("regular"))
            return DegreeDistribution::regular(require<int>(obj, "regular", context));
        if (obj.contains("coeffs")) {
            std::map<int, double> coeffs;
            for (const auto& [key, value] : obj.at("coeffs").items())
                coeffs[std::stoi(key)] = value.get<double>();
            return DegreeDistribution(std::move(coeffs));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(context + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(context + ": " + e.what());
    }
    throw ConfigError(context + ": degree needs 'regular' or 'coeffs'");
}

TwoClassPolicy parse_policy(const std::string& name) {
    if (name == "complete-sharing") return TwoClassPolicy::CompleteSharing;
    if (name == "receiver-reservation") return TwoClassPolicy::ReceiverReservation;
    throw ConfigError("unknown policy '" + name + "'");
}

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string csv_header(const json& config) {
    std::ostringstream out;
    out << "# version: " << kVersion << "\n";
    out << "# config: " << config.dump() << "\n";
    return out.str();
}

void run_parallel(int jobs, int threads, const std::function<void(int)>& work) {
    if (threads < 1) threads = 1;
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= jobs) return;
            try {
                work(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min(threads, jobs); ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
}

RunOutput run_threshold_table(const json& cfg) {
    check_fields(cfg, {"kind", "success", "degrees", "windows", "L", "G_lo", "G_hi", "step",
                       "tol", "max_iter", "threads", "seed"},
                 "threshold-table");
    if (!cfg.contains("success")) throw ConfigError("threshold-table: missing field 'success'");
    SuccessModel success = parse_success(cfg.at("success"), "success");
    std::vector<int> degrees = require<std::vector<int>>(cfg, "degrees", "threshold-table");
    std::vector<int> windows = require<std::vector<int>>(cfg, "windows", "threshold-table");
    if (degrees.empty()) throw ConfigError("threshold-table: empty degree list");
    if (windows.empty()) throw ConfigError("threshold-table: empty window list");
    int L = get_or(cfg, "L", 40);
    double step = get_or(cfg, "step", 1e-4);
    double G_lo = get_or(cfg, "G_lo", 0.01);
    EvolveOptions opts;
    opts.tol = get_or(cfg, "tol", 1e-8);
    opts.max_iter = get_or(cfg, "max_iter", 100000);
    int threads = get_or(cfg, "threads", 1);

    const int D = static_cast<int>(degrees.size());
    const int W = static_cast<int>(windows.size());
    // Per degree: W thresholds plus the three potential columns.
    std::vector<std::vector<double>> thresholds(D, std::vector<double>(W, 0.0));
    std::vector<double> gs(D), gconv(D), gup(D), ghi(D);

    // The area-theorem bound caps every coupled threshold, so it sets the
    // scan range. Compute the potential columns first (cheap), then scan all
    // (degree, window) cells in parallel.
    for (int i = 0; i < D; ++i) {
        ScalarSystem sys(DegreeDistribution::regular(degrees[i]), success);
        gs[i] = single_system_threshold(sys);
        gconv[i] = potential_threshold(sys);
        gup[i] = potential_upper_bound(sys);
        ghi[i] = get_or(cfg, "G_hi", gup[i] + 0.05);
    }
    run_parallel(D * W, threads, [&](int cell) {
        int i = cell / W, wi = cell % W;
        auto classify = make_single_class_classifier(DegreeDistribution::regular(degrees[i]),
                                                     success, windows[wi], L, opts);
        thresholds[i][wi] = find_threshold(classify, G_lo, ghi[i], step).G_star;
    });

    RunOutput out;
    out.name = "threshold-table";
    std::ostringstream csv;
    csv << csv_header(cfg) << "d";
    for (int w : windows) csv << ",w=" << w;
    csv << ",G_s,G_conv,G_up\n";
    json rows = json::array();
    for (int i = 0; i < D; ++i) {
        csv << degrees[i];
        json row;
        row["degree"] = degrees[i];
        json tj = json::object();
        for (int wi = 0; wi < W; ++wi) {
            csv << "," << fmt4(thresholds[i][wi]);
            tj["w=" + std::to_string(windows[wi])] = thresholds[i][wi];
        }
        csv << "," << fmt4(gs[i]) << "," << fmt4(gconv[i]) << "," << fmt4(gup[i]) << "\n";
        row["thresholds"] = tj;
        row["G_s_star"] = gs[i];
        row["G_conv_star"] = gconv[i];
        row["G_up_star"] = gup[i];
        rows.push_back(row);
    }
    out.csv = csv.str();
    out.json = {{"version", kVersion}, {"config", cfg}, {"rows", rows}};
    return out;
}

RunOutput run_potential_report(const json& cfg) {
    check_fields(cfg, {"kind", "success", "degree", "samples", "profile_G", "p_resolution",
                       "threads", "seed"},
                 "potential-report");
    if (!cfg.contains("success")) throw ConfigError("potential-report: missing field 'success'");
    if (!cfg.contains("degree")) throw ConfigError("potential-report: missing field 'degree'");
    ScalarSystem sys(parse_degree(cfg.at("degree"), "degree"),
                     parse_success(cfg.at("success"), "success"));
    int samples = get_or(cfg, "samples", 20);
    PotentialReport rep = potential_report(sys, samples);

    RunOutput out;
    out.name = "potential-report";
    std::ostringstream csv;
    csv << csv_header(cfg);
    csv << "# G_s_star: " << fmt4(rep.G_s_star) << "\n";
    csv << "# G_conv_star: " << fmt4(rep.G_conv_star) << "\n";
    csv << "# G_up_star: " << fmt4(rep.G_up_star) << "\n";
    csv << "G,u,delta_E,window_bound\n";
    for (size_t i = 0; i < rep.u_of_G.size(); ++i)
        csv << fmt4(rep.u_of_G[i].first) << "," << fmt4(rep.u_of_G[i].second) << ","
            << fmt4(rep.delta_E[i].second) << "," << fmt4(rep.window_bound[i].second) << "\n";
    out.csv = csv.str();

    json j = {{"version", kVersion},
              {"config", cfg},
              {"G_s_star", rep.G_s_star},
              {"G_conv_star", rep.G_conv_star},
              {"G_up_star", rep.G_up_star},
              {"K_fh", rep.K_fh}};
    json curve = json::array();
    for (size_t i = 0; i < rep.u_of_G.size(); ++i)
        curve.push_back({{"G", rep.u_of_G[i].first},
                         {"u", rep.u_of_G[i].second},
                         {"delta_E", rep.delta_E[i].second},
                         {"window_bound", rep.window_bound[i].second}});
    j["curves"] = curve;
    if (cfg.contains("profile_G")) {
        int res = get_or(cfg, "p_resolution", 1000);
        json profiles = json::array();
        for (double G : require<std::vector<double>>(cfg, "profile_G", "potential-report")) {
            PotentialProfile prof = potential_profile(sys, G, res);
            profiles.push_back({{"G", G},
                                {"p", prof.p},
                                {"U", prof.U},
                                {"U_prime", prof.U_prime},
                                {"zero_crossings", prof.zero_crossings}});
        }
        j["profiles"] = profiles;
    }
    out.json = j;
    return out;
}

RunOutput run_region_2d(const json& cfg) {
    check_fields(cfg, {"kind", "policy", "degree1", "degree2", "windows", "L", "grid_step",
                       "tol", "max_iter", "threads", "G1_max", "G2_max", "seed"},
                 "region-2d");
    TwoClassPolicy policy = parse_policy(require<std::string>(cfg, "policy", "region-2d"));
    if (!cfg.contains("degree1") || !cfg.contains("degree2"))
        throw ConfigError("region-2d: missing degree1/degree2");
    DegreeDistribution d1 = parse_degree(cfg.at("degree1"), "degree1");
    DegreeDistribution d2 = parse_degree(cfg.at("degree2"), "degree2");
    std::vector<int> windows = get_or(cfg, "windows", std::vector<int>{1});
    int L = get_or(cfg, "L", 40);
    double grid_step = get_or(cfg, "grid_step", 0.01);
    EvolveOptions opts;
    opts.tol = get_or(cfg, "tol", 1e-8);
    opts.max_iter = get_or(cfg, "max_iter", 10000);
    int threads = get_or(cfg, "threads", 1);
    double g1max = get_or(cfg, "G1_max", 1.2);
    double g2max = get_or(cfg, "G2_max", 1.2);

    RunOutput out;
    out.name = "region-2d";
    std::ostringstream csv;
    csv << csv_header(cfg) << "w,G1,G2,bound_G2\n";
    json regions = json::array();
    for (int w : windows) {
        RegionBoundary rb =
            region_boundary_2d(policy, d1, d2, w, L, grid_step, opts, threads, g1max, g2max);
        json pts = json::array();
        for (size_t i = 0; i < rb.points.size(); ++i) {
            csv << w << "," << fmt4(rb.points[i].first) << "," << fmt4(rb.points[i].second)
                << "," << fmt4(rb.bound_curve[i].second) << "\n";
            pts.push_back({{"G1", rb.points[i].first},
                           {"G2", rb.points[i].second},
                           {"bound_G2", rb.bound_curve[i].second}});
        }
        regions.push_back({{"w", w}, {"points", pts}});
    }
    out.csv = csv.str();
    out.json = {{"version", kVersion}, {"config", cfg}, {"regions", regions}};
    return out;
}

RunOutput run_bounds_check(const json& cfg) {
    check_fields(cfg, {"kind", "mode", "degree", "weights", "policy", "degree1", "degree2",
                       "G1", "G2", "G1_list", "system", "envelope", "threads", "seed"},
                 "bounds-check");
    std::string mode = require<std::string>(cfg, "mode", "bounds-check");

    RunOutput out;
    out.name = "bounds-check";
    std::ostringstream csv;
    csv << csv_header(cfg);
    if (mode == "mixture-root") {
        if (!cfg.contains("degree")) throw ConfigError("bounds-check: missing field 'degree'");
        DegreeDistribution dist = parse_degree(cfg.at("degree"), "degree");
        std::vector<double> weights =
            require<std::vector<double>>(cfg, "weights", "bounds-check");
        double root;
        try {
            root = mixture_bound_root(dist, weights);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("bounds-check: ") + e.what());
        }
        csv << "quantity,value\nmixture_bound_root," << fmt4(root) << "\n";
        out.json = {{"version", kVersion}, {"config", cfg}, {"mixture_bound_root", root}};
    } else if (mode == "near-far") {
        DegreeDistribution da = parse_degree(cfg.at("degree1"), "degree1");
        DegreeDistribution db = parse_degree(cfg.at("degree2"), "degree2");
        double G1 = require<double>(cfg, "G1", "bounds-check");
        double G2 = require<double>(cfg, "G2", "bounds-check");
        auto verdicts = nearfar_bounds(G1, G2, da, db);
        csv << "envelope,holds,slack\n";
        const char* names[] = {"(1 0)/1", "(0 1)/1", "(1 1)/2"};
        json vj = json::array();
        for (size_t i = 0; i < verdicts.size(); ++i) {
            csv << names[i] << "," << (verdicts[i].holds ? 1 : 0) << ","
                << fmt4(verdicts[i].slack) << "\n";
            vj.push_back({{"envelope", names[i]},
                          {"holds", verdicts[i].holds},
                          {"slack", verdicts[i].slack}});
        }
        out.json = {{"version", kVersion}, {"config", cfg}, {"verdicts", vj}};
    } else if (mode == "two-class") {
        TwoClassPolicy policy = parse_policy(require<std::string>(cfg, "policy", "bounds-check"));
        DegreeDistribution da = parse_degree(cfg.at("degree1"), "degree1");
        DegreeDistribution db = parse_degree(cfg.at("degree2"), "degree2");
        std::vector<double> g1s = require<std::vector<double>>(cfg, "G1_list", "bounds-check");
        csv << "G1,bound_G2\n";
        json pts = json::array();
        for (double G1 : g1s) {
            double g2 = policy_bound_curve(policy, da, db, G1);
            csv << fmt4(G1) << "," << fmt4(g2) << "\n";
            pts.push_back({{"G1", G1}, {"bound_G2", g2}});
        }
        out.json = {{"version", kVersion}, {"config", cfg}, {"curve", pts}};
    } else if (mode == "generic") {
        const json& sj = cfg.contains("system")
                             ? cfg.at("system")
                             : throw ConfigError("bounds-check: missing field 'system'");
        check_fields(sj, {"G", "degrees", "routing", "partition", "success"}, "system");
        CprSystem sys;
        sys.G = require<std::vector<double>>(sj, "G", "system");
        for (const auto& d : sj.at("degrees")) sys.degree.push_back(parse_degree(d, "degrees"));
        sys.routing = require<std::vector<std::vector<double>>>(sj, "routing", "system");
        sys.partition = require<std::vector<double>>(sj, "partition", "system");
        for (const auto& s : sj.at("success")) sys.success.push_back(parse_success(s, "success"));
        const json& ej = cfg.contains("envelope")
                             ? cfg.at("envelope")
                             : throw ConfigError("bounds-check: missing field 'envelope'");
        check_fields(ej, {"b", "B"}, "envelope");
        CapacityEnvelope env{require<std::vector<int>>(ej, "b", "envelope"),
                             require<int>(ej, "B", "envelope")};
        BoundVerdict v;
        try {
            v = outer_bound_satisfied(sys, env);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("bounds-check: ") + e.what());
        }
        csv << "holds,slack\n" << (v.holds ? 1 : 0) << "," << fmt4(v.slack) << "\n";
        out.json = {{"version", kVersion},
                    {"config", cfg},
                    {"holds", v.holds},
                    {"slack", v.slack}};
    } else {
        throw ConfigError("bounds-check: unknown mode '" + mode + "'");
    }
    out.csv = csv.str();
    return out;
}

RunOutput run_simulate(const json& cfg) {
    check_fields(cfg, {"kind", "success", "degree", "G", "L", "w", "T", "rounds", "seed",
                       "tol", "max_iter", "threads"},
                 "simulate");
    if (!cfg.contains("success")) throw ConfigError("simulate: missing field 'success'");
    if (!cfg.contains("degree")) throw ConfigError("simulate: missing field 'degree'");
    SuccessModel success = parse_success(cfg.at("success"), "success");
    DegreeDistribution degree = parse_degree(cfg.at("degree"), "degree");
    double G = require<double>(cfg, "G", "simulate");
    int T = get_or(cfg, "T", 10000);
    int rounds = get_or(cfg, "rounds", 20);
    std::uint64_t seed = get_or(cfg, "seed", std::uint64_t{1});
    int L = get_or(cfg, "L", 1);
    int w = get_or(cfg, "w", 1);

    CprSystem base = CprSystem::single(G, degree, success);
    SimResult res;
    EvolutionTrace de;
    EvolveOptions opts;
    opts.tol = get_or(cfg, "tol", 1e-8);
    opts.max_iter = get_or(cfg, "max_iter", 100000);
    if (w == 1) {
        res = simulate(base, T, rounds, seed);
        de = cpr_evolve(base, opts);
    } else {
        CcprSystem sys = CcprSystem::punctured(base, L, w);
        res = simulate(sys, T, rounds, seed);
        de = ccpr_evolve(sys, opts);
    }
    // Density-evolution prediction averaged over the loaded stages.
    double pred = 0.0;
    int loaded = 0;
    for (int l = 0; l < static_cast<int>(de.final_success[0].size()); ++l) {
        if (w > 1 && l >= L - w + 1) continue;
        pred += de.final_success[0][l];
        ++loaded;
    }
    pred /= loaded;

    RunOutput out;
    out.name = "simulate";
    std::ostringstream csv;
    csv << csv_header(cfg) << "class,success_rate,std_err,users,decoded,de_prediction\n";
    csv << 0 << "," << fmt4(res.success_rate[0]) << "," << fmt4(res.std_err[0]) << ","
        << res.users_total[0] << "," << res.users_decoded[0] << "," << fmt4(pred) << "\n";
    out.csv = csv.str();
    out.json = {{"version", kVersion},
                {"config", cfg},
                {"success_rate", res.success_rate},
                {"std_err", res.std_err},
                {"users_total", res.users_total},
                {"users_decoded", res.users_decoded},
                {"seed", res.seed},
                {"de_prediction", pred}};
    return out;
}

RunOutput run_evolve(const json& cfg) {
    check_fields(cfg, {"kind", "success", "degree", "G", "L", "w", "mode", "tol", "max_iter",
                       "threads", "seed"},
                 "evolve");
    if (!cfg.contains("success")) throw ConfigError("evolve: missing field 'success'");
    if (!cfg.contains("degree")) throw ConfigError("evolve: missing field 'degree'");
    SuccessModel success = parse_success(cfg.at("success"), "success");
    DegreeDistribution degree = parse_degree(cfg.at("degree"), "degree");
    double G = require<double>(cfg, "G", "evolve");
    int L = get_or(cfg, "L", 1);
    int w = get_or(cfg, "w", 1);
    std::string mode = get_or(cfg, "mode", std::string("punctured"));
    EvolveOptions opts;
    opts.tol = get_or(cfg, "tol", 1e-8);
    opts.max_iter = get_or(cfg, "max_iter", 100000);

    CprSystem base = CprSystem::single(G, degree, success);
    EvolutionTrace trace;
    if (w == 1 && L == 1) {
        trace = cpr_evolve(base, opts);
    } else if (mode == "circular") {
        trace = ccpr_evolve(CcprSystem::circular(base, L, w), opts);
    } else if (mode == "punctured") {
        trace = ccpr_evolve(CcprSystem::punctured(base, L, w), opts);
    } else {
        throw ConfigError("evolve: unknown mode '" + mode + "'");
    }

    RunOutput out;
    out.name = "evolve";
    std::ostringstream csv;
    csv << csv_header(cfg) << "stage,q,p,success\n";
    for (size_t l = 0; l < trace.final_q[0].size(); ++l)
        csv << l + 1 << "," << fmt4(trace.final_q[0][l]) << "," << fmt4(trace.final_p[0][l])
            << "," << fmt4(trace.final_success[0][l]) << "\n";
    out.csv = csv.str();
    out.json = {{"version", kVersion},
                {"config", cfg},
                {"converged", trace.converged},
                {"iterations_used", trace.iterations_used},
                {"stable", is_stable(trace)},
                {"q", trace.final_q},
                {"p", trace.final_p},
                {"success", trace.final_success}};
    return out;
}

}  // namespace

void apply_override(json& config, const std::string& spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like key=value: " + spec);
    std::string path = spec.substr(0, eq);
    std::string value = spec.substr(eq + 1);
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;  // plain string
    }
    json* node = &config;
    size_t start = 0;
    while (true) {
        size_t dot = path.find('.', start);
        std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty()) throw ConfigError("override has an empty path segment: " + spec);
        if (dot == std::string::npos) {
            (*node)[key] = parsed;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

Experiment Experiment::from_file(const std::string& path,
                                 const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return from_json(std::move(cfg), overrides);
}

Experiment Experiment::from_json(json config, const std::vector<std::string>& overrides) {
    for (const auto& o : overrides) apply_override(config, o);
    if (!config.is_object()) throw ConfigError("config must be a JSON object");
    Experiment exp;
    exp.kind_ = require<std::string>(config, "kind", "config");
    static const std::vector<std::string> kinds = {"threshold-table", "potential-report",
                                                   "region-2d",       "bounds-check",
                                                   "simulate",        "evolve"};
    bool known = false;
    for (const auto& k : kinds)
        if (exp.kind_ == k) known = true;
    if (!known) throw ConfigError("unknown experiment kind '" + exp.kind_ + "'");
    exp.config_ = std::move(config);
    return exp;
}

RunOutput Experiment::run() const {
    if (kind_ == "threshold-table") return run_threshold_table(config_);
    if (kind_ == "potential-report") return run_potential_report(config_);
    if (kind_ == "region-2d") return run_region_2d(config_);
    if (kind_ == "bounds-check") return run_bounds_check(config_);
    if (kind_ == "simulate") return run_simulate(config_);
    return run_evolve(config_);
}

}  // namespace cpr
