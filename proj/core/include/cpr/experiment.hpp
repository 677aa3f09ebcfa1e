#ifndef CPR_EXPERIMENT_HPP
#define CPR_EXPERIMENT_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace cpr {

/// Raised for malformed configs (unknown fields, bad values, parse errors).
/// The CLI maps this to exit code 2; other exceptions map to 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunOutput {
    std::string name;      // artifact base name, e.g. "threshold-table"
    std::string csv;       // CSV body including provenance comments
    nlohmann::json json;   // full-precision results + resolved config
};

/// A validated experiment description. Configs are JSON objects with a
/// `kind` field selecting the computation; unknown fields are rejected.
class Experiment {
public:
    static Experiment from_file(const std::string& path,
                                const std::vector<std::string>& overrides = {});
    static Experiment from_json(nlohmann::json config,
                                const std::vector<std::string>& overrides = {});

    const nlohmann::json& config() const { return config_; }
    const std::string& kind() const { return kind_; }

    /// Runs the experiment. Throws ConfigError for config-level problems and
    /// std::runtime_error for numeric failures.
    RunOutput run() const;

private:
    nlohmann::json config_;
    std::string kind_;
};

/// Applies one `--set key=value` override (dotted path) to a JSON object.
void apply_override(nlohmann::json& config, const std::string& spec);

}  // namespace cpr

#endif
