#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "epibsl/dynamics.hpp"
#include "epibsl/metrics.hpp"

namespace epibsl {

/// Malformed or invalid configuration. The message starts with "<source>:<line>: <field>".
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One sweep axis: a name and its raw JSON values, kept as compact JSON text.
struct SweepAxis {
    std::string name;
    std::vector<std::string> values;
};

struct RunConfig {
    explicit RunConfig(Instance inst) : instance(std::move(inst)) {}

    Instance instance;
    std::int64_t episodes = 200;
    std::int64_t replicates = 100;
    std::uint64_t master_seed = 0;
    SamplingMode mode = SamplingMode::MuFirst;

    double fail_c = 0.05;
    std::optional<std::int64_t> fail_n;  // empty means "auto"

    std::optional<PosteriorState> posterior;  // solve: start from this history instead of the prior
    std::optional<MuVec> mu;                  // gap: realized means

    std::string runs_csv = "runs.csv";
    std::string curve_csv = "regret_curve.csv";
    std::string sweep_csv = "sweep.csv";
    std::string verify_csv = "verify.csv";

    std::vector<SweepAxis> axes;  // sorted by name
    std::int64_t max_cells = 10000;

    /// The config's JSON text with the instance block, used to derive sweep cells.
    std::string source_json;

    /// FAIL parameters with "auto" N resolved through n_prior.
    FailureParams failure_params() const;
    FailureParams failure_params(const Instance& inst) const;
};

/// Parses a config document. `source` names it in error messages.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");

/// Reads and parses a config file.
RunConfig load_config(const std::string& path);

/// Pull-bound variant that applies to `inst`: Symmetric for permutation-invariant f,
/// GeneralM2 for other f with m = 2. Throws std::invalid_argument otherwise.
TheoremVariant default_variant(const Instance& inst);

/// Sweep cell: the axis values (compact JSON) and the config they produce.
struct SweepCell {
    std::vector<std::string> values;  // parallel to RunConfig::axes; strings unquoted, else JSON
    RunConfig config;
};

/// Cartesian product of the axes, last axis varying fastest. Throws ConfigError when the
/// grid exceeds max_cells or a cell does not validate.
std::vector<SweepCell> expand_sweep(const RunConfig& cfg, const std::string& source = "<config>");

}  // namespace epibsl
