#pragma once

// Declarative run configuration: a TOML document resolved into library
// objects plus a canonical echo of every value actually used.
//
// Resolution is strict. Unknown keys, wrong types and out-of-range values
// raise ConfigError. The echo lists every default explicitly and prints
// floats in shortest round-trip form, so feeding it back reproduces the run.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdm/bd_chain.hpp"
#include "bdm/diagnostics.hpp"
#include "bdm/engine.hpp"

namespace bdm {

enum class Command { Simulate, Couple, CheckErgodicity, GibbsValidate, Diagnose };

const char* command_name(Command c) noexcept;
std::optional<Command> parse_command(std::string_view name) noexcept;

struct RunSettings {
    double horizon = 10.0;
    std::vector<double> checkpoints;
    std::size_t trials = 1;
    std::vector<std::vector<double>> initial; ///< points of X_0
    std::size_t n0 = 0;                       ///< eta_0 of the coupled chain
    std::vector<double> times{1.0, 5.0};      ///< comparison times of the coupling check
    std::size_t log_trajectories = 1;         ///< trajectories written to the output
    std::size_t state_budget = 1u << 20;
    bool validate = true;
    std::size_t validate_probes = 8;
    std::size_t validate_max_count = 30;
};

struct GibbsSettings {
    double burn_in = 200.0;
    std::size_t samples = 10000;
    GibbsCheckOptions options;
};

struct DiagnoseVariant {
    std::string name;
    ModelSpec model;
};

struct DiagnoseSettings {
    double h = 1e-2;
    std::size_t generator_trials = 20000;
    std::vector<TestFunction> test_functions;
    std::vector<std::vector<double>> point; ///< configuration at which the generator is checked
    std::vector<double> domination_times{1.0, 5.0};
    std::size_t domination_trials = 10000;
    std::vector<DiagnoseVariant> variants; ///< the base model first
};

struct ChainSettings {
    SimpleChainSpec chain;
    std::vector<double> gamma{1.0}; ///< initial count law for the rate condition
    std::size_t n_probe = 1000;
};

struct RunConfig {
    Command command = Command::Simulate;
    std::int64_t schema_version = 1;
    std::uint64_t seed = 0;
    std::optional<ModelSpec> model;
    std::optional<ChainSettings> chain;
    RunSettings run;
    std::optional<GibbsSettings> gibbs;
    std::optional<DiagnoseSettings> diagnose;
    std::string echo;       ///< resolved configuration as TOML
    std::string model_hash; ///< FNV-1a of the echo, 16 hex digits

    Configuration initial_state() const;
};

/// Command-line values that take precedence over the document.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
};

RunConfig resolve_config(std::string_view toml_text, Command command, const Overrides& overrides = {});
/// Reads and resolves a file; a missing or unreadable file is a ConfigError.
RunConfig load_config(const std::string& path, Command command, const Overrides& overrides = {});

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text) noexcept;

} // namespace bdm
