#pragma once

#include "maxmachine/model.hpp"
#include "maxmachine/oracle.hpp"
#include "maxmachine/sampler.hpp"

#include <istream>
#include <string>

namespace maxmachine {

/// Everything a CLI run can be configured with. Defaults: binomial(0.1) code
/// cardinality, beta(10,1) reliabilities, beta(1,1) noise floor, 10% holdout.
struct RunConfig {
    PriorConfig priors;        ///< data layer
    PriorConfig type_priors;   ///< type layer; copies `priors` unless overridden
    GibbsConfig gibbs;
    SynthConfig synth;
    std::size_t dims = 10;
    bool hierarchical = true;
    double holdout_fraction = 0.1;
    double baseline_smoothing = 0.5;
    bool save_samples = true;
    std::size_t per_type_cap = 0; ///< 0 keeps every object
    double min_attr_freq = 0.0;

    void validate() const;
};

/**
 * Parses a flat `key = value` file. Blank lines and `#` comments are ignored.
 * Layer-2 priors use the `layer2.` prefix, generator settings the `synth.`
 * prefix; `synth.scenario = s1|s2|throughput` loads a preset before other
 * synth keys apply. Unknown keys and bad values throw ConfigError.
 */
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const RunConfig& config);

} // namespace maxmachine
