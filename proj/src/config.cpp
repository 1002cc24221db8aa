#include "maxmachine/config.hpp"

#include "maxmachine/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

namespace maxmachine {

void RunConfig::validate() const {
    priors.validate();
    type_priors.validate();
    gibbs.validate();
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) throw ConfigError("holdout_fraction must lie in (0,1)");
    if (!(baseline_smoothing >= 0.0)) throw ConfigError("baseline_smoothing must be nonnegative");
    if (!(min_attr_freq >= 0.0 && min_attr_freq <= 1.0)) throw ConfigError("min_attr_freq must lie in [0,1]");
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
    }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("config key '" + key + "': '" + v + "' is not a nonnegative integer");
    }
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <typename T> Setter num(T RunConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) {
        if constexpr (std::is_same_v<T, double>) {
            c.*field = to_double(k, v);
        } else {
            c.*field = static_cast<T>(to_uint(k, v));
        }
    };
}

Setter prior(PriorConfig RunConfig::*which, double PriorConfig::*field) {
    return [which, field](RunConfig& c, const std::string& k, const std::string& v) {
        (c.*which).*field = to_double(k, v);
    };
}

template <typename T> Setter gibbs(T GibbsConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) {
        if constexpr (std::is_same_v<T, double>) {
            c.gibbs.*field = to_double(k, v);
        } else if constexpr (std::is_same_v<T, bool>) {
            c.gibbs.*field = to_bool(k, v);
        } else {
            c.gibbs.*field = static_cast<T>(to_uint(k, v));
        }
    };
}

template <typename T> Setter synth(T SynthConfig::*field) {
    return [field](RunConfig& c, const std::string& k, const std::string& v) {
        if constexpr (std::is_same_v<T, double>) {
            c.synth.*field = to_double(k, v);
        } else if constexpr (std::is_same_v<T, std::optional<double>>) {
            c.synth.*field = to_double(k, v);
        } else {
            c.synth.*field = static_cast<T>(to_uint(k, v));
        }
    };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        for (const auto& [prefix, which] : {std::pair{std::string{}, &RunConfig::priors},
                                            std::pair{std::string{"layer2."}, &RunConfig::type_priors}}) {
            t[prefix + "q_u"] = prior(which, &PriorConfig::q_u);
            t[prefix + "q_z"] = prior(which, &PriorConfig::q_z);
            t[prefix + "beta_a"] = prior(which, &PriorConfig::beta_a);
            t[prefix + "beta_b"] = prior(which, &PriorConfig::beta_b);
            t[prefix + "beta_a_clamp"] = prior(which, &PriorConfig::beta_a_clamp);
            t[prefix + "beta_b_clamp"] = prior(which, &PriorConfig::beta_b_clamp);
        }
        t["dims"] = num(&RunConfig::dims);
        t["hierarchical"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.hierarchical = to_bool(k, v);
        };
        t["holdout_fraction"] = num(&RunConfig::holdout_fraction);
        t["baseline_smoothing"] = num(&RunConfig::baseline_smoothing);
        t["save_samples"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            c.save_samples = to_bool(k, v);
        };
        t["per_type_cap"] = num(&RunConfig::per_type_cap);
        t["min_attr_freq"] = num(&RunConfig::min_attr_freq);

        t["max_sweeps"] = gibbs(&GibbsConfig::max_sweeps);
        t["burn_in"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "adaptive") {
                c.gibbs.burn_in.reset();
            } else {
                c.gibbs.burn_in = static_cast<std::size_t>(to_uint(k, v));
            }
        };
        t["init_reliability"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            if (v == "mode") {
                c.gibbs.init_reliability.reset();
            } else {
                c.gibbs.init_reliability = to_double(k, v);
            }
        };
        t["n_samples"] = gibbs(&GibbsConfig::n_samples);
        t["seed"] = gibbs(&GibbsConfig::seed);
        t["convergence_eps"] = gibbs(&GibbsConfig::convergence_eps);
        t["convergence_window"] = gibbs(&GibbsConfig::convergence_window);
        t["sample_stride"] = gibbs(&GibbsConfig::sample_stride);
        t["parallel"] = gibbs(&GibbsConfig::parallel);
        t["threads"] = gibbs(&GibbsConfig::threads);

        t["synth.n_objects"] = synth(&SynthConfig::n_objects);
        t["synth.n_attributes"] = synth(&SynthConfig::n_attributes);
        t["synth.n_dims"] = synth(&SynthConfig::n_dims);
        t["synth.n_types"] = synth(&SynthConfig::n_types);
        t["synth.reliability_lo"] = synth(&SynthConfig::reliability_lo);
        t["synth.reliability_hi"] = synth(&SynthConfig::reliability_hi);
        t["synth.noise_floor"] = synth(&SynthConfig::noise_floor);
        t["synth.q_u"] = synth(&SynthConfig::q_u);
        t["synth.type_dim_density"] = synth(&SynthConfig::type_dim_density);
        t["synth.dims_per_type_min"] = synth(&SynthConfig::dims_per_type_min);
        t["synth.dims_per_type_max"] = synth(&SynthConfig::dims_per_type_max);
        t["synth.type_reliability_lo"] = synth(&SynthConfig::type_reliability_lo);
        t["synth.type_reliability_hi"] = synth(&SynthConfig::type_reliability_hi);
        t["synth.type_noise_floor"] = synth(&SynthConfig::type_noise_floor);
        t["synth.seed"] = synth(&SynthConfig::seed);
        return t;
    }();
    return table;
}

bool is_layer2_key(const std::string& key) { return key.rfind("layer2.", 0) == 0; }

} // namespace

RunConfig parse_config(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }

    RunConfig c;
    // Scenario presets first, then layer-1 keys, then layer-2 overrides on a copy of layer 1.
    for (const auto& [key, value] : entries) {
        if (key != "synth.scenario") continue;
        if (value == "s1") {
            c.synth = scenario_s1();
        } else if (value == "s2") {
            c.synth = scenario_s2();
        } else if (value == "throughput") {
            c.synth = scenario_throughput();
        } else {
            throw ConfigError("unknown scenario '" + value + "'");
        }
    }
    const auto& table = setters();
    for (const auto& [key, value] : entries) {
        if (key == "synth.scenario" || is_layer2_key(key)) continue;
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(c, key, value);
    }
    c.type_priors = c.priors;
    for (const auto& [key, value] : entries) {
        if (!is_layer2_key(key)) continue;
        const auto it = table.find(key);
        if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(c, key, value);
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

namespace {

std::string fmt_double(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

} // namespace

std::string to_text(const RunConfig& c) {
    std::ostringstream out;
    out << std::setprecision(17);
    auto priors = [&](const std::string& prefix, const PriorConfig& p) {
        out << prefix << "q_u = " << p.q_u << '\n'
            << prefix << "q_z = " << p.q_z << '\n'
            << prefix << "beta_a = " << p.beta_a << '\n'
            << prefix << "beta_b = " << p.beta_b << '\n'
            << prefix << "beta_a_clamp = " << p.beta_a_clamp << '\n'
            << prefix << "beta_b_clamp = " << p.beta_b_clamp << '\n';
    };
    priors("", c.priors);
    priors("layer2.", c.type_priors);
    out << "dims = " << c.dims << '\n'
        << "hierarchical = " << (c.hierarchical ? "true" : "false") << '\n'
        << "holdout_fraction = " << c.holdout_fraction << '\n'
        << "baseline_smoothing = " << c.baseline_smoothing << '\n'
        << "save_samples = " << (c.save_samples ? "true" : "false") << '\n'
        << "per_type_cap = " << c.per_type_cap << '\n'
        << "min_attr_freq = " << c.min_attr_freq << '\n';
    const GibbsConfig& g = c.gibbs;
    out << "max_sweeps = " << g.max_sweeps << '\n'
        << "burn_in = " << (g.burn_in ? std::to_string(*g.burn_in) : std::string("adaptive")) << '\n'
        << "init_reliability = " << (g.init_reliability ? fmt_double(*g.init_reliability) : std::string("mode")) << '\n'
        << "n_samples = " << g.n_samples << '\n'
        << "seed = " << g.seed << '\n'
        << "convergence_eps = " << g.convergence_eps << '\n'
        << "convergence_window = " << g.convergence_window << '\n'
        << "sample_stride = " << g.sample_stride << '\n'
        << "parallel = " << (g.parallel ? "true" : "false") << '\n'
        << "threads = " << g.threads << '\n';
    const SynthConfig& s = c.synth;
    out << "synth.n_objects = " << s.n_objects << '\n'
        << "synth.n_attributes = " << s.n_attributes << '\n'
        << "synth.n_dims = " << s.n_dims << '\n'
        << "synth.n_types = " << s.n_types << '\n'
        << "synth.reliability_lo = " << s.reliability_lo << '\n'
        << "synth.reliability_hi = " << s.reliability_hi << '\n'
        << "synth.noise_floor = " << s.noise_floor << '\n'
        << "synth.q_u = " << s.q_u << '\n'
        << "synth.type_dim_density = " << s.type_dim_density << '\n'
        << "synth.dims_per_type_min = " << s.dims_per_type_min << '\n'
        << "synth.dims_per_type_max = " << s.dims_per_type_max << '\n';
    if (s.type_reliability_lo) out << "synth.type_reliability_lo = " << *s.type_reliability_lo << '\n';
    if (s.type_reliability_hi) out << "synth.type_reliability_hi = " << *s.type_reliability_hi << '\n';
    if (s.type_noise_floor) out << "synth.type_noise_floor = " << *s.type_noise_floor << '\n';
    out << "synth.seed = " << s.seed << '\n';
    return out.str();
}

} // namespace maxmachine
