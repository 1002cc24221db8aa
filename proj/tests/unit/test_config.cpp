#include "maxmachine/config.hpp"
#include "maxmachine/errors.hpp"

#include <doctest.h>

#include <sstream>

using namespace maxmachine;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

} // namespace

TEST_CASE("defaults") {
    const RunConfig c = parse("");
    CHECK(c.priors.q_u == 0.1);
    CHECK(c.priors.beta_a == 10.0);
    CHECK(c.priors.beta_b == 1.0);
    CHECK(c.gibbs.convergence_eps == 1e-4);
    CHECK(c.gibbs.convergence_window == 10);
    CHECK_FALSE(c.gibbs.burn_in.has_value());
    CHECK(c.holdout_fraction == 0.1);
    CHECK(c.hierarchical);
}

TEST_CASE("keys, comments and layer-2 overrides") {
    const RunConfig c = parse("# comment\n q_u = 0.2 \n\nlayer2.q_u = 0.05\nburn_in = 30\nseed = 12\n"
                              "parallel = yes\nthreads = 4\n");
    CHECK(c.priors.q_u == 0.2);
    CHECK(c.type_priors.q_u == 0.05);
    CHECK(c.type_priors.beta_a == 10.0);
    CHECK(*c.gibbs.burn_in == 30);
    CHECK(c.gibbs.seed == 12);
    CHECK(c.gibbs.parallel);
    CHECK(c.gibbs.threads == 4);
}

TEST_CASE("layer-2 priors follow layer 1 unless overridden") {
    const RunConfig c = parse("beta_a = 5\n");
    CHECK(c.type_priors.beta_a == 5.0);
}

TEST_CASE("scenario presets apply before explicit synth keys") {
    const RunConfig c = parse("synth.seed = 3\nsynth.scenario = s1\n");
    CHECK(c.synth.n_objects == 2000);
    CHECK(c.synth.n_dims == 8);
    CHECK(c.synth.seed == 3);
    CHECK(parse("synth.scenario = throughput\n").synth.n_objects == 50000);
    CHECK_THROWS_AS(parse("synth.scenario = s9\n"), ConfigError);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(parse("nonsense = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("q_u\n"), ConfigError);
    CHECK_THROWS_AS(parse("q_u = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse("q_u = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("n_samples = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("dims = -3\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("to_text round-trips") {
    RunConfig c = parse("q_u = 0.123456789\nlayer2.beta_b = 2\nburn_in = 7\nsynth.scenario = s2\n");
    const std::string text = to_text(c);
    CHECK(to_text(parse(text)) == text);
}

TEST_CASE("initial reliability") {
    CHECK(*parse("").gibbs.init_reliability == 0.5);
    CHECK_FALSE(parse("init_reliability = mode\n").gibbs.init_reliability.has_value());
    CHECK(*parse("init_reliability = 0.8\n").gibbs.init_reliability == 0.8);
    CHECK_THROWS_AS(parse("init_reliability = 1\n"), ConfigError);
    const RunConfig c = parse("init_reliability = mode\n");
    CHECK(to_text(parse(to_text(c))) == to_text(c));
}
