// Runs the command-line tool end to end on small inputs.

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(MAXMACHINE_CLI_PATH) + " " + args + " 2>cli_stderr.txt";
    return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

void write_small_dataset() {
    std::string pairs, types;
    for (int n = 0; n < 10; ++n) {
        for (int d = 0; d < 5; ++d) {
            if ((n + d) % 3 == 0 || (n < 5 && d < 2)) pairs += "o" + std::to_string(n) + ",a" + std::to_string(d) + "\n";
        }
        types += "o" + std::to_string(n) + (n < 5 ? ",red\n" : ",blue\n");
    }
    write("small_pairs.csv", pairs);
    write("small_types.csv", types);
    write("small.cfg", "max_sweeps = 40\nn_samples = 5\n");
}

} // namespace

TEST_CASE("train then predict every cell") {
    write_small_dataset();
    REQUIRE(run("train --pairs small_pairs.csv --types small_types.csv --dims 3 --config small.cfg "
                "--seed 1 --out small_model.json") == 0);
    REQUIRE(run("predict --model small_model.json --all --out small_pred.csv") == 0);
    const auto rows = lines("small_pred.csv");
    REQUIRE(rows.size() == 51);
    CHECK(rows[0] == "object_id,attribute_id,p");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double p = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
        CHECK((p > 0.0 && p < 1.0));
    }

    write("small_cells.csv", "o0,a1\no9,a4\n");
    REQUIRE(run("predict --model small_model.json --cells small_cells.csv --out small_cells_pred.csv") == 0);
    CHECK(lines("small_cells_pred.csv").size() == 3);
    write("bad_cells.csv", "o0,zzz\n");
    CHECK(run("predict --model small_model.json --cells bad_cells.csv") != 0);
}

TEST_CASE("report codes") {
    write_small_dataset();
    REQUIRE(run("train --pairs small_pairs.csv --types small_types.csv --dims 3 --config small.cfg "
                "--out small_model.json") == 0);
    REQUIRE(run("report --model small_model.json --codes --out codes.csv") == 0);
    const auto rows = lines("codes.csv");
    REQUIRE(rows.size() == 1 + 3 + 1);
    // Attributes keep their first-appearance order from the pairs file.
    CHECK(rows[0] == "dim,a0,a1,a3,a2,a4,nu,lambda_hat");
    CHECK(rows.back().rfind("clamped,", 0) == 0);

    REQUIRE(run("report --model small_model.json --attribute a0 --top-k 2 --out app.csv") == 0);
    const auto app = lines("app.csv");
    REQUIRE(app.size() == 3);
    CHECK(app[0] == "type,mean_p,mean_p_absent,n_products");
}

TEST_CASE("simulate then evaluate") {
    write("sim.cfg", "synth.scenario = s2\nsynth.n_objects = 200\nmax_sweeps = 40\nn_samples = 5\n");
    REQUIRE(run("simulate --config sim.cfg --out-prefix sim") == 0);
    CHECK_FALSE(slurp("sim_truth.json").empty());
    REQUIRE(run("evaluate --pairs sim_pairs.csv --types sim_types.csv --config sim.cfg --dims 4 "
                "--out report.csv") == 0);
    const auto rows = lines("report.csv");
    REQUIRE(rows.size() >= 2);
    CHECK(rows[0] == "cluster,auc_model,auc_baseline,delta,n_cells");
    CHECK(rows[1].rfind("all,", 0) == 0);
}

TEST_CASE("errors exit non-zero") {
    CHECK(run("train --pairs missing.csv --types missing.csv --out x.json") != 0);
    write("junk.json", "{\"format_version\": 1");
    CHECK(run("predict --model junk.json --all") != 0);
    write("bad.cfg", "nonsense = 1\n");
    write_small_dataset();
    CHECK(run("train --pairs small_pairs.csv --types small_types.csv --config bad.cfg --out x.json") != 0);
    CHECK(run("frobnicate") != 0);
}
