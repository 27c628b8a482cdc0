// Copyright 2026 The isocollapse Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "isocollapse/cli.hpp"

using namespace isocollapse;
using namespace isocollapse::cli;

namespace {

RunConfig parse(std::vector<std::string> args) {
    args.insert(args.begin(), "isocollapse");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    return parse_config(static_cast<int>(argv.size()), argv.data());
}

std::string key_of(std::vector<std::string> args) {
    try {
        parse(std::move(args));
    } catch (const UsageError& e) {
        return e.key();
    }
    return "";
}

std::string run_to_string(const RunConfig& rc, int* status = nullptr) {
    std::ostringstream out;
    const int code = run(rc, out);
    if (status) *status = code;
    return out.str();
}

} // namespace

TEST_CASE("flags resolve into a run configuration") {
    const RunConfig rc = parse({"--experiment", "born", "--theta", "0.5", "--lambda", "2",
                                "--volume", "3", "--dstep", "0.05", "--trials", "77", "--seed",
                                "9", "--ordering", "region2-first", "--threads", "3"});
    CHECK(rc.kind == ExperimentKind::born);
    CHECK(rc.experiment.theta == 0.5);
    CHECK(rc.experiment.lambda == 2.0);
    CHECK(rc.experiment.volume == 3.0);
    CHECK(rc.experiment.dstep == 0.05);
    CHECK(rc.experiment.trials == 77);
    CHECK(rc.experiment.seed == 9);
    CHECK(rc.experiment.ordering == Ordering::region2_first);
    CHECK(rc.experiment.threads == 3);
    CHECK_FALSE(rc.text);
}

TEST_CASE("every experiment name parses") {
    for (const char* name : {"born", "correlation", "chsh", "param-independence", "foliation",
                             "filtering-check", "martingale", "measure-change", "convergence",
                             "charfn"}) {
        CHECK(to_string(parse({"--experiment", name, "--seed", "1"}).kind) == name);
    }
}

TEST_CASE("experiment-specific defaults") {
    CHECK(parse({"--experiment", "martingale", "--seed", "1"}).experiment.volume == 0.25);
    CHECK(parse({"--experiment", "measure-change", "--seed", "1"}).experiment.volume == 0.5);
    CHECK(parse({"--experiment", "charfn", "--seed", "1"}).experiment.volume == 0.5);
    CHECK(parse({"--experiment", "convergence", "--seed", "1"}).experiment.volume == 1.0);
    CHECK(parse({"--experiment", "born", "--seed", "1"}).experiment.volume == 5.0);
    CHECK(parse({"--experiment", "martingale", "--seed", "1", "--volume", "0.1"})
              .experiment.volume == 0.1);
}

TEST_CASE("usage errors name the offending key") {
    CHECK(key_of({"--experiment", "born"}) == "seed");
    CHECK(key_of({"--seed", "1"}) == "experiment");
    CHECK(key_of({"--experiment", "nope", "--seed", "1"}) == "experiment");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--theta", "-1"}) == "theta");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--theta", "4"}) == "theta");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--theta", "abc"}) == "theta");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--lambda", "0"}) == "lambda");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--volume", "-2"}) == "volume");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--dstep", "0"}) == "dstep");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--trials", "0"}) == "trials");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--trials", "1.5"}) == "trials");
    CHECK(key_of({"--experiment", "born", "--seed", "-3"}) == "seed");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--threads", "0"}) == "threads");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--ordering", "up"}) == "ordering");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--format", "xml"}) == "format");
    CHECK(key_of({"--experiment", "chsh", "--seed", "1", "--angles", "0.1,0.2"}) == "angles");
    CHECK(key_of({"--experiment", "correlation", "--seed", "1", "--angles", "0.1,9"}) ==
          "angles");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--bogus", "1"}) == "argv");
    CHECK(key_of({"--experiment", "born", "--seed", "1", "--config", "/nonexistent.json"}) ==
          "config");
    CHECK_THROWS_AS(parse({"--help"}), HelpRequested);
}

TEST_CASE("config files and precedence") {
    const nlohmann::json doc = {{"experiment", "born"}, {"theta", 1.25}, {"seed", 4},
                                {"trials", "100"}};
    const Settings file = parse_config_json(doc);
    CHECK(file.at("trials") == "100");
    const RunConfig from_file = resolve(file, {});
    CHECK(from_file.experiment.theta == 1.25);
    CHECK(from_file.experiment.seed == 4);
    const RunConfig overridden = resolve(file, {{"theta", "0.5"}, {"seed", "8"}});
    CHECK(overridden.experiment.theta == 0.5);
    CHECK(overridden.experiment.seed == 8);
    CHECK(overridden.experiment.trials == 100);

    CHECK_THROWS_AS(parse_config_json(nlohmann::json::array()), UsageError);
    CHECK_THROWS_AS(parse_config_json({{"theta", {1, 2}}}), UsageError);
    CHECK_THROWS_AS(parse_config_json({{"colour", "blue"}}), UsageError);
    CHECK_THROWS_AS(parse_config_json({{"seed", true}}), UsageError);

    const std::string path = "isocollapse_cli_test_config.json";
    {
        std::ofstream out(path);
        out << R"({"experiment": "charfn", "seed": 3, "trials": 200})";
    }
    const RunConfig rc = parse({"--config", path, "--trials", "300"});
    CHECK(rc.kind == ExperimentKind::charfn);
    CHECK(rc.experiment.trials == 300);
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK(key_of({"--config", path}) == "config");
    std::remove(path.c_str());
}

TEST_CASE("echo holds only result-determining settings") {
    RunConfig rc = parse({"--experiment", "born", "--seed", "1", "--threads", "4", "--out",
                          "x.json"});
    const nlohmann::json e = echo(rc);
    CHECK_FALSE(e.contains("threads"));
    CHECK_FALSE(e.contains("out"));
    CHECK(e.at("experiment") == "born");
    CHECK(e.at("seed") == 1);
}

TEST_CASE("reports are reproducible across runs and thread counts") {
    for (const char* kind : {"born", "foliation", "measure-change", "filtering-check"}) {
        RunConfig rc = parse({"--experiment", kind, "--seed", "42", "--trials", "300"});
        const std::string a = run_to_string(rc);
        const std::string b = run_to_string(rc);
        rc.experiment.threads = 3;
        const std::string c = run_to_string(rc);
        CHECK(a == b);
        CHECK(a == c);
        CHECK(nlohmann::json::parse(a).at("config").at("experiment") == kind);
    }
}

TEST_CASE("status codes") {
    int code = -1;
    const std::string small =
        run_to_string(parse({"--experiment", "born", "--seed", "1", "--trials", "50"}), &code);
    CHECK(code == 0);
    CHECK(nlohmann::json::parse(small).at("status") == "inconclusive");

    // Two trials of a filtering check is still a deterministic pass.
    run_to_string(parse({"--experiment", "filtering-check", "--seed", "1", "--trials", "2"}),
                  &code);
    CHECK(code == 0);

    const std::string text = run_to_string(
        parse({"--experiment", "chsh", "--seed", "1", "--trials", "100", "--format", "text"}),
        &code);
    CHECK(text.find("status ") != std::string::npos);
    CHECK(text.find("CHSH") != std::string::npos);
}

TEST_CASE("output files") {
    const std::string out = "isocollapse_cli_test_out.json";
    const std::string dump = "isocollapse_cli_test_trials.csv";
    const RunConfig rc = parse({"--experiment", "born", "--seed", "5", "--trials", "20", "--out",
                                out, "--dump-trials", dump});
    CHECK(run_to_string(rc).empty());
    std::ifstream j(out);
    CHECK(nlohmann::json::parse(j).contains("result"));
    std::ifstream c(dump);
    std::string header;
    std::getline(c, header);
    CHECK(header.rfind("trial,s1,s2", 0) == 0);
    std::remove(out.c_str());
    std::remove(dump.c_str());
}
