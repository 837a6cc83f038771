#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "hiermc/dataset_io.hpp"
#include "hiermc/figures.hpp"
#include "hiermc/parallel.hpp"
#include "hiermc/report.hpp"

namespace fs = std::filesystem;
using namespace hiermc;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_tool(std::vector<std::string> args) {
    args.insert(args.begin(), "hiermc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = hiermc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

const std::string kGuiding = HIERMC_CONFIG_DIR "/guiding_example.json";

/// All elements with the given tag, as attribute maps.
std::vector<std::map<std::string, std::string>> elements(const std::string& svg, const std::string& tag) {
    std::vector<std::map<std::string, std::string>> out;
    const std::regex el("<" + tag + R"(\s([^>]*)/?>)");
    const std::regex attr(R"(([\w-]+)="([^"]*)\")");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), el); it != std::sregex_iterator(); ++it) {
        std::map<std::string, std::string> m;
        const std::string body = (*it)[1];
        for (auto a = std::sregex_iterator(body.begin(), body.end(), attr); a != std::sregex_iterator(); ++a)
            m[(*a)[1]] = (*a)[2];
        out.push_back(std::move(m));
    }
    return out;
}

double num(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

}  // namespace

TEST_CASE("simulate writes the dataset and its descriptor deterministically") {
    TempDir dir("hiermc_cli_sim");
    REQUIRE(run_tool({"simulate", "--config", kGuiding, "--seed", "42", "--out", dir / "a.csv"}).code == 0);
    REQUIRE(run_tool({"simulate", "--config", kGuiding, "--seed", "42", "--out", dir / "b.csv"}).code == 0);
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(slurp(dir / "a.csv").rfind("patient_id,arm,day,state\n", 0) == 0);
    const auto desc = json::parse(slurp(dir / "a.json"));
    CHECK(desc["seed"] == 42);
    CHECK(desc["horizon"] == 28);
    CHECK(desc["rng"]["algorithm"] == "mt19937_64/splitmix64-substreams");
    const auto r = run_tool({"simulate", "--config", kGuiding, "--out", dir / "c.csv"});
    CHECK(r.code == 2);
    CHECK(json::parse(r.err)["error"] == "CONFIG_ERROR");
}

TEST_CASE("analysis subcommands produce reports that round-trip byte for byte") {
    TempDir dir("hiermc_cli_analyses");
    REQUIRE(run_tool({"simulate", "--config", kGuiding, "--seed", "7", "--out", dir / "d.csv"}).code == 0);
    const std::vector<std::vector<std::string>> commands{
        {"gpc", "--data", dir / "d.csv", "--rule", HIERMC_CONFIG_DIR "/rule_guiding.json"},
        {"wmw", "--data", dir / "d.csv"},
        {"door", "--data", dir / "d.csv", "--spec", HIERMC_CONFIG_DIR "/table2.json"},
        {"door", "--data", dir / "d.csv", "--ci-scale", "logit", "--sided", "greater"},
        {"ldoor", "--data", dir / "d.csv", "--weights", "uniform"},
        {"most", "--data", dir / "d.csv", "--model", HIERMC_CONFIG_DIR "/model.json", "--bootstrap", "3", "--seed", "1"},
    };
    for (const auto& c : commands) {
        const auto r = run_tool(c);
        INFO(c[0] << ": " << r.err);
        REQUIRE(r.code == 0);
        const auto report = AnalysisReport::parse(r.out);
        CHECK(report.serialize() == r.out);
        CHECK(report.method == c[0]);
        CHECK(report.dataset["n_e"] == 100);
        CHECK(report.dataset["horizon"] == 28);
        CHECK(report.dataset["fingerprint"].get<std::string>().size() == 16);
        CHECK(report.version == std::string(tool_version()));
    }
}

TEST_CASE("gpc report and tables") {
    TempDir dir("hiermc_cli_gpc");
    REQUIRE(run_tool({"simulate", "--config", kGuiding, "--seed", "3", "--out", dir / "d.csv"}).code == 0);
    REQUIRE(run_tool({"gpc", "--data", dir / "d.csv", "--out", dir / "r.json"}).code == 0);
    const auto report = AnalysisReport::parse(slurp(dir / "r.json"));
    CHECK(report.result["levels"][0]["pairs_entering"] == 10000);
    CHECK(report.result["levels"][1]["pairs_entering"] == report.result["levels"][0]["neutral"]);

    const auto csv = run_tool({"gpc", "--data", dir / "d.csv", "--format", "csv"});
    REQUIRE(csv.code == 0);
    std::istringstream lines(csv.out);
    std::string header, row;
    std::getline(lines, header);
    CHECK(header ==
          "Outcome,Number of Pairs,Proportion Favorable,Proportion Unfavorable,Proportion Neutral,Cumulative NTB,"
          "CI Lower,CI Upper,p-value");
    std::getline(lines, row);
    CHECK(row.rfind("death,10000,", 0) == 0);
    // full precision in CSV: the CI bound parses back to the JSON double
    std::vector<std::string> fields;
    std::stringstream rs(row);
    for (std::string f; std::getline(rs, f, ',');) fields.push_back(f);
    REQUIRE(fields.size() == 9);
    CHECK(num(fields[6]) == report.result["levels"][0]["inference"]["ci"][0].get<double>());

    const auto text = run_tool({"report", "--in", dir / "r.json"});
    REQUIRE(text.code == 0);
    CHECK(text.out.find("death") != std::string::npos);
    CHECK(std::regex_search(text.out, std::regex(R"(10000\s+\d\.\d\d\s)")));
    CHECK(run_tool({"report", "--in", dir / "r.json", "--format", "csv"}).out == csv.out);

    const auto svg = run_tool({"report", "--in", dir / "r.json", "--svg", dir / "figs"});
    CHECK(svg.code == 2);
    CHECK(json::parse(svg.err)["error"] == "METHOD_FIGURE_MISMATCH");
}

TEST_CASE("door proportions sum to one and bar heights parse back exactly") {
    TempDir dir("hiermc_cli_door");
    REQUIRE(run_tool({"simulate", "--config", kGuiding, "--seed", "11", "--out", dir / "d.csv"}).code == 0);
    REQUIRE(run_tool({"door", "--data", dir / "d.csv", "--spec", HIERMC_CONFIG_DIR "/table2.json", "--out", dir / "r.json"})
                .code == 0);
    const auto report = AnalysisReport::parse(slurp(dir / "r.json"));
    std::uint64_t ce = 0, cc = 0;
    for (const auto& c : report.result["categories"]) {
        ce += c["count_e"].get<std::uint64_t>();
        cc += c["count_c"].get<std::uint64_t>();
        CHECK(c["rational_e"].get<std::string>() == std::to_string(c["count_e"].get<int>()) + "/100");
    }
    CHECK(ce == 100);
    CHECK(cc == 100);
    const auto table = run_tool({"report", "--in", dir / "r.json"});
    CHECK(table.out.find("DOOR") != std::string::npos);

    REQUIRE(run_tool({"report", "--in", dir / "r.json", "--svg", dir / "figs"}).code == 0);
    const auto svg = slurp(dir / "figs/door_distribution.svg");
    const auto bars = elements(svg, "rect");
    int matched = 0;
    for (const auto& b : bars) {
        if (!b.count("data-rank")) continue;
        const int rank = std::stoi(b.at("data-rank"));
        const std::string arm = b.at("data-arm");
        const auto& cat = report.result["categories"][static_cast<std::size_t>(rank - 1)];
        const double p = cat[arm == "E" ? "proportion_e" : "proportion_c"].get<double>();
        CHECK(num(b.at("height")) / kProportionPixels == p);
        CHECK(num(b.at("data-proportion")) == p);
        ++matched;
    }
    CHECK(matched == 14);
    // determinism
    CHECK(emit_figures(report)[0].svg == svg);
}

TEST_CASE("most figures carry the bootstrap bounds and occupancy bands") {
    TempDir dir("hiermc_cli_most");
    REQUIRE(run_tool({"simulate", "--config", kGuiding, "--seed", "5", "--out", dir / "d.csv"}).code == 0);
    const std::vector<std::string> cmd{"most", "--data", dir / "d.csv", "--summary", "unwell:1,2,3",
                                       "--bootstrap", "20", "--seed", "9", "--out", dir / "m.json"};
    REQUIRE(run_tool(cmd).code == 0);
    const auto report = AnalysisReport::parse(slurp(dir / "m.json"));
    CHECK(report.seeds == std::vector<std::uint64_t>{9});
    REQUIRE(run_tool({"report", "--in", dir / "m.json", "--svg", dir / "figs"}).code == 0);
    const auto svg = slurp(dir / "figs/mean_time_unwell.svg");
    const auto& ci = report.result["bootstrap"]["ci"];
    int intervals = 0;
    for (const auto& l : elements(svg, "line")) {
        if (!l.count("class") || l.at("class") != "interval") continue;
        const auto& want = ci[l.at("data-arm") == "E" ? "unwell_e" : "unwell_c"];
        CHECK(num(l.at("data-lower")) == want[0].get<double>());
        CHECK(num(l.at("data-upper")) == want[1].get<double>());
        ++intervals;
    }
    CHECK(intervals == 2);
    for (const auto& l : elements(svg, "line")) {
        if (!l.count("class") || l.at("class") != "estimate") continue;
        const auto total = report.result["summary"]["mean_time_unwell"][l.at("data-arm")]["total"].get<double>();
        CHECK(num(l.at("data-value")) == total);
    }
    const auto model_svg = slurp(dir / "figs/sop_model.svg");
    CHECK(elements(model_svg, "polygon").size() >= 6);
    CHECK(fs::exists(dir / "figs/sop_empirical.svg"));
    // no table layout for MOST: report prints JSON
    const auto echo = run_tool({"report", "--in", dir / "m.json"});
    CHECK(echo.out == slurp(dir / "m.json"));
}

TEST_CASE("an all-hospital dataset draws one full-height band per arm") {
    TrialDataset d;
    for (int i = 0; i < 4; ++i) {
        d.trajectories.push_back(fixtures::constant_trajectory("e" + std::to_string(i), Arm::E, 3));
        d.trajectories.push_back(fixtures::constant_trajectory("c" + std::to_string(i), Arm::C, 3));
    }
    AnalysisReport r;
    r.method = "ldoor";
    r.dataset = dataset_summary(d);
    r.config = json::object();
    r.result = {{"empirical_sop", empirical_sop_json(d)}};
    const auto figs = emit_figures(r);
    REQUIRE(figs.size() == 1);
    const auto polys = elements(figs[0].svg, "polygon");
    REQUIRE(polys.size() == 2);
    for (const auto& p : polys) {
        CHECK(p.at("data-state") == "3");
        std::vector<double> ys;
        std::stringstream pts(p.at("points"));
        for (std::string xy; pts >> xy;) ys.push_back(num(xy.substr(xy.find(',') + 1)));
        const auto [lo, hi] = std::minmax_element(ys.begin(), ys.end());
        CHECK(*hi - *lo == kProportionPixels);
    }
}

TEST_CASE("most bootstrap reports are byte-identical across runs") {
    TempDir dir("hiermc_cli_most_det");
    REQUIRE(run_tool({"simulate", "--config", kGuiding, "--seed", "8", "--out", dir / "d.csv"}).code == 0);
    const auto a = run_tool({"most", "--data", dir / "d.csv", "--bootstrap", "1", "--seed", "4"});
    const auto b = run_tool({"most", "--data", dir / "d.csv", "--bootstrap", "1", "--seed", "4"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto missing = run_tool({"most", "--data", dir / "d.csv", "--bootstrap", "5"});
    CHECK(missing.code == 2);
}

TEST_CASE("errors map to exit codes with JSON on stderr") {
    TempDir dir("hiermc_cli_errors");
    {
        std::ofstream(dir / "bad.csv") << "patient_id,arm,day,state\na,E,0,3\na,E,1,1\na,E,2,3\nb,C,0,3\nb,C,1,3\nb,C,2,3\n";
        std::ofstream(dir / "bad.json") << R"({"horizon": 2, "K": 4, "absorbing": [1]})";
    }
    const auto data = run_tool({"gpc", "--data", dir / "bad.csv"});
    CHECK(data.code == 3);
    const auto e = json::parse(data.err);
    CHECK(e["error"] == "ABSORBING_VIOLATION");
    CHECK(e["violations"][0]["patient_id"] == "a");
    CHECK(e["violations"][0]["day"] == 2);

    CHECK(run_tool({"gpc", "--data", dir / "missing.csv"}).code == 2);  // no descriptor
    CHECK(run_tool({"frobnicate"}).code == 2);
    CHECK(run_tool({"gpc"}).code == 2);
    CHECK(run_tool({"door", "--data", dir / "bad.csv", "--ci-scale", "log"}).code == 2);

    // numerical failure: treatment separates the arms completely
    {
        std::ofstream csv(dir / "sep.csv");
        csv << "patient_id,arm,day,state\n";
        for (int i = 0; i < 10; ++i)
            for (int day = 0; day <= 4; ++day) {
                csv << "e" << i << ",E," << day << ',' << (day == 0 ? 3 : day % 2 ? 4 : 3) << '\n';
                csv << "c" << i << ",C," << day << ',' << (day == 0 ? 3 : day % 2 ? 2 : (i == 0 && day == 4 ? 1 : 3))
                    << '\n';
            }
        std::ofstream(dir / "sep.json") << R"({"horizon": 4, "K": 4, "absorbing": [1]})";
    }
    const auto num_fail = run_tool({"most", "--data", dir / "sep.csv"});
    CHECK(num_fail.code == 4);
    CHECK(json::parse(num_fail.err)["error"].get<std::string>().size() > 0);

    std::ofstream(dir / "w.txt") << "1,2,3";
    REQUIRE(run_tool({"simulate", "--config", kGuiding, "--seed", "1", "--out", dir / "d.csv"}).code == 0);
    const auto w = run_tool({"ldoor", "--data", dir / "d.csv", "--weights", dir / "w.txt"});
    CHECK(w.code == 2);
    CHECK(json::parse(w.err)["error"] == "WEIGHT_LENGTH_MISMATCH");
}

TEST_CASE("HIERMC_THREADS caps the worker count") {
    const int saved = parallel::max_threads();
    ::setenv("HIERMC_THREADS", "1", 1);
    run_tool({"--version"});
    CHECK(parallel::max_threads() == 1);
    ::unsetenv("HIERMC_THREADS");
    parallel::set_max_threads(saved);
}
