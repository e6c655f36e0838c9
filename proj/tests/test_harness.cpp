#include "flmgof/error.hpp"
#include "flmgof/harness/csv_io.hpp"
#include "flmgof/harness/report.hpp"
#include "flmgof/harness/serialization.hpp"
#include "flmgof/harness/study.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace flmgof;
using namespace flmgof::harness;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& fn, std::string* message = nullptr) {
    try {
        fn();
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::kInvalidArgument;
}

Dataset parse(const std::string& curves, const std::string& responses) {
    std::istringstream c(curves), r(responses);
    return parse_csv(c, r);
}

const std::string kCurves = "0,0.25,0.5,0.75,1\n"
                            "1,2,3,4,5\n"
                            "0.5,0.5,0.5,0.5,0.5\n"
                            "-1,0,1e-3,2.5,7\n";
const std::string kResponses = "0.1\n-0.2\n3\n";

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("flmgof_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

StudyConfig small_config(int reps) {
    StudyConfig cfg;
    cfg.scenarios = {"S1"};
    cfg.d_levels = {0};
    cfg.replicates = reps;
    cfg.seed = 31;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

} // namespace

TEST(Csv, WellFormedFile) {
    const Dataset d = parse(kCurves, kResponses);
    EXPECT_EQ(d.n(), 3);
    EXPECT_EQ(d.M(), 5);
    EXPECT_EQ(d.grid->node(1), 0.25);
    EXPECT_EQ(d.curves(2, 2), 1e-3);
    EXPECT_EQ(d.responses[1], -0.2);
}

TEST(Csv, HeaderMustSpanUnitInterval) {
    std::string msg;
    EXPECT_EQ(kind_of([&] { parse("0,0.5,0.9\n1,2,3\n", "1\n"); }, &msg), ErrorKind::kParseError);
    EXPECT_NE(msg.find("curves:1"), std::string::npos) << msg;
    EXPECT_EQ(kind_of([&] { parse("0.1,0.5,1\n1,2,3\n", "1\n"); }), ErrorKind::kParseError);
    EXPECT_EQ(kind_of([&] { parse("0,0.6,0.5,1\n1,2,3,4\n", "1\n"); }), ErrorKind::kParseError);
}

TEST(Csv, DefectsNameTheLine) {
    std::string msg;
    EXPECT_EQ(kind_of([&] { parse("0,0.5,1\n1,2,3\n4,x,6\n", "1\n2\n"); }, &msg), ErrorKind::kParseError);
    EXPECT_NE(msg.find("curves:3"), std::string::npos) << msg;
    EXPECT_EQ(kind_of([&] { parse("0,0.5,1\n1,2,3\n4,5\n", "1\n2\n"); }, &msg), ErrorKind::kParseError);
    EXPECT_NE(msg.find("curves:3"), std::string::npos) << msg;
    EXPECT_EQ(kind_of([&] { parse("0,0.5,1\n1,2,3,\n", "1\n"); }), ErrorKind::kParseError);
    EXPECT_EQ(kind_of([&] { parse("0,0.5,1\n1,2,3\n", "1\nfoo\n"); }, &msg), ErrorKind::kParseError);
    EXPECT_NE(msg.find("responses:2"), std::string::npos) << msg;
}

TEST(Csv, EmptyAndMismatchedCounts) {
    EXPECT_EQ(kind_of([&] { parse(kCurves, ""); }), ErrorKind::kParseError);
    EXPECT_EQ(kind_of([&] { parse(kCurves, "1\n2\n"); }), ErrorKind::kParseError);
    EXPECT_EQ(kind_of([&] { parse("0,0.5,1\n", "1\n"); }), ErrorKind::kParseError);
    EXPECT_EQ(kind_of([&] { parse("", ""); }), ErrorKind::kParseError);
}

TEST(Csv, RoundTripIsBitIdentical) {
    const Dataset d = generate_dataset(find_scenario("S3"), 1, 25, 17, 6);
    std::ostringstream c, r;
    write_curves_csv(d, c);
    write_responses_csv(d, r);
    const Dataset back = parse(c.str(), r.str());
    EXPECT_TRUE(back.grid->nodes() == d.grid->nodes());
    EXPECT_TRUE(back.curves == d.curves);
    EXPECT_TRUE(back.responses == d.responses);
}

TEST(Csv, FilesAndMissingPaths) {
    const fs::path dir = scratch_dir("csv");
    const Dataset d = generate_dataset(find_scenario("S1"), 0, 12, 10, 2);
    write_dataset_csv(d, (dir / "c.csv").string(), (dir / "r.csv").string());
    const Dataset back = ingest_csv((dir / "c.csv").string(), (dir / "r.csv").string());
    EXPECT_TRUE(back.curves == d.curves);
    EXPECT_EQ(kind_of([&] { ingest_csv((dir / "none.csv").string(), (dir / "r.csv").string()); }),
              ErrorKind::kIoError);
}

TEST(SingleTest, StrongDeviationFromFileRejects) {
    const fs::path dir = scratch_dir("single");
    const Dataset d = generate_dataset(find_scenario("S1"), 2, 100, 30, 17);
    write_dataset_csv(d, (dir / "c.csv").string(), (dir / "r.csv").string());
    const TestReport rep = hybrid_test(ingest_csv((dir / "c.csv").string(), (dir / "r.csv").string()), {});
    EXPECT_TRUE(rep.reject);
    EXPECT_NE(report_summary(rep).find("reject"), std::string::npos);
    const auto j = report_json(rep);
    EXPECT_EQ(j["q_hat"].get<int>(), rep.q_hat);
    EXPECT_EQ(j["p_value"].get<double>(), rep.p_value);
}

TEST(SingleTest, NullFilesMostlyAccept) {
    const auto& spec = find_scenario("S1");
    const double s2 = resolve_noise_variance(spec, 30);
    int accepted = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const Dataset d = generate_dataset(spec, GenerationRequest{0.0, 100, 30, 500u + seed, s2});
        std::ostringstream c, r;
        write_curves_csv(d, c);
        write_responses_csv(d, r);
        accepted += hybrid_test(parse(c.str(), r.str()), {}).p_value > 0.05;
    }
    // Three binomial standard errors below 95 of 100.
    EXPECT_GE(accepted, 88);
}

TEST(Study, SingleReplicateRateIsZeroOrHundred) {
    const auto rows = run_power_study(small_config(1));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].reject_pct == 0.0 || rows[0].reject_pct == 100.0);
    EXPECT_TRUE(rows[0].q0_pct == 0.0 || rows[0].q0_pct == 100.0);
}

TEST(Study, DeterministicGivenSeed) {
    StudyConfig cfg = small_config(20);
    cfg.d_levels = {0, 2};
    const auto a = run_power_study(cfg), b = run_power_study(cfg);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].rejections, b[i].rejections);
        EXPECT_EQ(a[i].q0_count, b[i].q0_count);
        EXPECT_EQ(a[i].v0_rejections, b[i].v0_rejections);
        EXPECT_EQ(a[i].v1_rejections, b[i].v1_rejections);
    }
    StudyContext ctx;
    const auto ca = run_cell(ctx, {"S2", 1, std::nullopt, 50, 20}, cfg);
    const auto cb = run_cell(ctx, {"S2", 1, std::nullopt, 50, 20}, cfg);
    for (std::size_t r = 0; r < ca.outcomes.size(); ++r) EXPECT_EQ(ca.outcomes[r].T_n, cb.outcomes[r].T_n);
}

TEST(Study, AccountingAndBinomialCoherence) {
    StudyConfig cfg = small_config(30);
    cfg.d_levels = {0, 1, 2};
    cfg.scenarios = {"S1", "S4"};
    for (const auto& row : run_power_study(cfg)) {
        EXPECT_EQ(row.replicates, 30);
        EXPECT_EQ(row.reject_pct, row.rejections * 100.0 / row.replicates);
        EXPECT_EQ(row.q0_pct, row.q0_count * 100.0 / row.replicates);
        EXPECT_GE(row.reject_pct, 0.0);
        EXPECT_LE(row.reject_pct, 100.0);
        EXPECT_FALSE(row.flagged());
    }
    StudyContext ctx;
    const auto cell = run_cell(ctx, {"S1", 0, std::nullopt, 100, 30}, cfg);
    int ok = 0, failed = 0;
    for (const auto& o : cell.outcomes) (o.ok ? ok : failed)++;
    EXPECT_EQ(ok + failed, cfg.replicates);
    EXPECT_EQ(failed, cell.row.failures);
}

TEST(Study, FailuresAreCountedNotThrown) {
    StudyConfig cfg = small_config(4);
    cfg.test.smoothing_order = 2;
    StudyContext ctx;
    // n below the pipeline minimum: every replicate fails in validation.
    const auto cell = run_cell(ctx, {"S1", 0, std::nullopt, 8, 30}, cfg);
    EXPECT_EQ(cell.row.failures, 4);
    EXPECT_TRUE(cell.row.flagged());
    EXPECT_FALSE(cell.outcomes[0].error.empty());
}

TEST(Study, InvalidConfig) {
    StudyConfig cfg = small_config(0);
    EXPECT_EQ(kind_of([&] { cfg.validate(); }), ErrorKind::kInvalidArgument);
    cfg = small_config(5);
    cfg.n_list.clear();
    EXPECT_EQ(kind_of([&] { run_power_study(cfg); }), ErrorKind::kInvalidArgument);
}

TEST(Study, MRateAdvisory) {
    EXPECT_TRUE(below_m_rate(100, 30, 2));   // 20 * 100^{1/4} = 63.2
    EXPECT_FALSE(below_m_rate(100, 64, 2));
    EXPECT_TRUE(below_m_rate(100, 150, 1));  // 20 * 100^{1/2} = 200
}

TEST(Gridsize, SingleGridSizeGivesSingleColumn) {
    StudyConfig cfg = small_config(3);
    cfg.scenarios = {"S2", "S8"};
    cfg.M_list = {16};
    cfg.n_list = {60};
    const auto res = run_gridsize_study(cfg);
    ASSERT_EQ(res.size_vs_M.size(), 2u);
    for (const auto& s : res.size_vs_M) {
        EXPECT_EQ(s.x.size(), 1u);
        EXPECT_EQ(s.x[0], 16.0);
    }
    EXPECT_EQ(res.power_vs_M.size(), 2u);
    EXPECT_EQ(res.power_vs_n.size(), 4u);
}

TEST(Gridsize, RejectsScenarioOutsideSelection) {
    StudyConfig cfg = small_config(2);
    cfg.scenarios = {"S1"};
    EXPECT_EQ(kind_of([&] { run_gridsize_study(cfg); }), ErrorKind::kInvalidArgument);
}

TEST(Outputs, CsvHeaderAndRows) {
    PowerRow r;
    r.scenario = "S1";
    r.d = 1;
    r.n = 100;
    r.M = 30;
    r.replicates = 1000;
    r.reject_pct = 98.5;
    r.q0_pct = 99.6;
    r.sec_per_rep = 0.003;
    const std::string csv = power_csv({r});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "scenario,d,n,M,reps,reject_pct,q0_pct,sec_per_rep");
    EXPECT_NE(csv.find("S1,1,100,30,1000,98.5,99.6,"), std::string::npos) << csv;
}

TEST(Outputs, ManifestRecordsSeed) {
    StudyConfig cfg = small_config(2);
    cfg.seed = 1234567890123ULL;
    const auto j = run_manifest(cfg, run_power_study(cfg), "power");
    EXPECT_EQ(j["seed"].get<std::uint64_t>(), 1234567890123ULL);
    EXPECT_EQ(j["config"]["seed"].get<std::uint64_t>(), 1234567890123ULL);
    EXPECT_TRUE(j["versions"].contains("flmgof"));
    EXPECT_EQ(j["rows"].size(), 1u);
}

TEST(Outputs, SvgHasOnePolylinePerSeries) {
    std::vector<Series> series;
    for (const char* id : {"S2", "S4", "S6", "S8", "S9"}) series.push_back({id, {8, 16, 32, 64}, {4, 5, 5, 5}});
    const std::string svg = line_plot_svg("size", "M", "percent", series);
    std::size_t count = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
    EXPECT_EQ(count, 5u);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
}

TEST(Outputs, EmitFilesAndUnwritablePath) {
    const fs::path dir = scratch_dir("emit");
    StudyConfig cfg = small_config(2);
    cfg.out_dir = (dir / "out").string();
    const auto rows = run_power_study(cfg);
    emit_power_outputs(cfg, rows, "power");
    const std::string csv = slurp(dir / "out" / "power.csv");
    EXPECT_EQ(csv.rfind(kPowerCsvHeader, 0), 0u);
    const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    EXPECT_EQ(manifest["seed"].get<std::uint64_t>(), cfg.seed);

    std::ofstream(dir / "blocker") << "x";
    EXPECT_EQ(kind_of([&] { write_text((dir / "blocker" / "f.txt").string(), "x"); }), ErrorKind::kIoError);
    cfg.out_dir = (dir / "blocker" / "sub").string();
    EXPECT_EQ(kind_of([&] { emit_power_outputs(cfg, rows, "power"); }), ErrorKind::kIoError);
    EXPECT_EQ(kind_of([&] { emit_power_outputs(cfg, {}, "power"); }), ErrorKind::kInvalidArgument);
}

TEST(Config, JsonRoundTrip) {
    StudyConfig cfg;
    cfg.scenarios = {"S2", "HYB"};
    cfg.n_list = {100, 250};
    cfg.M_list = {16, 32};
    cfg.replicates = 77;
    cfg.seed = 99;
    cfg.alpha = 0.1;
    cfg.test.kernel = SmoothingKernel::kEpanechnikov;
    cfg.test.standardization = Standardization::kEigenSeries;
    cfg.test.lambda1 = 1e-5;
    const nlohmann::json j = cfg;
    const StudyConfig back = j.get<StudyConfig>();
    EXPECT_EQ(nlohmann::json(back), j);
    EXPECT_EQ(back.test.kernel, SmoothingKernel::kEpanechnikov);
    EXPECT_EQ(back.test.lambda1.value(), 1e-5);
}

TEST(Config, FileErrors) {
    const fs::path dir = scratch_dir("config");
    std::ofstream(dir / "unknown.json") << R"({"replicates": 5, "bogus": 1})";
    std::ofstream(dir / "broken.json") << R"({"replicates": )";
    std::ofstream(dir / "ok.json") << R"({"replicates": 5, "scenarios": ["S4"]})";
    EXPECT_EQ(kind_of([&] { load_study_config((dir / "unknown.json").string()); }), ErrorKind::kParseError);
    EXPECT_EQ(kind_of([&] { load_study_config((dir / "broken.json").string()); }), ErrorKind::kParseError);
    EXPECT_EQ(kind_of([&] { load_study_config((dir / "missing.json").string()); }), ErrorKind::kIoError);
    const StudyConfig ok = load_study_config((dir / "ok.json").string());
    EXPECT_EQ(ok.replicates, 5);
    EXPECT_EQ(ok.scenarios, std::vector<std::string>{"S4"});
    EXPECT_EQ(ok.M_list, std::vector<int>{30});
}
