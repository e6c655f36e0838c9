#include "flmgof/error.hpp"
#include "flmgof/harness/csv_io.hpp"
#include "flmgof/harness/report.hpp"
#include "flmgof/harness/serialization.hpp"
#include "flmgof/harness/study.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

namespace {

using namespace flmgof;
using namespace flmgof::harness;

int exit_code(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::kParseError: return 2;
    case ErrorKind::kNumericFailure: return 3;
    default: return 1;
    }
}

struct StudyFlags {
    std::vector<std::string> scenarios;
    std::vector<int> d;
    std::vector<int> n;
    std::vector<int> M;
    int reps = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::string out;
    std::string config;
    bool fast = false;
};

void add_study_flags(CLI::App* cmd, StudyFlags& f) {
    cmd->add_option("--scenario", f.scenarios, "Scenario ids (S1..S9, HYB)");
    cmd->add_option("--d", f.d, "Deviation levels 0, 1, 2");
    cmd->add_option("--n", f.n, "Sample sizes");
    cmd->add_option("--M", f.M, "Grid sizes");
    cmd->add_option("--reps", f.reps, "Replicates per cell");
    cmd->add_option("--seed", f.seed, "Base seed");
    cmd->add_option("--alpha", f.alpha, "Significance level");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--config", f.config, "JSON study configuration");
    cmd->add_flag("--fast", f.fast, "500 replicates per cell");
}

StudyConfig resolve(const StudyFlags& f, const CLI::App* cmd, StudyConfig base) {
    if (!f.config.empty()) base = load_study_config(f.config);
    if (cmd->count("--scenario")) base.scenarios = f.scenarios;
    if (cmd->count("--d")) base.d_levels = f.d;
    if (cmd->count("--n")) base.n_list = f.n;
    if (cmd->count("--M")) base.M_list = f.M;
    if (f.fast) base.replicates = 500;
    if (cmd->count("--reps")) base.replicates = f.reps;
    if (cmd->count("--seed")) base.seed = f.seed;
    if (cmd->count("--alpha")) base.alpha = f.alpha;
    if (cmd->count("--out")) base.out_dir = f.out;
    base.test.alpha = base.alpha;
    return base;
}

void print_rows(const std::vector<PowerRow>& rows) {
    std::cout << power_csv(rows);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid goodness-of-fit test for the functional linear model"};
    app.require_subcommand(1);

    StudyFlags power_flags;
    auto* power = app.add_subcommand("power", "Monte-Carlo size and power table");
    add_study_flags(power, power_flags);

    StudyFlags grid_flags;
    auto* gridsize = app.add_subcommand("gridsize", "Size and power versus the number of grid points");
    add_study_flags(gridsize, grid_flags);

    std::string curves_path, responses_path, report_path;
    double test_alpha = 0.05;
    std::uint64_t test_seed = 0;
    auto* test = app.add_subcommand("test", "Run the hybrid test on CSV data");
    test->add_option("--curves", curves_path, "Curves CSV (header row = grid nodes)")->required();
    test->add_option("--responses", responses_path, "Responses, one per line")->required();
    test->add_option("--alpha", test_alpha, "Significance level");
    test->add_option("--seed", test_seed, "Seed of the ridge calibration");
    test->add_option("--out", report_path, "JSON report path");

    std::string sim_scenario = "S1", sim_prefix = "sim";
    int sim_d = 0, sim_n = 100, sim_M = 30;
    std::uint64_t sim_seed = 1;
    auto* simulate = app.add_subcommand("simulate", "Write one simulated dataset as CSV");
    simulate->add_option("--scenario", sim_scenario, "Scenario id");
    simulate->add_option("--d", sim_d, "Deviation level");
    simulate->add_option("--n", sim_n, "Sample size");
    simulate->add_option("--M", sim_M, "Grid size");
    simulate->add_option("--seed", sim_seed, "Seed");
    simulate->add_option("--out", sim_prefix, "Output prefix; writes <prefix>_curves.csv and <prefix>_responses.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (power->parsed()) {
            StudyConfig base;
            base.scenarios = {"S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8", "S9"};
            const StudyConfig cfg = resolve(power_flags, power, base);
            const auto rows = run_power_study(cfg, &std::cerr);
            emit_power_outputs(cfg, rows, "power");
            print_rows(rows);
        } else if (gridsize->parsed()) {
            StudyConfig base;
            base.scenarios = gridsize_scenarios();
            base.M_list = {8, 16, 32, 64};
            base.n_list = {100, 150, 200, 250, 300};
            base.d_levels = {0, 1};
            const StudyConfig cfg = resolve(grid_flags, gridsize, base);
            const auto result = run_gridsize_study(cfg, &std::cerr);
            emit_gridsize_outputs(cfg, result);
            print_rows(result.rows);
        } else if (test->parsed()) {
            const Dataset data = ingest_csv(curves_path, responses_path);
            TestConfig cfg;
            cfg.alpha = test_alpha;
            cfg.seed = test_seed;
            if (below_m_rate(static_cast<int>(data.n()), static_cast<int>(data.M()), cfg.smoothing_order))
                std::cerr << "warning: M=" << data.M() << " is below 20 n^(1/2r) for n=" << data.n() << "\n";
            const TestReport rep = hybrid_test(data, cfg);
            std::cout << report_summary(rep);
            if (!report_path.empty()) write_text(report_path, report_json(rep).dump(2) + "\n");
        } else if (simulate->parsed()) {
            const auto& spec = find_scenario(sim_scenario);
            const Dataset data = generate_dataset(spec, sim_d, sim_n, sim_M, sim_seed);
            write_dataset_csv(data, sim_prefix + "_curves.csv", sim_prefix + "_responses.csv");
            std::cout << "wrote " << sim_prefix << "_curves.csv and " << sim_prefix << "_responses.csv\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
