#pragma once

#include "flmgof/hypotest.hpp"
#include "flmgof/scenario.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace flmgof::harness {

struct StudyConfig {
    std::vector<std::string> scenarios{"S1"};
    std::vector<int> d_levels{0, 1, 2};
    std::vector<int> n_list{100};
    std::vector<int> M_list{30};
    int replicates = 1000;
    std::uint64_t seed = 20240611;
    double alpha = 0.05;
    std::string out_dir = "out";
    TestConfig test;

    /// Throws kInvalidArgument when a list is empty or a count is not positive.
    void validate() const;
};

/// One Monte-Carlo cell. `d` is the deviation level index, or -1 when the
/// cell was run at an explicit delta.
struct PowerRow {
    std::string scenario;
    int d = 0;
    double delta = 0.0;
    int n = 0;
    int M = 0;
    int replicates = 0;
    int rejections = 0;
    int q0_count = 0;
    int failures = 0;
    int v0_rejections = 0;
    int v1_rejections = 0;
    double reject_pct = 0.0;
    double q0_pct = 0.0;
    double sec_per_rep = 0.0;

    double v0_pct() const;
    double v1_pct() const;
    /// More than 1% of the replicates failed.
    bool flagged() const;
};

/// Per-replicate outcome kept for distributional checks.
struct ReplicateOutcome {
    bool ok = false;
    double T_n = 0.0;
    double p_value = 1.0;
    int q_hat = 0;
    bool reject = false;
    double v0_p_value = 1.0;
    double v1_p_value = 1.0;
    std::string error;
};

struct CellSpec {
    std::string scenario;
    int d = 0;                    // -1 with an explicit delta
    std::optional<double> delta;  // overrides the scenario's level d
    int n = 100;
    int M = 30;
};

struct CellResult {
    PowerRow row;
    std::vector<ReplicateOutcome> outcomes;
};

/// Runs `count` tasks on all hardware threads; fn(i) must not share mutable
/// state across indices. The first exception is rethrown after all workers join.
void parallel_for(int count, const std::function<void(int)>& fn);

/// Seed of replicate r. It does not depend on d or M, so cells that differ
/// only in those share their curves and noise draws.
std::uint64_t replicate_seed(std::uint64_t base, const std::string& scenario, int n, int r);

/// True when M < 20 n^{1/(2r)}.
bool below_m_rate(int n, int M, int r);

/// Caches per-grid resources and calibrated noise variances across cells.
class StudyContext {
public:
    explicit StudyContext(std::vector<ScenarioSpec> registry = builtin_scenarios());

    const ScenarioSpec& scenario(const std::string& id) const;
    const GridResources& resources(int M, int smoothing_order);
    double noise_variance(const ScenarioSpec& spec, int M);

private:
    std::vector<ScenarioSpec> registry_;
    std::map<std::pair<int, int>, std::unique_ptr<GridResources>> resources_;
    std::map<std::pair<std::string, int>, double> noise_;
};

CellResult run_cell(StudyContext& ctx, const CellSpec& cell, const StudyConfig& cfg);

/// Logs advisories (M-rate) and flagged cells to `log` when given.
std::vector<PowerRow> run_power_study(const StudyConfig& cfg, std::ostream* log = nullptr);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct GridsizeResult {
    std::vector<PowerRow> rows;
    std::vector<Series> size_vs_M;   // d = 0
    std::vector<Series> power_vs_M;  // d = 1
    std::vector<Series> power_vs_n;  // one series per (scenario, M in {16, 32})
};

/// Scenarios the grid-size study accepts.
const std::vector<std::string>& gridsize_scenarios();
/// Deviation used for the power-versus-n series.
double power_vs_n_delta(const std::string& scenario);

/// Size and power versus M over cfg.M_list at cfg.n_list.front(), and power
/// versus n over cfg.n_list at M in {16, 32}. Throws kInvalidArgument for
/// scenarios outside gridsize_scenarios().
GridsizeResult run_gridsize_study(const StudyConfig& cfg, std::ostream* log = nullptr);

} // namespace flmgof::harness
