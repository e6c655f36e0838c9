#include "flmgof/harness/study.hpp"

#include "flmgof/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace flmgof::harness {

void StudyConfig::validate() const {
    if (scenarios.empty() || d_levels.empty() || n_list.empty() || M_list.empty())
        fail(ErrorKind::kInvalidArgument, "study lists must be non-empty");
    if (replicates < 1) fail(ErrorKind::kInvalidArgument, "replicates must be >= 1");
    for (int d : d_levels)
        if (d < 0 || d > 2) fail(ErrorKind::kInvalidArgument, "deviation level must be 0, 1 or 2");
    for (int n : n_list)
        if (n < 1) fail(ErrorKind::kInvalidArgument, "sample sizes must be positive");
    for (int M : M_list)
        if (M < 2) fail(ErrorKind::kInvalidArgument, "grid sizes must be >= 2");
    test.validate(n_list.front());
}

double PowerRow::v0_pct() const { return 100.0 * v0_rejections / replicates; }
double PowerRow::v1_pct() const { return 100.0 * v1_rejections / replicates; }
bool PowerRow::flagged() const { return failures * 100 > replicates; }

void parallel_for(int count, const std::function<void(int)>& fn) {
    const int workers = std::max(1, std::min<int>(count, static_cast<int>(std::thread::hardware_concurrency())));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto work = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!first) first = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

std::uint64_t replicate_seed(std::uint64_t base, const std::string& scenario, int n, int r) {
    return derive_seed(base, {hash_label(scenario), static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(r)});
}

bool below_m_rate(int n, int M, int r) {
    return M < 20.0 * std::pow(static_cast<double>(n), 1.0 / (2.0 * r));
}

StudyContext::StudyContext(std::vector<ScenarioSpec> registry) : registry_(std::move(registry)) {}

const ScenarioSpec& StudyContext::scenario(const std::string& id) const { return find_scenario(id, registry_); }

const GridResources& StudyContext::resources(int M, int smoothing_order) {
    auto& slot = resources_[{M, smoothing_order}];
    if (!slot) slot = std::make_unique<GridResources>(make_uniform_grid(M), smoothing_order);
    return *slot;
}

double StudyContext::noise_variance(const ScenarioSpec& spec, int M) {
    const auto key = std::make_pair(spec.id, M);
    auto it = noise_.find(key);
    if (it != noise_.end()) return it->second;
    const double v = resolve_noise_variance(spec, M);
    noise_.emplace(key, v);
    return v;
}

CellResult run_cell(StudyContext& ctx, const CellSpec& cell, const StudyConfig& cfg) {
    const ScenarioSpec& spec = ctx.scenario(cell.scenario);
    if (!cell.delta && (cell.d < 0 || cell.d > 2)) fail(ErrorKind::kInvalidArgument, "deviation level must be 0, 1 or 2");
    const double delta = cell.delta ? *cell.delta : spec.delta_levels[static_cast<std::size_t>(cell.d)];
    const double noise = ctx.noise_variance(spec, cell.M);
    const GridResources& res = ctx.resources(cell.M, cfg.test.smoothing_order);

    TestConfig test = cfg.test;
    test.alpha = cfg.alpha;

    CellResult out;
    out.outcomes.resize(static_cast<std::size_t>(cfg.replicates));
    const auto start = std::chrono::steady_clock::now();
    parallel_for(cfg.replicates, [&](int r) {
        auto& o = out.outcomes[static_cast<std::size_t>(r)];
        const std::uint64_t seed = replicate_seed(cfg.seed, cell.scenario, cell.n, r);
        try {
            Dataset data = generate_dataset(spec, GenerationRequest{delta, cell.n, cell.M, seed, noise});
            data.grid = res.grid();
            TestConfig local = test;
            local.seed = seed;
            const TestReport rep = hybrid_test(data, local, res);
            o.ok = true;
            o.T_n = rep.T_n;
            o.p_value = rep.p_value;
            o.q_hat = rep.q_hat;
            o.reject = rep.reject;
            o.v0_p_value = rep.components.v0_p_value;
            o.v1_p_value = rep.components.v1_p_value;
        } catch (const Error& e) {
            o.error = e.what();
        }
    });
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    PowerRow& row = out.row;
    row.scenario = cell.scenario;
    row.d = cell.delta ? -1 : cell.d;
    row.delta = delta;
    row.n = cell.n;
    row.M = cell.M;
    row.replicates = cfg.replicates;
    for (const auto& o : out.outcomes) {
        if (!o.ok) {
            ++row.failures;
            continue;
        }
        row.rejections += o.reject;
        row.q0_count += o.q_hat == 0;
        row.v0_rejections += o.v0_p_value < cfg.alpha;
        row.v1_rejections += o.v1_p_value < cfg.alpha;
    }
    row.reject_pct = 100.0 * row.rejections / row.replicates;
    row.q0_pct = 100.0 * row.q0_count / row.replicates;
    row.sec_per_rep = elapsed / row.replicates;
    return out;
}

namespace {

void advise(std::ostream* log, int n, int M, int r) {
    if (log && below_m_rate(n, M, r))
        *log << "warning: M=" << M << " is below 20 n^(1/2r) = " << 20.0 * std::pow(n, 1.0 / (2.0 * r))
             << " for n=" << n << "\n";
}

void report_flag(std::ostream* log, const PowerRow& row) {
    if (log && row.flagged())
        *log << "warning: " << row.scenario << " d=" << row.d << " n=" << row.n << " M=" << row.M << " had "
             << row.failures << " failed replicates out of " << row.replicates << "\n";
}

} // namespace

std::vector<PowerRow> run_power_study(const StudyConfig& cfg, std::ostream* log) {
    cfg.validate();
    StudyContext ctx;
    std::vector<PowerRow> rows;
    for (const auto& id : cfg.scenarios)
        for (int n : cfg.n_list)
            for (int M : cfg.M_list) {
                advise(log, n, M, cfg.test.smoothing_order);
                for (int d : cfg.d_levels) {
                    rows.push_back(run_cell(ctx, CellSpec{id, d, std::nullopt, n, M}, cfg).row);
                    report_flag(log, rows.back());
                }
            }
    return rows;
}

const std::vector<std::string>& gridsize_scenarios() {
    static const std::vector<std::string> ids{"S2", "S4", "S6", "S8", "S9"};
    return ids;
}

double power_vs_n_delta(const std::string& scenario) {
    if (scenario == "S2") return -0.5;
    if (scenario == "S4") return -1.0;
    if (scenario == "S6") return 0.2;
    if (scenario == "S8") return -0.01;
    if (scenario == "S9") return 2.5;
    fail(ErrorKind::kInvalidArgument, "no power-versus-n deviation for scenario " + scenario);
}

GridsizeResult run_gridsize_study(const StudyConfig& cfg, std::ostream* log) {
    cfg.validate();
    const auto& allowed = gridsize_scenarios();
    for (const auto& id : cfg.scenarios)
        if (std::find(allowed.begin(), allowed.end(), id) == allowed.end())
            fail(ErrorKind::kInvalidArgument, "grid-size study does not cover scenario " + id);

    StudyContext ctx;
    GridsizeResult out;
    const int n0 = cfg.n_list.front();
    for (const auto& id : cfg.scenarios) {
        Series size{id, {}, {}};
        Series power{id, {}, {}};
        for (int M : cfg.M_list) {
            advise(log, n0, M, cfg.test.smoothing_order);
            for (int d : {0, 1}) {
                const PowerRow row = run_cell(ctx, CellSpec{id, d, std::nullopt, n0, M}, cfg).row;
                report_flag(log, row);
                Series& s = d == 0 ? size : power;
                s.x.push_back(M);
                s.y.push_back(row.reject_pct);
                out.rows.push_back(row);
            }
        }
        out.size_vs_M.push_back(std::move(size));
        out.power_vs_M.push_back(std::move(power));
    }
    for (const auto& id : cfg.scenarios)
        for (int M : {16, 32}) {
            Series s{id + " M=" + std::to_string(M), {}, {}};
            for (int n : cfg.n_list) {
                const PowerRow row = run_cell(ctx, CellSpec{id, -1, power_vs_n_delta(id), n, M}, cfg).row;
                report_flag(log, row);
                s.x.push_back(n);
                s.y.push_back(row.reject_pct);
                out.rows.push_back(row);
            }
            out.power_vs_n.push_back(std::move(s));
        }
    return out;
}

} // namespace flmgof::harness
