#include "flmgof/harness/report.hpp"

#include "flmgof/error.hpp"
#include "flmgof/harness/serialization.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#ifndef FLMGOF_VERSION
#define FLMGOF_VERSION "0.0.0"
#endif

namespace flmgof::harness {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::kIoError, "cannot create directory " + dir + ": " + ec.message());
}

} // namespace

const char* library_version() { return FLMGOF_VERSION; }

std::string power_csv(const std::vector<PowerRow>& rows) {
    std::ostringstream out;
    out << kPowerCsvHeader << "\n";
    for (const auto& r : rows)
        out << r.scenario << "," << r.d << "," << r.n << "," << r.M << "," << r.replicates << ","
            << fixed(r.reject_pct, 1) << "," << fixed(r.q0_pct, 1) << "," << fixed(r.sec_per_rep, 6) << "\n";
    return out.str();
}

nlohmann::json run_manifest(const StudyConfig& cfg, const std::vector<PowerRow>& rows, const std::string& command) {
    nlohmann::json j;
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["config"] = cfg;
    j["versions"] = {
        {"flmgof", library_version()},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
    };
    j["rows"] = rows;
    return j;
}

std::string line_plot_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<Series>& series) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    const double W = 640, H = 420, left = 60, right = 150, top = 40, bottom = 50;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = 0.0, ymax = 0.0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!(xmax > xmin)) {
        xmin = (std::isfinite(xmin) ? xmin : 0.0) - 1.0;
        xmax = xmin + 2.0;
    }
    ymax = ymax > 0.0 ? ymax * 1.1 : 1.0;
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
      << "</text>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double yv = ymin + (ymax - ymin) * k / 4.0;
        o << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
          << fixed(yv, 1) << "</text>\n";
    }
    std::vector<double> xs;
    for (const auto& s : series) xs.insert(xs.end(), s.x.begin(), s.x.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double xv : xs)
        o << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << xv << "</text>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << escape_xml(x_label) << "</text>\n";
    o << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % 10];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) o << (i ? " " : "") << px(s.x[i]) << "," << py(s.y[i]);
        o << "\"/>\n";
        const double ly = top + 14.0 + 18.0 * static_cast<double>(k);
        o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << escape_xml(s.name)
          << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

nlohmann::json report_json(const TestReport& r) {
    const auto& d = r.diagnostics;
    nlohmann::json j;
    j["T_n"] = r.T_n;
    j["q_hat"] = r.q_hat;
    j["V0"] = r.V0;
    j["V1"] = r.V1;
    j["gamma"] = r.gamma;
    j["sigma_n2"] = r.sigma_n2;
    j["p_value"] = r.p_value;
    j["reject"] = r.reject;
    j["alpha"] = r.alpha;
    j["diagnostics"] = {
        {"lambda", d.lambda},
        {"lambda_scale", d.lambda_scale},
        {"residual_df", d.residual_df},
        {"sigma2_hat", d.sigma2_hat},
        {"sigma2_unbiased", d.sigma2_unbiased},
        {"v0_variance", d.v0_variance},
        {"ridge_c1", d.ridge.c1},
        {"ridge_c2", d.ridge.c2},
        {"top_normalized_eigenvalue", d.top_normalized_eigenvalue},
        {"eigen_count", d.eigen_count},
        {"bandwidth", d.bandwidth},
        {"mean_lambda1", d.mean_lambda1},
    };
    j["components"] = {
        {"v0_statistic", r.components.v0_statistic},
        {"v0_p_value", r.components.v0_p_value},
        {"v1_z", r.components.v1_z},
        {"v1_p_value", r.components.v1_p_value},
    };
    j["beta_hat"] = std::vector<double>(r.beta_hat.data(), r.beta_hat.data() + r.beta_hat.size());
    return j;
}

std::string report_summary(const TestReport& r) {
    std::ostringstream o;
    char buf[256];
    std::snprintf(buf, sizeof buf, "T_n      = %.6g\nq_hat    = %d (%s branch)\np-value  = %.6g\n", r.T_n, r.q_hat,
                  r.q_hat == 0 ? "V0" : "V1", r.p_value);
    o << buf;
    std::snprintf(buf, sizeof buf, "decision = %s the linear model at alpha = %g\n",
                  r.reject ? "reject" : "do not reject", r.alpha);
    o << buf;
    return o.str();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorKind::kIoError, "cannot write " + path);
    f << content;
    f.close();
    if (!f) fail(ErrorKind::kIoError, "write failed for " + path);
}

void emit_power_outputs(const StudyConfig& cfg, const std::vector<PowerRow>& rows, const std::string& command) {
    if (rows.empty()) fail(ErrorKind::kInvalidArgument, "no rows to emit");
    ensure_dir(cfg.out_dir);
    write_text(cfg.out_dir + "/power.csv", power_csv(rows));
    write_text(cfg.out_dir + "/manifest.json", run_manifest(cfg, rows, command).dump(2) + "\n");
}

void emit_gridsize_outputs(const StudyConfig& cfg, const GridsizeResult& result) {
    emit_power_outputs(cfg, result.rows, "gridsize");
    write_text(cfg.out_dir + "/size_vs_M.svg",
               line_plot_svg("Empirical size versus M", "M", "rejection rate (%)", result.size_vs_M));
    write_text(cfg.out_dir + "/power_vs_M.svg",
               line_plot_svg("Empirical power versus M", "M", "rejection rate (%)", result.power_vs_M));
    write_text(cfg.out_dir + "/power_vs_n.svg",
               line_plot_svg("Empirical power versus n", "n", "rejection rate (%)", result.power_vs_n));
}

} // namespace flmgof::harness
