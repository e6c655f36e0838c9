#include "flmgof/harness/serialization.hpp"

#include "flmgof/error.hpp"

#include <fstream>
#include <set>

namespace flmgof {

namespace {

template <class E>
struct Names {
    E value;
    const char* name;
};

constexpr Names<SmoothingKernel> kKernelNames[] = {{SmoothingKernel::kGaussian, "gaussian"},
                                                    {SmoothingKernel::kEpanechnikov, "epanechnikov"}};
constexpr Names<Standardization> kStandardizationNames[] = {
    {Standardization::kResidualProjection, "residual-projection"}, {Standardization::kEigenSeries, "eigen-series"}};
constexpr Names<LambdaRule> kLambdaNames[] = {{LambdaRule::kGcv, "gcv"}, {LambdaRule::kRate, "rate"}};

template <class E, std::size_t N>
const char* name_of(const Names<E> (&table)[N], E v) {
    for (const auto& e : table)
        if (e.value == v) return e.name;
    return "unknown";
}

template <class E, std::size_t N>
E value_of(const Names<E> (&table)[N], const std::string& s, const char* what) {
    for (const auto& e : table)
        if (s == e.name) return e.value;
    fail(ErrorKind::kParseError, std::string("unknown ") + what + " '" + s + "'");
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys, const char* where) {
    if (!j.is_object()) fail(ErrorKind::kParseError, std::string(where) + " must be a JSON object");
    std::set<std::string> known(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) fail(ErrorKind::kParseError, std::string("unknown key '") + it.key() + "' in " + where);
}

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::kParseError, std::string("bad value for '") + key + "': " + e.what());
    }
}

const char* deviation_name(DeviationKind k) {
    switch (k) {
    case DeviationKind::kNorm: return "norm";
    case DeviationKind::kSineKernel: return "sine-kernel";
    case DeviationKind::kExpWeightedSquare: return "exp-weighted-square";
    case DeviationKind::kSineSquaredNorm: return "sine-squared-norm";
    }
    return "unknown";
}

} // namespace

void to_json(nlohmann::json& j, const TestConfig& c) {
    j = {{"weight_scale", c.weight_scale},
         {"bandwidth_exponent", c.bandwidth_exponent},
         {"alpha", c.alpha},
         {"kernel", name_of(kKernelNames, c.kernel)},
         {"ridge_B", c.ridge_B},
         {"smoothing_order", c.smoothing_order},
         {"lambda_rule", name_of(kLambdaNames, c.lambda_rule)},
         {"standardization", name_of(kStandardizationNames, c.standardization)},
         {"seed", c.seed}};
    j["lambda1"] = c.lambda1 ? nlohmann::json(*c.lambda1) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, TestConfig& c) {
    reject_unknown(j,
                   {"weight_scale", "bandwidth_exponent", "alpha", "kernel", "ridge_B", "smoothing_order", "lambda1",
                    "lambda_rule", "standardization", "seed"},
                   "test config");
    read(j, "weight_scale", c.weight_scale);
    read(j, "bandwidth_exponent", c.bandwidth_exponent);
    read(j, "alpha", c.alpha);
    read(j, "ridge_B", c.ridge_B);
    read(j, "smoothing_order", c.smoothing_order);
    read(j, "seed", c.seed);
    std::string s;
    if (j.contains("kernel")) {
        read(j, "kernel", s);
        c.kernel = value_of(kKernelNames, s, "kernel");
    }
    if (j.contains("lambda_rule")) {
        read(j, "lambda_rule", s);
        c.lambda_rule = value_of(kLambdaNames, s, "lambda rule");
    }
    if (j.contains("standardization")) {
        read(j, "standardization", s);
        c.standardization = value_of(kStandardizationNames, s, "standardization");
    }
    if (j.contains("lambda1")) {
        if (j.at("lambda1").is_null()) {
            c.lambda1.reset();
        } else {
            double v = 0.0;
            read(j, "lambda1", v);
            c.lambda1 = v;
        }
    }
}

void to_json(nlohmann::json& j, const ScenarioSpec& s) {
    j = {{"id", s.id},
         {"process", s.process.name()},
         {"deviation", deviation_name(s.deviation)},
         {"delta_levels", s.delta_levels},
         {"r_squared", s.r_squared}};
    j["noise_sd"] = s.noise_sd ? nlohmann::json(*s.noise_sd) : nlohmann::json(nullptr);
}

namespace harness {

void to_json(nlohmann::json& j, const StudyConfig& c) {
    j = {{"scenarios", c.scenarios}, {"d_levels", c.d_levels}, {"n_list", c.n_list},   {"M_list", c.M_list},
         {"replicates", c.replicates}, {"seed", c.seed},       {"alpha", c.alpha},     {"out_dir", c.out_dir},
         {"test", c.test}};
}

void from_json(const nlohmann::json& j, StudyConfig& c) {
    reject_unknown(j, {"scenarios", "d_levels", "n_list", "M_list", "replicates", "seed", "alpha", "out_dir", "test"},
                   "study config");
    read(j, "scenarios", c.scenarios);
    read(j, "d_levels", c.d_levels);
    read(j, "n_list", c.n_list);
    read(j, "M_list", c.M_list);
    read(j, "replicates", c.replicates);
    read(j, "seed", c.seed);
    read(j, "alpha", c.alpha);
    read(j, "out_dir", c.out_dir);
    if (j.contains("test")) from_json(j.at("test"), c.test);
}

void to_json(nlohmann::json& j, const PowerRow& r) {
    j = {{"scenario", r.scenario},
         {"d", r.d},
         {"delta", r.delta},
         {"n", r.n},
         {"M", r.M},
         {"reps", r.replicates},
         {"rejections", r.rejections},
         {"failures", r.failures},
         {"flagged", r.flagged()},
         {"reject_pct", r.reject_pct},
         {"q0_pct", r.q0_pct},
         {"v0_only_pct", r.v0_pct()},
         {"v1_only_pct", r.v1_pct()},
         {"sec_per_rep", r.sec_per_rep}};
}

StudyConfig load_study_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorKind::kIoError, "cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::kParseError, path + ": " + e.what());
    }
    StudyConfig c;
    from_json(j, c);
    return c;
}

} // namespace harness
} // namespace flmgof
