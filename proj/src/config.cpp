#include "rrstap/config.hpp"

#include <fstream>
#include <sstream>

namespace rrstap {

std::string to_string(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::full_rank_rls: return "full_rank_rls";
        case EstimatorKind::jio_rls: return "jio_rls";
        case EstimatorKind::jio_rls_autorank: return "jio_rls_autorank";
        case EstimatorKind::mmse_genie: return "mmse_genie";
        case EstimatorKind::rr_svd_oracle: return "rr_svd_oracle";
    }
    return "?";
}

std::string to_string(SelectorKind k) {
    switch (k) {
        case SelectorKind::extended: return "extended";
        case SelectorKind::multiple: return "multiple";
        case SelectorKind::stopping: return "stopping";
        case SelectorKind::cv: return "cv";
    }
    return "?";
}

EstimatorKind estimator_from_string(const std::string& s) {
    if (s == "full_rank_rls") return EstimatorKind::full_rank_rls;
    if (s == "jio_rls") return EstimatorKind::jio_rls;
    if (s == "jio_rls_autorank") return EstimatorKind::jio_rls_autorank;
    if (s == "mmse_genie") return EstimatorKind::mmse_genie;
    if (s == "rr_svd_oracle") return EstimatorKind::rr_svd_oracle;
    throw ConfigError("unknown estimator '" + s + "'");
}

SelectorKind selector_from_string(const std::string& s) {
    if (s == "extended") return SelectorKind::extended;
    if (s == "multiple") return SelectorKind::multiple;
    if (s == "stopping") return SelectorKind::stopping;
    if (s == "cv") return SelectorKind::cv;
    throw ConfigError("unknown rank selector '" + s + "'");
}

void ExperimentSpec::validate() const {
    scenario.validate();
    if (runs < 1) throw ConfigError("spec: runs must be >= 1");
    if (training_symbols < 0) throw ConfigError("spec: training_symbols must be >= 0");
    if (data_symbols < 0) throw ConfigError("spec: data_symbols must be >= 0");
    if (total_symbols() < 1) throw ConfigError("spec: no symbols to process");
    if (!(lambda > 0.0) || lambda > 1.0) throw ConfigError("spec: lambda must be in (0,1]");
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("spec: alpha must be in (0,1]");
    if (rank < 1 || rank > scenario.dim()) throw ConfigError("spec: rank out of range");
    if (d_min < 1 || d_max < d_min || d_max > scenario.dim())
        throw ConfigError("spec: rank bounds out of range");
    if (axis != SweepAxis::none && axis != SweepAxis::estimator && sweep_values.empty())
        throw ConfigError("spec: sweep axis set but no sweep values");
    if (axis == SweepAxis::estimator && estimator_values.empty())
        throw ConfigError("spec: estimator sweep with no estimators");
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' needs an integer, got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' needs a number, got '" + v + "'");
    }
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
}

}  // namespace

void apply_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    if (key == "users") spec.scenario.users = to_int(key, value);
    else if (key == "spreading_gain") spec.scenario.spreading_gain = to_int(key, value);
    else if (key == "path_span") spec.scenario.path_span = to_int(key, value);
    else if (key == "antennas") spec.scenario.antennas = to_int(key, value);
    else if (key == "ebn0_db") spec.scenario.ebn0_db = to_double(key, value);
    else if (key == "doppler") spec.scenario.doppler = to_double(key, value);
    else if (key == "power_std_db") spec.scenario.power_std_db = to_double(key, value);
    else if (key == "active_paths") spec.scenario.active_paths = to_int(key, value);
    else if (key == "clarke_oscillators") spec.scenario.clarke_oscillators = to_int(key, value);
    else if (key == "estimator") spec.estimator = estimator_from_string(value);
    else if (key == "rank_selector") spec.selector = selector_from_string(value);
    else if (key == "runs") spec.runs = to_int(key, value);
    else if (key == "training_symbols") spec.training_symbols = to_int(key, value);
    else if (key == "data_symbols") spec.data_symbols = to_int(key, value);
    else if (key == "lambda") spec.lambda = to_double(key, value);
    else if (key == "alpha") spec.alpha = to_double(key, value);
    else if (key == "stopping_threshold") spec.stopping_threshold = to_double(key, value);
    else if (key == "delta") spec.delta = to_double(key, value);
    else if (key == "rank") spec.rank = to_int(key, value);
    else if (key == "d_min") spec.d_min = to_int(key, value);
    else if (key == "d_max") spec.d_max = to_int(key, value);
    else if (key == "seed") {
        try {
            std::size_t pos = 0;
            spec.seed = std::uint64_t(std::stoull(value, &pos));
            if (pos != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ConfigError("config: key 'seed' needs an unsigned integer, got '" + value + "'");
        }
    }
    else if (key == "threads") spec.threads = to_int(key, value);
    else if (key == "track_ses") spec.track_ses = to_int(key, value) != 0;
    else if (key == "cv_window") spec.cv_window = to_int(key, value);
    else if (key == "cv_stride") spec.cv_stride = to_int(key, value);
    else if (key == "sweep_values") spec.sweep_values = to_list(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentSpec load_spec(const std::string& path, ExperimentSpec base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        apply_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

}  // namespace rrstap
