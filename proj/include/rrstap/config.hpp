#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rrstap/signal.hpp"

namespace rrstap {

enum class EstimatorKind { full_rank_rls, jio_rls, jio_rls_autorank, mmse_genie, rr_svd_oracle };
enum class SelectorKind { extended, multiple, stopping, cv };
enum class SweepAxis { none, rank, snr, users, doppler, estimator };

std::string to_string(EstimatorKind k);
std::string to_string(SelectorKind k);
EstimatorKind estimator_from_string(const std::string& s);
SelectorKind selector_from_string(const std::string& s);

/// Complete description of one Monte-Carlo experiment.
struct ExperimentSpec {
    SystemConfig scenario;
    EstimatorKind estimator = EstimatorKind::jio_rls;
    SelectorKind selector = SelectorKind::extended;
    SweepAxis axis = SweepAxis::none;
    std::vector<double> sweep_values;                 // numeric axes
    std::vector<EstimatorKind> estimator_values;      // axis == estimator
    int runs = 200;
    int training_symbols = 200;
    int data_symbols = 300;
    double lambda = 0.998;
    double alpha = 0.99;
    double stopping_threshold = 0.01;
    double delta = 0.01;
    int rank = 4;
    int d_min = 3;
    int d_max = 8;
    std::uint64_t seed = 1;
    int threads = 0;          // 0 = hardware concurrency
    bool track_ses = false;
    int cv_window = 50;       // history window for the cv selector
    int cv_stride = 25;       // reselect cadence for the cv selector

    int total_symbols() const { return training_symbols + data_symbols; }
    void validate() const;
};

/// Key/value config file: one `key = value` per line, `#` comments. Unknown
/// keys are an error. Returns the spec with defaults overridden by the file.
ExperimentSpec load_spec(const std::string& path, ExperimentSpec base = {});

/// Apply one key/value pair (the CLI funnels flag overrides through this).
void apply_key(ExperimentSpec& spec, const std::string& key, const std::string& value);

}  // namespace rrstap
