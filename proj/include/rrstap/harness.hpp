#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rrstap/config.hpp"
#include "rrstap/estimators.hpp"
#include "rrstap/rank.hpp"

namespace rrstap {

/// Everything one Monte-Carlo run draws up front: codes, signatures, fading
/// state, symbol streams, noise level. Each user's randomness comes from its
/// own derived stream so runs pair across sweep values (substream k is
/// derive_stream(scenario_seed, k); the noise uses an independent seed).
struct RunScenario {
    SystemConfig cfg;
    std::vector<SpreadingCode> codes;
    std::vector<SignatureSet> signatures;
    ChannelState channels;
    SymbolStream symbols;
    double noise_variance = 0.0;

    cplx desired_symbol(long i) const { return symbols.symbols[0][std::size_t(i)]; }
};

RunScenario draw_scenario(const SystemConfig& cfg, int total_symbols, std::uint64_t scenario_seed);

/// Adapter around one estimator kind for the streaming protocol.
class Receiver {
  public:
    virtual ~Receiver() = default;
    /// A priori symbol estimate before seeing d.
    virtual cplx output(const CVec& r) = 0;
    virtual void step(const CVec& r, cplx d) = 0;
    virtual double selected_rank() const { return 0.0; }
    /// Achieved weighted cost of the current filters on given moments.
    virtual double state_cost(const CMat& R, const CVec& p, double sigma_d2) const = 0;
};

std::unique_ptr<Receiver> make_receiver(const ExperimentSpec& spec, const RunScenario& scenario);

struct SweepResult {
    double sweep_value = 0.0;
    std::string label;
    long long bit_errors = 0;  // post-training only
    long long bits = 0;
    double ber = 0.0;
    double ber_halfwidth = 0.0;
    int failed_runs = 0;
    std::vector<double> ber_curve;                          // mean bit-error fraction per symbol
    std::vector<double> rank_curve;                         // mean selected rank (auto modes)
    std::vector<double> ses_true_curve, ses_dd_curve;       // when track_ses
    std::vector<std::vector<std::uint8_t>> run_bit_errors;  // [run][symbol], 0..2; empty = failed
};

struct RunResult {
    ExperimentSpec spec;
    std::vector<SweepResult> sweeps;
};

/// Run the full experiment: every sweep value, every run, streaming symbols
/// through the estimator with training followed by decision-directed
/// operation. Deterministic for a given spec and seed. Runs that raise an
/// estimator error are excluded; more than 10% failures fails the experiment.
RunResult run_experiment(const ExperimentSpec& spec);

/// BER against projection rank, sweeping D over [1, 8].
RunResult ber_vs_rank(ExperimentSpec spec);

void emit_csv(const RunResult& result, const std::string& path);
void emit_plotdata(const RunResult& result, const std::string& path);

/// Numeric rows of an emitted CSV, keyed by (sweep value, metric).
std::vector<std::tuple<double, std::string, double>> parse_csv(const std::string& path);

}  // namespace rrstap
