#include "rrstap/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace rrstap {

RunScenario draw_scenario(const SystemConfig& cfg, int total_symbols, std::uint64_t scenario_seed) {
    cfg.validate();
    RunScenario sc;
    sc.cfg = cfg;
    sc.noise_variance = cfg.noise_variance();
    sc.channels.antennas = cfg.antennas;
    sc.channels.path_span = cfg.path_span;
    sc.channels.doppler = cfg.doppler;
    sc.channels.users.resize(cfg.users);
    sc.symbols.symbols.resize(cfg.users);
    sc.symbols.amplitudes.resize(cfg.users);
    sc.codes.resize(cfg.users);
    sc.signatures.resize(cfg.users);

    // Per-user draw order: code chips, path spacings, DoAs, oscillator
    // angles/phases, amplitude, symbol stream. Keeping each user on its own
    // substream makes user k's realization independent of the user count.
    SystemConfig one_user = cfg;
    one_user.users = 1;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < cfg.users; ++k) {
        Rng rng(derive_stream(scenario_seed, std::uint64_t(k)));
        sc.codes[k] = SpreadingCode::random(cfg.spreading_gain, rng);
        sc.signatures[k] = build_signatures(sc.codes[k], cfg.path_span, cfg.antennas, cfg.chip_window());
        ChannelState single = make_channel(one_user, rng);
        sc.channels.users[k] = single.users[0];
        sc.symbols.amplitudes[k] =
            k == 0 ? 1.0 : std::pow(10.0, rng.normal() * cfg.power_std_db / 20.0);
        sc.symbols.symbols[k].resize(std::size_t(total_symbols) + 2);
        for (auto& b : sc.symbols.symbols[k])
            b = cplx{rng.sign() * inv_sqrt2, rng.sign() * inv_sqrt2};
    }
    return sc;
}

namespace {

class FullRankReceiver : public Receiver {
  public:
    FullRankReceiver(int dim, double lambda, double delta)
        : state_(FullRankRlsState::init(dim, lambda, delta)) {}
    cplx output(const CVec& r) override { return state_.output(r); }
    void step(const CVec& r, cplx d) override { full_rank_rls_step(state_, r, d); }
    double state_cost(const CMat& R, const CVec& p, double s2) const override {
        return s2 - 2.0 * std::real(dot(p, state_.w)) + std::real(dot(state_.w, R * state_.w));
    }

  private:
    FullRankRlsState state_;
};

class JioReceiver : public Receiver {
  public:
    JioReceiver(int dim, int rank, double lambda, double delta)
        : state_(JioRlsState::init(dim, rank, lambda, delta)) {}
    cplx output(const CVec& r) override { return state_.output(r); }
    void step(const CVec& r, cplx d) override { jio_rls_step(state_, r, d); }
    double selected_rank() const override { return double(state_.rank()); }
    double state_cost(const CMat& R, const CVec& p, double s2) const override {
        return pair_cost(R, p, s2, state_.T, state_.w_bar);
    }

  private:
    JioRlsState state_;
};

class ExtendedAutoReceiver : public Receiver {
  public:
    ExtendedAutoReceiver(int dim, const ExperimentSpec& spec)
        : state_(ExtendedJioState::init(dim, spec.d_min, spec.d_max, spec.lambda, spec.alpha,
                                        spec.delta)) {}
    cplx output(const CVec& r) override { return state_.output(r); }
    void step(const CVec& r, cplx d) override { state_.step(r, d); }
    double selected_rank() const override { return double(state_.selected_rank); }
    double state_cost(const CMat& R, const CVec& p, double s2) const override {
        return pair_cost(R, p, s2, state_.filter.T, state_.filter.w_bar);
    }

  private:
    ExtendedJioState state_;
};

class MultiAutoReceiver : public Receiver {
  public:
    MultiAutoReceiver(int dim, const ExperimentSpec& spec)
        : bank_(MultiFilterBank::init(dim, spec.d_min, spec.d_max, spec.lambda, spec.alpha,
                                      spec.delta)) {}
    cplx output(const CVec& r) override { return bank_.output(r); }
    void step(const CVec& r, cplx d) override { bank_.step(r, d); }
    double selected_rank() const override { return double(bank_.selected_rank); }
    double state_cost(const CMat& R, const CVec& p, double s2) const override {
        const auto& f = bank_.filters[std::size_t(bank_.selected_rank - bank_.d_min)];
        return pair_cost(R, p, s2, f.T, f.w_bar);
    }

  private:
    MultiFilterBank bank_;
};

/// d_max-wide joint filter whose output rank is picked by the column
/// stopping rule each step.
class StoppingAutoReceiver : public Receiver {
  public:
    StoppingAutoReceiver(int dim, const ExperimentSpec& spec)
        : state_(JioRlsState::init(dim, spec.d_max, spec.lambda, spec.delta)),
          d_min_(spec.d_min),
          d_max_(spec.d_max),
          threshold_(spec.stopping_threshold),
          selected_(spec.d_min) {}
    cplx output(const CVec& r) override { return prefix_output(r, selected_); }
    void step(const CVec& r, cplx d) override {
        jio_rls_step(state_, r, d);
        selected_ = select_rank_stopping(state_.T, threshold_, d_min_, d_max_).rank;
    }
    double selected_rank() const override { return double(selected_); }
    double state_cost(const CMat& R, const CVec& p, double s2) const override {
        return pair_cost(R, p, s2, state_.T, state_.w_bar);
    }

  private:
    cplx prefix_output(const CVec& r, int d) const {
        cplx acc = 0.0;
        for (int c = 0; c < d; ++c) {
            cplx rd = 0.0;
            for (std::size_t row = 0; row < state_.T.rows(); ++row)
                rd += std::conj(state_.T(row, std::size_t(c))) * r[row];
            acc += std::conj(state_.w_bar[std::size_t(c)]) * rd;
        }
        return acc;
    }
    JioRlsState state_;
    int d_min_, d_max_;
    double threshold_;
    int selected_;
};

/// d_max-wide joint filter re-ranked periodically by leave-one-out scoring
/// over a sliding window.
class CvAutoReceiver : public Receiver {
  public:
    CvAutoReceiver(int dim, const ExperimentSpec& spec)
        : state_(JioRlsState::init(dim, spec.d_max, spec.lambda, spec.delta)),
          d_min_(spec.d_min),
          d_max_(spec.d_max),
          alpha_(spec.alpha),
          lambda_(spec.lambda),
          window_(spec.cv_window),
          stride_(std::max(1, spec.cv_stride)),
          selected_(spec.d_min) {}
    cplx output(const CVec& r) override { return prefix_output(r, selected_); }
    void step(const CVec& r, cplx d) override {
        jio_rls_step(state_, r, d);
        history_.inputs.push_back(r);
        history_.desired.push_back(d);
        if (int(history_.inputs.size()) > window_) {
            history_.inputs.erase(history_.inputs.begin());
            history_.desired.erase(history_.desired.begin());
        }
        steps_ += 1;
        if (steps_ % stride_ == 0 && int(history_.inputs.size()) > d_min_) {
            history_.lambda = lambda_;
            selected_ = select_rank_cv(history_, d_min_, d_max_, alpha_).rank;
        }
    }
    double selected_rank() const override { return double(selected_); }
    double state_cost(const CMat& R, const CVec& p, double s2) const override {
        return pair_cost(R, p, s2, state_.T, state_.w_bar);
    }

  private:
    cplx prefix_output(const CVec& r, int d) const {
        cplx acc = 0.0;
        for (int c = 0; c < d; ++c) {
            cplx rd = 0.0;
            for (std::size_t row = 0; row < state_.T.rows(); ++row)
                rd += std::conj(state_.T(row, std::size_t(c))) * r[row];
            acc += std::conj(state_.w_bar[std::size_t(c)]) * rd;
        }
        return acc;
    }
    JioRlsState state_;
    int d_min_, d_max_;
    double alpha_, lambda_;
    int window_, stride_;
    int selected_;
    long steps_ = 0;
    CvHistory history_;
};

/// Clairvoyant linear MMSE receiver: rebuilds the exact ensemble filter at
/// every symbol from the true channels, powers, and noise floor.
class GenieReceiver : public Receiver {
  public:
    GenieReceiver(const RunScenario& sc, int truncate_rank)
        : sc_(&sc), rank_(truncate_rank) {}
    cplx output(const CVec& r) override {
        refresh();
        return dot(w_, r);
    }
    void step(const CVec&, cplx) override { symbol_ += 1; }
    double selected_rank() const override { return double(rank_); }
    double state_cost(const CMat& R, const CVec& p, double s2) const override {
        return s2 - 2.0 * std::real(dot(p, w_)) + std::real(dot(w_, R * w_));
    }

  private:
    void refresh() {
        if (symbol_ == computed_for_) return;
        GenieScenario g{&sc_->signatures, &sc_->channels, sc_->symbols.amplitudes,
                        sc_->noise_variance, symbol_};
        if (rank_ == 0) {
            w_ = mmse_genie(g);
        } else {
            const Moments m = genie_moments(g);
            w_ = optimal_reduced_rank(m.R, m.p, rank_);
        }
        computed_for_ = symbol_;
    }
    const RunScenario* sc_;
    int rank_;  // 0 = full rank
    long symbol_ = 1;
    long computed_for_ = 0;
    CVec w_;
};

struct SweepPoint {
    ExperimentSpec spec;
    double value = 0.0;
    std::string label;
};

std::vector<SweepPoint> expand_sweeps(const ExperimentSpec& spec) {
    std::vector<SweepPoint> points;
    auto base = [&](double v, const std::string& label) {
        SweepPoint pt{spec, v, label};
        pt.spec.axis = SweepAxis::none;
        return pt;
    };
    switch (spec.axis) {
        case SweepAxis::none:
            points.push_back(base(0.0, to_string(spec.estimator)));
            break;
        case SweepAxis::rank:
            for (double v : spec.sweep_values) {
                SweepPoint pt = base(v, "d=" + std::to_string(int(v)));
                pt.spec.rank = int(v);
                points.push_back(pt);
            }
            break;
        case SweepAxis::snr:
            for (double v : spec.sweep_values) {
                SweepPoint pt = base(v, "ebn0=" + std::to_string(v));
                pt.spec.scenario.ebn0_db = v;
                points.push_back(pt);
            }
            break;
        case SweepAxis::users:
            for (double v : spec.sweep_values) {
                SweepPoint pt = base(v, "users=" + std::to_string(int(v)));
                pt.spec.scenario.users = int(v);
                points.push_back(pt);
            }
            break;
        case SweepAxis::doppler:
            for (double v : spec.sweep_values) {
                SweepPoint pt = base(v, "fdt=" + std::to_string(v));
                pt.spec.scenario.doppler = v;
                points.push_back(pt);
            }
            break;
        case SweepAxis::estimator: {
            int idx = 0;
            for (EstimatorKind kind : spec.estimator_values) {
                SweepPoint pt = base(double(idx++), to_string(kind));
                pt.spec.estimator = kind;
                points.push_back(pt);
            }
            break;
        }
    }
    return points;
}

struct RunOutput {
    bool failed = false;
    std::vector<std::uint8_t> bit_errors;  // per symbol
    std::vector<double> ranks;
    std::vector<double> ses_true, ses_dd;
};

RunOutput run_single(const ExperimentSpec& spec, int run_index) {
    const std::uint64_t scenario_seed = derive_stream(spec.seed, std::uint64_t(run_index) * 2);
    const std::uint64_t noise_seed = derive_stream(spec.seed, std::uint64_t(run_index) * 2 + 1);
    const int total = spec.total_symbols();

    RunOutput out;
    try {
        RunScenario sc = draw_scenario(spec.scenario, total, scenario_seed);
        std::unique_ptr<Receiver> rx = make_receiver(spec, sc);
        Rng noise_rng(noise_seed);
        const int jm = spec.scenario.dim();

        CMat moment_r;
        CVec moment_p_true, moment_p_dd;
        double sigma_true = 0.0, sigma_dd = 0.0;
        if (spec.track_ses) {
            moment_r = CMat(jm, jm);
            moment_p_true = CVec(jm);
            moment_p_dd = CVec(jm);
        }

        out.bit_errors.resize(total);
        out.ranks.resize(total);
        if (spec.track_ses) {
            out.ses_true.resize(total);
            out.ses_dd.resize(total);
        }

        for (int i = 1; i <= total; ++i) {
            const CVec r =
                generate_received(sc.symbols, sc.channels, sc.signatures, sc.noise_variance, i, noise_rng);
            const cplx truth = sc.desired_symbol(i);
            const cplx x = rx->output(r);
            const cplx decided = qpsk_slice(x);
            std::uint8_t nerr = 0;
            if (decided.real() * truth.real() < 0.0) ++nerr;
            if (decided.imag() * truth.imag() < 0.0) ++nerr;
            out.bit_errors[std::size_t(i - 1)] = nerr;

            const cplx d = i <= spec.training_symbols ? truth : decided;
            rx->step(r, d);
            evolve_channel(sc.channels);
            out.ranks[std::size_t(i - 1)] = rx->selected_rank();

            if (spec.track_ses) {
                const double lam = spec.lambda;
                for (int a = 0; a < jm; ++a) {
                    moment_p_true[a] = lam * moment_p_true[a] + std::conj(truth) * r[a];
                    moment_p_dd[a] = lam * moment_p_dd[a] + std::conj(d) * r[a];
                    for (int b = 0; b < jm; ++b)
                        moment_r(a, b) = lam * moment_r(a, b) + r[a] * std::conj(r[b]);
                }
                sigma_true = lam * sigma_true + 1.0;  // |truth|^2 == 1
                sigma_dd = lam * sigma_dd + std::norm(d);
                out.ses_true[std::size_t(i - 1)] = rx->state_cost(moment_r, moment_p_true, sigma_true);
                out.ses_dd[std::size_t(i - 1)] = rx->state_cost(moment_r, moment_p_dd, sigma_dd);
            }
        }
    } catch (const Error&) {
        out.failed = true;
        out.bit_errors.clear();
    }
    return out;
}

}  // namespace

std::unique_ptr<Receiver> make_receiver(const ExperimentSpec& spec, const RunScenario& scenario) {
    const int dim = spec.scenario.dim();
    switch (spec.estimator) {
        case EstimatorKind::full_rank_rls:
            return std::make_unique<FullRankReceiver>(dim, spec.lambda, spec.delta);
        case EstimatorKind::jio_rls:
            return std::make_unique<JioReceiver>(dim, spec.rank, spec.lambda, spec.delta);
        case EstimatorKind::jio_rls_autorank:
            switch (spec.selector) {
                case SelectorKind::extended:
                    return std::make_unique<ExtendedAutoReceiver>(dim, spec);
                case SelectorKind::multiple:
                    return std::make_unique<MultiAutoReceiver>(dim, spec);
                case SelectorKind::stopping:
                    return std::make_unique<StoppingAutoReceiver>(dim, spec);
                case SelectorKind::cv:
                    return std::make_unique<CvAutoReceiver>(dim, spec);
            }
            break;
        case EstimatorKind::mmse_genie:
            return std::make_unique<GenieReceiver>(scenario, 0);
        case EstimatorKind::rr_svd_oracle:
            return std::make_unique<GenieReceiver>(scenario, spec.rank);
    }
    throw ConfigError("make_receiver: unhandled estimator kind");
}

RunResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    RunResult result;
    result.spec = spec;

    for (const SweepPoint& pt : expand_sweeps(spec)) {
        const ExperimentSpec& sub = pt.spec;
        const int total = sub.total_symbols();
        SweepResult sweep;
        sweep.sweep_value = pt.value;
        sweep.label = pt.label;
        sweep.run_bit_errors.resize(std::size_t(sub.runs));
        sweep.ber_curve.assign(std::size_t(total), 0.0);
        sweep.rank_curve.assign(std::size_t(total), 0.0);
        if (sub.track_ses) {
            sweep.ses_true_curve.assign(std::size_t(total), 0.0);
            sweep.ses_dd_curve.assign(std::size_t(total), 0.0);
        }

        std::vector<RunOutput> outputs(std::size_t(sub.runs));
        unsigned workers = sub.threads > 0 ? unsigned(sub.threads) : std::thread::hardware_concurrency();
        if (workers == 0) workers = 1;
        workers = std::min<unsigned>(workers, unsigned(sub.runs));
        std::atomic<int> next{0};
        auto worker = [&]() {
            for (;;) {
                const int run = next.fetch_add(1);
                if (run >= sub.runs) break;
                outputs[std::size_t(run)] = run_single(sub, run);
            }
        };
        if (workers <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        int ok_runs = 0;
        for (int run = 0; run < sub.runs; ++run) {
            RunOutput& ro = outputs[std::size_t(run)];
            if (ro.failed) {
                sweep.failed_runs += 1;
                continue;
            }
            ok_runs += 1;
            for (int i = 0; i < total; ++i) {
                sweep.ber_curve[std::size_t(i)] += ro.bit_errors[std::size_t(i)] / 2.0;
                sweep.rank_curve[std::size_t(i)] += ro.ranks[std::size_t(i)];
                if (i >= sub.training_symbols) {
                    sweep.bit_errors += ro.bit_errors[std::size_t(i)];
                    sweep.bits += 2;
                }
            }
            if (sub.track_ses)
                for (int i = 0; i < total; ++i) {
                    sweep.ses_true_curve[std::size_t(i)] += ro.ses_true[std::size_t(i)];
                    sweep.ses_dd_curve[std::size_t(i)] += ro.ses_dd[std::size_t(i)];
                }
            sweep.run_bit_errors[std::size_t(run)] = std::move(ro.bit_errors);
        }
        if (sweep.failed_runs * 10 > sub.runs)
            throw ExperimentError("run_experiment: " + std::to_string(sweep.failed_runs) + " of " +
                                  std::to_string(sub.runs) + " runs failed at sweep '" + pt.label + "'");
        if (ok_runs > 0) {
            for (double& v : sweep.ber_curve) v /= ok_runs;
            for (double& v : sweep.rank_curve) v /= ok_runs;
            for (double& v : sweep.ses_true_curve) v /= ok_runs;
            for (double& v : sweep.ses_dd_curve) v /= ok_runs;
        }
        if (sweep.bits > 0) {
            sweep.ber = double(sweep.bit_errors) / double(sweep.bits);
            sweep.ber_halfwidth =
                1.96 * std::sqrt(std::max(0.0, sweep.ber * (1.0 - sweep.ber)) / double(sweep.bits));
        }
        result.sweeps.push_back(std::move(sweep));
    }
    return result;
}

RunResult ber_vs_rank(ExperimentSpec spec) {
    spec.axis = SweepAxis::rank;
    spec.estimator = EstimatorKind::jio_rls;
    spec.sweep_values = {1, 2, 3, 4, 5, 6, 7, 8};
    return run_experiment(spec);
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

void emit_csv(const RunResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("emit_csv: cannot write '" + path + "'");
    out << "sweep,label,metric,value\n";
    for (const SweepResult& s : result.sweeps) {
        out << fmt(s.sweep_value) << "," << s.label << ",ber," << fmt(s.ber) << "\n";
        out << fmt(s.sweep_value) << "," << s.label << ",ber_halfwidth," << fmt(s.ber_halfwidth)
            << "\n";
        out << fmt(s.sweep_value) << "," << s.label << ",bits," << fmt(double(s.bits)) << "\n";
        out << fmt(s.sweep_value) << "," << s.label << ",bit_errors," << fmt(double(s.bit_errors))
            << "\n";
        out << fmt(s.sweep_value) << "," << s.label << ",failed_runs," << fmt(double(s.failed_runs))
            << "\n";
    }
    if (!out) throw Error("emit_csv: write failed for '" + path + "'");
}

void emit_plotdata(const RunResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("emit_plotdata: cannot write '" + path + "'");
    out << "# symbol";
    for (const SweepResult& s : result.sweeps) out << " ber[" << s.label << "]";
    bool ranks = false, ses = false;
    for (const SweepResult& s : result.sweeps) {
        for (double v : s.rank_curve)
            if (v > 0.0) ranks = true;
        if (!s.ses_true_curve.empty()) ses = true;
    }
    if (ranks)
        for (const SweepResult& s : result.sweeps) out << " rank[" << s.label << "]";
    if (ses)
        for (const SweepResult& s : result.sweeps)
            out << " ses_true[" << s.label << "] ses_dd[" << s.label << "]";
    out << "\n";
    const std::size_t total = result.sweeps.empty() ? 0 : result.sweeps[0].ber_curve.size();
    for (std::size_t i = 0; i < total; ++i) {
        out << (i + 1);
        for (const SweepResult& s : result.sweeps) out << " " << fmt(s.ber_curve[i]);
        if (ranks)
            for (const SweepResult& s : result.sweeps) out << " " << fmt(s.rank_curve[i]);
        if (ses)
            for (const SweepResult& s : result.sweeps)
                out << " " << fmt(s.ses_true_curve.empty() ? 0.0 : s.ses_true_curve[i]) << " "
                    << fmt(s.ses_dd_curve.empty() ? 0.0 : s.ses_dd_curve[i]);
        out << "\n";
    }
    if (!out) throw Error("emit_plotdata: write failed for '" + path + "'");
}

std::vector<std::tuple<double, std::string, double>> parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("parse_csv: cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::tuple<double, std::string, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string sweep, label, metric, value;
        std::getline(ss, sweep, ',');
        std::getline(ss, label, ',');
        std::getline(ss, metric, ',');
        std::getline(ss, value, ',');
        rows.emplace_back(std::stod(sweep), metric, std::stod(value));
    }
    return rows;
}

}  // namespace rrstap
