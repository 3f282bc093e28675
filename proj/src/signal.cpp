#include "rrstap/signal.hpp"

#include <cmath>

namespace rrstap {

double SystemConfig::noise_variance() const {
    return 0.5 * std::pow(10.0, -ebn0_db / 10.0);
}

void SystemConfig::validate() const {
    if (users < 1) throw ConfigError("config: users must be >= 1");
    if (spreading_gain < 1) throw ConfigError("config: spreading_gain must be >= 1");
    if (antennas < 1) throw ConfigError("config: antennas must be >= 1");
    if (path_span < 1) throw ConfigError("config: path_span must be >= 1");
    if (path_span > spreading_gain)
        throw ConfigError("config: path_span (" + std::to_string(path_span) +
                          ") must not exceed spreading_gain (" + std::to_string(spreading_gain) + ")");
    if (active_paths < 1 || active_paths > path_span)
        throw ConfigError("config: active_paths must be in [1, path_span]");
    // worst case delays are cumulative 2-chip spacings
    if (2 * (active_paths - 1) > path_span - 1)
        throw ConfigError("config: active_paths delays can exceed path_span - 1");
    if (clarke_oscillators < 1) throw ConfigError("config: clarke_oscillators must be >= 1");
    if (doppler < 0.0) throw ConfigError("config: doppler must be >= 0");
}

SpreadingCode SpreadingCode::random(int n, Rng& rng) {
    SpreadingCode code;
    code.chips.resize(n);
    const double scale = 1.0 / std::sqrt(double(n));
    for (int c = 0; c < n; ++c) code.chips[c] = rng.sign() * scale;
    return code;
}

SignatureSet build_signatures(const SpreadingCode& code, int path_span, int antennas, int chip_window) {
    const int n = int(code.chips.size());
    if (path_span > n) throw ConfigError("build_signatures: path_span exceeds spreading gain");
    if (chip_window != n + path_span - 1)
        throw ConfigError("build_signatures: chip_window must be N + L - 1");

    SignatureSet set;
    set.spreading_gain = n;
    set.path_span = path_span;
    set.antennas = antennas;
    set.chip_window = chip_window;
    set.prev_block = CMat(chip_window, path_span);
    set.cur_block = CMat(chip_window, path_span);
    set.next_block = CMat(chip_window, path_span);

    // Chip c of the symbol occupying slot (window start + offset) lands at
    // row offset + delay. Current symbol starts at row 0, the previous one
    // at row -N, the next at row +N; rows outside [0, M) fall off.
    for (int l = 0; l < path_span; ++l) {
        for (int r = 0; r < chip_window; ++r) {
            int c = r - l;
            if (c >= 0 && c < n) set.cur_block(r, l) = code.chips[c];
            c = r - l + n;
            if (c >= 0 && c < n) set.prev_block(r, l) = code.chips[c];
            c = r - l - n;
            if (c >= 0 && c < n) set.next_block(r, l) = code.chips[c];
        }
    }
    return set;
}

CMat SignatureSet::full(Role role) const {
    const CMat& block = role == Role::prev ? prev_block : role == Role::cur ? cur_block : next_block;
    CMat out(antennas * chip_window, antennas * path_span);
    for (int j = 0; j < antennas; ++j)
        for (int r = 0; r < chip_window; ++r)
            for (int l = 0; l < path_span; ++l)
                out(j * chip_window + r, j * path_span + l) = block(r, l);
    return out;
}

CVec SignatureSet::apply(Role role, const CVec& h) const {
    const CMat& block = role == Role::prev ? prev_block : role == Role::cur ? cur_block : next_block;
    if (int(h.size()) != antennas * path_span)
        throw ContractViolation("SignatureSet::apply: channel vector length mismatch");
    CVec out(antennas * chip_window);
    for (int j = 0; j < antennas; ++j) {
        for (int r = 0; r < chip_window; ++r) {
            cplx acc = 0.0;
            for (int l = 0; l < path_span; ++l) acc += block(r, l) * h[j * path_span + l];
            out[j * chip_window + r] = acc;
        }
    }
    return out;
}

ChannelState make_channel(const SystemConfig& cfg, Rng& rng) {
    cfg.validate();
    ChannelState state;
    state.antennas = cfg.antennas;
    state.path_span = cfg.path_span;
    state.doppler = cfg.doppler;
    state.users.resize(cfg.users);

    // power delay profile of 0, -3, -6, ... dB, normalized to unit total
    std::vector<double> prof(cfg.active_paths);
    double total = 0.0;
    for (int l = 0; l < cfg.active_paths; ++l) {
        prof[l] = std::pow(10.0, -3.0 * l / 10.0);
        total += prof[l];
    }
    for (double& v : prof) v = std::sqrt(v / total);

    for (auto& user : state.users) {
        user.delays.resize(cfg.active_paths);
        user.doas.resize(cfg.active_paths);
        user.amps = prof;
        user.osc_cos.resize(cfg.active_paths);
        user.osc_phase.resize(cfg.active_paths);
        int delay = 0;
        for (int l = 0; l < cfg.active_paths; ++l) {
            user.delays[l] = delay;
            delay += rng.uniform_int(1, 2);
            user.doas[l] = rng.uniform(0.0, 2.0 * Rng::pi / 3.0);
            user.osc_cos[l].resize(cfg.clarke_oscillators);
            user.osc_phase[l].resize(cfg.clarke_oscillators);
            for (int o = 0; o < cfg.clarke_oscillators; ++o) {
                user.osc_cos[l][o] = std::cos(rng.uniform(0.0, 2.0 * Rng::pi));
                user.osc_phase[l][o] = rng.uniform(0.0, 2.0 * Rng::pi);
            }
        }
    }
    return state;
}

void evolve_channel(ChannelState& state) {
    state.now += 1;
}

cplx ChannelState::path_gain(int user, int path, long i) const {
    const UserChannel& u = users[user];
    const auto& cosang = u.osc_cos[path];
    const auto& phase = u.osc_phase[path];
    const double omega = 2.0 * Rng::pi * doppler * double(i);
    double re = 0.0, im = 0.0;
    for (std::size_t o = 0; o < cosang.size(); ++o) {
        const double arg = omega * cosang[o] + phase[o];
        re += std::cos(arg);
        im += std::sin(arg);
    }
    const double scale = u.amps[path] / std::sqrt(double(cosang.size()));
    return {scale * re, scale * im};
}

CVec spacetime_channel_vector(const ChannelState& state, int user, long i) {
    const UserChannel& u = state.users[user];
    CVec h(state.antennas * state.path_span);
    for (std::size_t l = 0; l < u.delays.size(); ++l) {
        const cplx gain = state.path_gain(user, int(l), i);
        const double sin_doa = std::sin(u.doas[l]);
        for (int j = 0; j < state.antennas; ++j) {
            const double arg = -Rng::pi * double(j) * sin_doa;
            h[j * state.path_span + u.delays[l]] = gain * cplx{std::cos(arg), std::sin(arg)};
        }
    }
    return h;
}

SymbolStream make_symbols(const SystemConfig& cfg, int count, Rng& rng) {
    SymbolStream stream;
    stream.symbols.resize(cfg.users);
    stream.amplitudes.resize(cfg.users);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < cfg.users; ++k) {
        stream.symbols[k].resize(count + 2);
        for (auto& b : stream.symbols[k]) b = cplx{rng.sign() * inv_sqrt2, rng.sign() * inv_sqrt2};
        // user 0 is the desired user at unit amplitude
        stream.amplitudes[k] =
            k == 0 ? 1.0 : std::pow(10.0, rng.normal() * cfg.power_std_db / 20.0);
    }
    return stream;
}

CVec generate_received(const SymbolStream& streams, const ChannelState& channels,
                       const std::vector<SignatureSet>& signatures, double noise_variance, long i,
                       Rng& rng) {
    const int jm = channels.antennas * signatures.at(0).chip_window;
    CVec r(jm);
    for (std::size_t k = 0; k < signatures.size(); ++k) {
        const double amp = streams.amplitudes[k];
        const cplx b_prev = streams.symbols[k][i - 1];
        const cplx b_cur = streams.symbols[k][i];
        const cplx b_next = streams.symbols[k][i + 1];
        const CVec p_prev = signatures[k].apply(SignatureSet::Role::prev,
                                                spacetime_channel_vector(channels, int(k), i - 1));
        const CVec p_cur = signatures[k].apply(SignatureSet::Role::cur,
                                               spacetime_channel_vector(channels, int(k), i));
        const CVec p_next = signatures[k].apply(SignatureSet::Role::next,
                                                spacetime_channel_vector(channels, int(k), i + 1));
        for (int idx = 0; idx < jm; ++idx)
            r[idx] += amp * (b_prev * p_prev[idx] + b_cur * p_cur[idx] + b_next * p_next[idx]);
    }
    if (noise_variance > 0.0)
        for (int idx = 0; idx < jm; ++idx) r[idx] += rng.cnormal(noise_variance);
    return r;
}

cplx qpsk_slice(cplx x) {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    return {x.real() >= 0.0 ? inv_sqrt2 : -inv_sqrt2, x.imag() >= 0.0 ? inv_sqrt2 : -inv_sqrt2};
}

}  // namespace rrstap
