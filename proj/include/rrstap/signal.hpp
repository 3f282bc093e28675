#pragma once

#include <vector>

#include "rrstap/linalg.hpp"
#include "rrstap/rng.hpp"

namespace rrstap {

/// Scenario description for the DS-CDMA space-time link.
struct SystemConfig {
    int users = 8;            // K
    int spreading_gain = 16;  // N chips per symbol
    int path_span = 9;        // L, upper bound on channel delay spread (chips)
    int antennas = 1;         // J, ULA elements at half-wavelength spacing
    double ebn0_db = 12.0;
    double doppler = 0.001;       // fdT, normalized Doppler in cycles/symbol
    double power_std_db = 1.5;    // log-normal interferer power spread
    int active_paths = 3;         // resolvable paths actually excited
    int clarke_oscillators = 32;  // sum-of-sinusoids order per path

    int chip_window() const { return spreading_gain + path_span - 1; }  // M
    int dim() const { return antennas * chip_window(); }                // JM

    /// Noise variance per complex sample for a unit-energy desired user:
    /// QPSK carries 2 bits, so Eb = 1/2 and sigma^2 = N0 = 0.5 * 10^(-EbN0/10).
    double noise_variance() const;

    void validate() const;
};

/// Per-user binary spreading sequence with chips +-1/sqrt(N).
struct SpreadingCode {
    std::vector<double> chips;

    static SpreadingCode random(int n, Rng& rng);
};

/// The three chip-overlap matrices tying a symbol to the observation window:
/// `cur` for the symbol in the window, `prev` for the tail of the one before,
/// `next` for the head of the one after. Each is M x L; the full space-time
/// signature is J copies of the block on a JM x JL block diagonal.
struct SignatureSet {
    int spreading_gain = 0, path_span = 0, antennas = 0, chip_window = 0;
    CMat prev_block, cur_block, next_block;

    enum class Role { prev, cur, next };

    /// Materialized JM x JL block-diagonal matrix for one role.
    CMat full(Role role) const;
    /// Apply the block-diagonal matrix to a JL channel vector (fast path).
    CVec apply(Role role, const CVec& spacetime_channel) const;
};

SignatureSet build_signatures(const SpreadingCode& code, int path_span, int antennas, int chip_window);

/// One user's multipath state: integer chip delays, per-path DoA and delay
/// profile amplitude, and the sum-of-sinusoids oscillator bank realizing
/// Clarke's model (unit-power complex gain per path before profiling).
struct UserChannel {
    std::vector<int> delays;
    std::vector<double> doas;
    std::vector<double> amps;
    std::vector<std::vector<double>> osc_cos;    // [path][oscillator] cos of arrival angle
    std::vector<std::vector<double>> osc_phase;  // [path][oscillator]
};

struct ChannelState {
    int antennas = 1;
    int path_span = 1;
    double doppler = 0.0;
    long now = 0;
    std::vector<UserChannel> users;

    /// Clarke gain of one active path at symbol i, already profile-scaled.
    cplx path_gain(int user, int path, long i) const;
};

ChannelState make_channel(const SystemConfig& cfg, Rng& rng);

/// Advance the fading process by one symbol.
void evolve_channel(ChannelState& state);

/// JL x 1 channel vector stacked antenna-by-antenna: antenna j's slot for
/// delay tau holds gain * exp(-i pi j sin(doa)).
CVec spacetime_channel_vector(const ChannelState& state, int user, long i);

/// QPSK streams (unit modulus) plus per-user amplitudes; index 0 and count+1
/// exist so the first/last symbols have inter-symbol neighbours.
struct SymbolStream {
    std::vector<std::vector<cplx>> symbols;  // [user][0 .. count+1]
    std::vector<double> amplitudes;

    int count() const { return symbols.empty() ? 0 : int(symbols[0].size()) - 2; }
};

SymbolStream make_symbols(const SystemConfig& cfg, int count, Rng& rng);

/// Received JM vector at symbol i (1-based within the stream): superposition
/// of previous/current/next symbol contributions of every user plus circular
/// complex Gaussian noise of the given variance per entry.
CVec generate_received(const SymbolStream& streams, const ChannelState& channels,
                       const std::vector<SignatureSet>& signatures, double noise_variance, long i,
                       Rng& rng);

/// Nearest QPSK constellation point by quadrant; exact zeros break toward
/// the positive half-plane.
cplx qpsk_slice(cplx x);

}  // namespace rrstap
