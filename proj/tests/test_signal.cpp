#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "rrstap/signal.hpp"

using namespace rrstap;

namespace {

/// Chip-level oracle: convolve the transmitted chip stream of three symbols
/// with a per-antenna channel impulse response and cut out the observation
/// window of the middle symbol. Independent of the signature matrices.
CVec chip_convolution_window(const SpreadingCode& code, const std::vector<cplx>& b3,
                             const std::vector<std::vector<cplx>>& taps_per_antenna, int path_span) {
    const int n = int(code.chips.size());
    const int m = n + path_span - 1;
    const int antennas = int(taps_per_antenna.size());
    // chip stream covering symbols -1, 0, +1 at offsets 0, n, 2n
    std::vector<cplx> chips(std::size_t(3 * n));
    for (int s = 0; s < 3; ++s)
        for (int c = 0; c < n; ++c) chips[std::size_t(s * n + c)] = b3[std::size_t(s)] * code.chips[c];
    CVec window(std::size_t(antennas * m));
    for (int j = 0; j < antennas; ++j) {
        const auto& taps = taps_per_antenna[std::size_t(j)];
        for (int r = 0; r < m; ++r) {
            const int t = n + r;  // absolute chip index of window row r
            cplx acc = 0.0;
            for (int l = 0; l < int(taps.size()); ++l) {
                const int src = t - l;
                if (src >= 0 && src < 3 * n) acc += taps[std::size_t(l)] * chips[std::size_t(src)];
            }
            window[std::size_t(j * m + r)] = acc;
        }
    }
    return window;
}

SystemConfig tiny_config() {
    SystemConfig cfg;
    cfg.users = 1;
    cfg.spreading_gain = 4;
    cfg.path_span = 2;
    cfg.antennas = 1;
    cfg.active_paths = 1;
    return cfg;
}

}  // namespace

TEST_CASE("build_signatures: single path is the code itself, no ISI") {
    SpreadingCode code;
    code.chips = {0.5, 0.5, 0.5, 0.5};
    SignatureSet set = build_signatures(code, 1, 1, 4);
    for (int r = 0; r < 4; ++r) CHECK(set.cur_block(r, 0).real() == doctest::Approx(0.5));
    CHECK(fro_norm(set.prev_block) == 0.0);
    CHECK(fro_norm(set.next_block) == 0.0);
}

TEST_CASE("build_signatures: hand case N=2 L=2 overlap structure") {
    const double a = 0.6, b = -0.8;
    SpreadingCode code;
    code.chips = {a, b};
    SignatureSet set = build_signatures(code, 2, 1, 3);
    // current symbol: column l = code shifted down l chips
    CHECK(set.cur_block(0, 0).real() == doctest::Approx(a));
    CHECK(set.cur_block(1, 0).real() == doctest::Approx(b));
    CHECK(set.cur_block(2, 0).real() == doctest::Approx(0.0));
    CHECK(set.cur_block(0, 1).real() == doctest::Approx(0.0));
    CHECK(set.cur_block(1, 1).real() == doctest::Approx(a));
    CHECK(set.cur_block(2, 1).real() == doctest::Approx(b));
    // previous symbol's tail leaks into the top row through the delayed path
    CHECK(set.prev_block(0, 1).real() == doctest::Approx(b));
    CHECK(std::abs(set.prev_block(0, 0)) + std::abs(set.prev_block(1, 0)) +
              std::abs(set.prev_block(2, 0)) ==
          doctest::Approx(0.0));
    // next symbol's head enters the bottom row through the direct path
    CHECK(set.next_block(2, 0).real() == doctest::Approx(a));
    CHECK(std::abs(set.next_block(0, 1)) + std::abs(set.next_block(1, 1)) +
              std::abs(set.next_block(2, 1)) ==
          doctest::Approx(0.0));
}

TEST_CASE("build_signatures: J=2 replicates the block on the diagonal") {
    Rng rng(4);
    SpreadingCode code = SpreadingCode::random(8, rng);
    SignatureSet set = build_signatures(code, 3, 2, 10);
    CMat full = set.full(SignatureSet::Role::cur);
    CHECK(full.rows() == 20);
    CHECK(full.cols() == 6);
    for (int r = 0; r < 10; ++r)
        for (int l = 0; l < 3; ++l) {
            CHECK(full(std::size_t(r), std::size_t(l)) == set.cur_block(std::size_t(r), std::size_t(l)));
            CHECK(full(std::size_t(10 + r), std::size_t(3 + l)) ==
                  set.cur_block(std::size_t(r), std::size_t(l)));
            CHECK(full(std::size_t(10 + r), std::size_t(l)) == cplx{});
            CHECK(full(std::size_t(r), std::size_t(3 + l)) == cplx{});
        }
    CVec h = oracle::random_cvec(6, rng);
    CHECK(norm(set.apply(SignatureSet::Role::cur, h) - full * h) < 1e-12);
}

TEST_CASE("signature structure matches the chip-level convolution oracle") {
    Rng rng(9);
    const int n = 8, L = 5, antennas = 2;
    const int m = n + L - 1;
    SpreadingCode code = SpreadingCode::random(n, rng);
    SignatureSet set = build_signatures(code, L, antennas, m);

    std::vector<std::vector<cplx>> taps(antennas, std::vector<cplx>(L));
    CVec h(std::size_t(antennas * L));
    for (int j = 0; j < antennas; ++j)
        for (int l : {0, 2, 4}) {
            const cplx g{rng.normal(), rng.normal()};
            taps[std::size_t(j)][std::size_t(l)] = g;
            h[std::size_t(j * L + l)] = g;
        }

    std::vector<cplx> b3 = {{0.7, -0.7}, {-0.7, 0.7}, {0.7, 0.7}};
    CVec expected = chip_convolution_window(code, b3, taps, L);
    CVec got = b3[0] * set.apply(SignatureSet::Role::prev, h) +
               b3[1] * set.apply(SignatureSet::Role::cur, h) +
               b3[2] * set.apply(SignatureSet::Role::next, h);
    CHECK(norm(got - expected) < 1e-12);
}

TEST_CASE("build_signatures rejects path span beyond the spreading gain") {
    Rng rng(1);
    SpreadingCode code = SpreadingCode::random(4, rng);
    CHECK_THROWS_AS(build_signatures(code, 5, 1, 8), ConfigError);
}

TEST_CASE("static channel: doppler 0 is constant across symbols") {
    SystemConfig cfg = tiny_config();
    cfg.doppler = 0.0;
    Rng rng(7);
    ChannelState state = make_channel(cfg, rng);
    const CVec h0 = spacetime_channel_vector(state, 0, 0);
    const CVec h1000 = spacetime_channel_vector(state, 0, 1000);
    CHECK(norm(h0 - h1000) < 1e-12);
    evolve_channel(state);
    CHECK(state.now == 1);
}

TEST_CASE("clarke fading: per-path power matches the delay profile within 3%") {
    SystemConfig cfg;
    cfg.users = 1;
    cfg.spreading_gain = 16;
    cfg.path_span = 9;
    cfg.active_paths = 3;
    cfg.doppler = 0.01;
    std::vector<double> want(3);
    double total = 0.0;
    for (int l = 0; l < 3; ++l) {
        want[std::size_t(l)] = std::pow(10.0, -0.3 * l);
        total += want[std::size_t(l)];
    }
    for (double& w : want) w /= total;

    const int trials = 40, steps = 2500;
    std::vector<double> got(3, 0.0);
    for (int t = 0; t < trials; ++t) {
        Rng rng(1000 + std::uint64_t(t));
        ChannelState state = make_channel(cfg, rng);
        for (int i = 0; i < steps; ++i)
            for (int l = 0; l < 3; ++l) got[std::size_t(l)] += std::norm(state.path_gain(0, l, i));
    }
    for (int l = 0; l < 3; ++l) {
        got[std::size_t(l)] /= double(trials) * steps;
        CHECK(got[std::size_t(l)] == doctest::Approx(want[std::size_t(l)]).epsilon(0.03));
    }
}

TEST_CASE("clarke fading: envelope decorrelates near the first Bessel zero region") {
    // At lag 1/(2 fdT) the complex-gain autocorrelation sits at J0(pi) ~ -0.304;
    // the correlation of the Rayleigh envelope sequence is near J0(pi)^2 ~ 0.09.
    SystemConfig cfg = tiny_config();
    cfg.doppler = 0.01;
    const int lag = int(std::lround(1.0 / (2.0 * cfg.doppler)));
    const int steps = 4000, trials = 30;
    double num = 0.0, den = 0.0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(500 + std::uint64_t(t));
        ChannelState state = make_channel(cfg, rng);
        std::vector<double> env(static_cast<std::size_t>(steps));
        double mean = 0.0;
        for (int i = 0; i < steps; ++i) {
            env[std::size_t(i)] = std::abs(state.path_gain(0, 0, i));
            mean += env[std::size_t(i)];
        }
        mean /= steps;
        for (int i = 0; i + lag < steps; ++i)
            num += (env[std::size_t(i)] - mean) * (env[std::size_t(i + lag)] - mean);
        for (int i = 0; i < steps; ++i)
            den += (env[std::size_t(i)] - mean) * (env[std::size_t(i)] - mean);
    }
    CHECK(std::abs(num / den) < 0.3);
}

TEST_CASE("spacetime_channel_vector: broadside and endfire array phases") {
    SystemConfig cfg = tiny_config();
    cfg.antennas = 2;
    cfg.doppler = 0.0;
    Rng rng(12);
    ChannelState state = make_channel(cfg, rng);

    state.users[0].doas[0] = 0.0;  // broadside: all antennas identical
    CVec h = spacetime_channel_vector(state, 0, 0);
    CHECK(std::abs(h[0] - h[std::size_t(cfg.path_span)]) < 1e-12);

    // endfire with unit gain: second antenna picks up exp(-i pi) = -1
    state.users[0].doas[0] = Rng::pi / 2.0;
    for (auto& c : state.users[0].osc_cos[0]) c = 0.0;
    for (auto& p : state.users[0].osc_phase[0]) p = 0.0;
    // frozen oscillators sum to n, so amp 1/sqrt(n) makes the gain exactly 1
    state.users[0].amps[0] = 1.0 / std::sqrt(double(cfg.clarke_oscillators));
    h = spacetime_channel_vector(state, 0, 0);
    CHECK(std::abs(h[0] - cplx{1.0, 0.0}) < 1e-12);
    CHECK(std::abs(h[std::size_t(cfg.path_span)] - cplx{-1.0, 0.0}) < 1e-9);
}

TEST_CASE("generate_received: single user, single path, no noise is a scaled code") {
    SystemConfig cfg;
    cfg.users = 1;
    cfg.spreading_gain = 4;
    cfg.path_span = 1;
    cfg.active_paths = 1;
    cfg.doppler = 0.0;
    Rng rng(21);
    ChannelState chan = make_channel(cfg, rng);
    SpreadingCode code = SpreadingCode::random(cfg.spreading_gain, rng);
    std::vector<SignatureSet> sigs{build_signatures(code, 1, 1, 4)};
    SymbolStream stream = make_symbols(cfg, 3, rng);

    Rng noise(1);
    CVec r = generate_received(stream, chan, sigs, 0.0, 2, noise);
    const cplx scale = stream.symbols[0][2] * chan.path_gain(0, 0, 2);
    for (int c = 0; c < 4; ++c) CHECK(std::abs(r[std::size_t(c)] - scale * code.chips[c]) < 1e-12);
}

TEST_CASE("generate_received: noise-only covariance within 2% of sigma^2 I") {
    SystemConfig cfg;
    cfg.users = 1;
    cfg.spreading_gain = 4;
    cfg.path_span = 1;
    cfg.active_paths = 1;
    cfg.antennas = 2;
    cfg.doppler = 0.0;
    Rng rng(33);
    ChannelState chan = make_channel(cfg, rng);
    SpreadingCode code = SpreadingCode::random(cfg.spreading_gain, rng);
    std::vector<SignatureSet> sigs{build_signatures(code, 1, 2, 4)};
    SymbolStream stream = make_symbols(cfg, 3, rng);
    stream.amplitudes[0] = 0.0;  // signal off

    const double sigma2 = 0.7;
    const int jm = cfg.dim();
    const int draws = 100000;
    CMat cov(static_cast<std::size_t>(jm), static_cast<std::size_t>(jm));
    Rng noise(77);
    for (int t = 0; t < draws; ++t) {
        CVec r = generate_received(stream, chan, sigs, sigma2, 2, noise);
        for (int a = 0; a < jm; ++a)
            for (int b = 0; b < jm; ++b)
                cov(std::size_t(a), std::size_t(b)) += r[std::size_t(a)] * std::conj(r[std::size_t(b)]);
    }
    cov = (cplx{1.0 / draws}) * cov;
    CMat target = (cplx{sigma2}) * CMat::identity(std::size_t(jm));
    CHECK(fro_norm(cov - target) / fro_norm(target) < 0.02);
}

TEST_CASE("generate_received: matched filter separates orthogonal users without noise") {
    SystemConfig cfg;
    cfg.users = 2;
    cfg.spreading_gain = 4;
    cfg.path_span = 1;
    cfg.active_paths = 1;
    cfg.doppler = 0.0;
    Rng rng(41);
    ChannelState chan = make_channel(cfg, rng);
    SpreadingCode c1, c2;  // orthogonal Walsh pair
    c1.chips = {0.5, 0.5, 0.5, 0.5};
    c2.chips = {0.5, -0.5, 0.5, -0.5};
    std::vector<SignatureSet> sigs{build_signatures(c1, 1, 1, 4), build_signatures(c2, 1, 1, 4)};
    SymbolStream stream = make_symbols(cfg, 5, rng);

    Rng noise(3);
    for (long i = 1; i <= 5; ++i) {
        CVec r = generate_received(stream, chan, sigs, 0.0, i, noise);
        cplx mf = 0.0;
        for (int c = 0; c < 4; ++c) mf += c1.chips[c] * r[std::size_t(c)];
        const cplx recovered = mf * std::conj(chan.path_gain(0, 0, i)) /
                               std::norm(chan.path_gain(0, 0, i)) / stream.amplitudes[0];
        CHECK(std::abs(recovered - stream.symbols[0][std::size_t(i)]) < 1e-9);
        CHECK(std::abs(qpsk_slice(recovered) - stream.symbols[0][std::size_t(i)]) < 1e-12);
    }
}

TEST_CASE("generate_received: linear in the symbol streams") {
    SystemConfig cfg;
    cfg.users = 2;
    cfg.spreading_gain = 8;
    cfg.path_span = 3;
    cfg.active_paths = 2;
    cfg.doppler = 0.001;
    Rng rng(55);
    ChannelState chan = make_channel(cfg, rng);
    SpreadingCode code1 = SpreadingCode::random(8, rng);
    SpreadingCode code2 = SpreadingCode::random(8, rng);
    std::vector<SignatureSet> sigs{build_signatures(code1, 3, 1, 10),
                                   build_signatures(code2, 3, 1, 10)};
    SymbolStream stream = make_symbols(cfg, 4, rng);

    SymbolStream only1 = stream, only2 = stream;
    only1.amplitudes[1] = 0.0;
    only2.amplitudes[0] = 0.0;

    Rng n1(5), n2(5), n3(5);
    CVec sum = generate_received(only1, chan, sigs, 0.0, 2, n1) +
               generate_received(only2, chan, sigs, 0.0, 2, n2);
    CVec both = generate_received(stream, chan, sigs, 0.0, 2, n3);
    CHECK(norm(both - sum) < 1e-12);
}

TEST_CASE("energy conservation: static channel keeps per-symbol signature energy constant") {
    SystemConfig cfg;
    cfg.users = 1;
    cfg.spreading_gain = 8;
    cfg.path_span = 5;
    cfg.active_paths = 3;
    cfg.doppler = 0.0;
    Rng rng(61);
    ChannelState chan = make_channel(cfg, rng);
    SpreadingCode code = SpreadingCode::random(8, rng);
    SignatureSet set = build_signatures(code, 5, 1, 12);
    const double e0 = norm(set.apply(SignatureSet::Role::cur, spacetime_channel_vector(chan, 0, 0)));
    for (long i = 1; i < 50; ++i) {
        const double ei =
            norm(set.apply(SignatureSet::Role::cur, spacetime_channel_vector(chan, 0, i)));
        CHECK(ei == doctest::Approx(e0).epsilon(1e-12));
    }
}

TEST_CASE("reproducibility: identical seeds give bit-identical streams") {
    SystemConfig cfg;
    cfg.users = 3;
    cfg.spreading_gain = 8;
    cfg.path_span = 3;
    cfg.active_paths = 2;
    cfg.doppler = 0.002;

    auto draw = [&](std::uint64_t seed) {
        Rng rng(seed);
        ChannelState chan = make_channel(cfg, rng);
        std::vector<SignatureSet> sigs;
        for (int k = 0; k < cfg.users; ++k)
            sigs.push_back(build_signatures(SpreadingCode::random(8, rng), 3, 1, 10));
        SymbolStream stream = make_symbols(cfg, 10, rng);
        Rng noise(seed + 1);
        std::vector<CVec> rs;
        for (long i = 1; i <= 10; ++i)
            rs.push_back(generate_received(stream, chan, sigs, 0.1, i, noise));
        return rs;
    };
    auto a = draw(99), b = draw(99);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t c = 0; c < a[i].size(); ++c) {
            CHECK(a[i][c].real() == b[i][c].real());
            CHECK(a[i][c].imag() == b[i][c].imag());
        }
}

TEST_CASE("qpsk_slice: quadrants, idempotence, positive tie-break") {
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(qpsk_slice({0.3, -0.7}) == cplx{s, -s});
    for (double re : {-1.0, 1.0})
        for (double im : {-1.0, 1.0}) {
            const cplx pt{re * s, im * s};
            CHECK(qpsk_slice(pt) == pt);
        }
    CHECK(qpsk_slice({0.0, 0.0}) == cplx{s, s});
    CHECK(qpsk_slice({0.0, -0.1}) == cplx{s, -s});
}

TEST_CASE("config validation rejects inconsistent setups") {
    SystemConfig cfg = tiny_config();
    cfg.path_span = 5;  // > spreading_gain
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = tiny_config();
    cfg.users = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = tiny_config();
    cfg.active_paths = 2;
    cfg.path_span = 2;  // worst-case delay 2 > path_span - 1
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
