#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "rrstap/rank.hpp"

using namespace rrstap;

namespace {

/// Direct-sum oracle for the a posteriori cost: literally replay the stored
/// samples against the current rank-d prefix filters.
double direct_cost(const std::vector<CVec>& inputs, const std::vector<cplx>& desired,
                   const CMat& t, const CVec& w, double alpha, int d) {
    double cost = 0.0;
    const std::size_t n = inputs.size();
    for (std::size_t l = 0; l < n; ++l) {
        cplx pred = 0.0;
        for (int c = 0; c < d; ++c) {
            cplx rd = 0.0;
            for (std::size_t row = 0; row < t.rows(); ++row)
                rd += std::conj(t(row, std::size_t(c))) * inputs[l][row];
            pred += std::conj(w[std::size_t(c)]) * rd;
        }
        cost += std::pow(alpha, double(n - 1 - l)) * std::norm(desired[l] - pred);
    }
    return cost;
}

/// Rank-k stationary stream (same construction as the estimator tests).
void make_stream(int dim, int signal_rank, int count, double noise_sigma, std::uint64_t seed,
                 std::vector<CVec>& inputs, std::vector<cplx>& desired) {
    Rng rng(seed);
    std::vector<CVec> basis;
    for (int k = 0; k < signal_rank; ++k) {
        CVec v = oracle::random_cvec(std::size_t(dim), rng);
        for (const CVec& q : basis) v = v - dot(q, v) * q;
        basis.push_back((cplx{1.0 / norm(v)}) * v);
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < count; ++i) {
        CVec r(static_cast<std::size_t>(dim));
        cplx d = 0.0;
        for (int k = 0; k < signal_rank; ++k) {
            const cplx b{rng.sign() * inv_sqrt2, rng.sign() * inv_sqrt2};
            const double amp = 1.0 - 0.15 * k;
            if (k == 0) d = b;
            for (int a = 0; a < dim; ++a)
                r[std::size_t(a)] += amp * b * basis[std::size_t(k)][std::size_t(a)];
        }
        if (noise_sigma > 0.0)
            for (int a = 0; a < dim; ++a) r[std::size_t(a)] += rng.cnormal(noise_sigma * noise_sigma);
        inputs.push_back(r);
        desired.push_back(d);
    }
}

}  // namespace

TEST_CASE("aposteriori_cost: empty history is zero, perfect predictions are zero") {
    ExtendedJioState st = ExtendedJioState::init(6, 2, 4, 0.998, 0.5);
    CHECK(aposteriori_cost(st, 3) == 0.0);

    // hand-built state predicting d = r[0] exactly with the rank-1 prefix
    st.filter.T = CMat::eye_top(6, 4);
    st.filter.w_bar = CVec(4);
    st.filter.w_bar[0] = 1.0;
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    Rng rng(3);
    for (int i = 0; i < 5; ++i) {
        CVec r = oracle::random_cvec(6, rng);
        inputs.push_back(r);
        desired.push_back(r[0]);
    }
    for (std::size_t l = 0; l < inputs.size(); ++l) {
        const cplx d = desired[l];
        for (std::size_t a = 0; a < 6; ++a) {
            st.p_alpha[a] = st.alpha * st.p_alpha[a] + std::conj(d) * inputs[l][a];
            for (std::size_t b = 0; b < 6; ++b)
                st.r_alpha(a, b) = st.alpha * st.r_alpha(a, b) + inputs[l][a] * std::conj(inputs[l][b]);
        }
        st.sigma_alpha = st.alpha * st.sigma_alpha + std::norm(d);
        st.samples += 1;
    }
    CHECK(aposteriori_cost(st, 1) < 1e-12);
}

TEST_CASE("aposteriori_cost: alpha -> 0 keeps only the newest sample") {
    ExtendedJioState st = ExtendedJioState::init(4, 1, 3, 0.998, 0.0);
    Rng rng(9);
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    for (int i = 0; i < 4; ++i) {
        inputs.push_back(oracle::random_cvec(4, rng));
        desired.push_back(cplx{rng.normal(), rng.normal()});
    }
    for (std::size_t l = 0; l < inputs.size(); ++l) {
        for (std::size_t a = 0; a < 4; ++a) {
            st.p_alpha[a] = std::conj(desired[l]) * inputs[l][a];
            for (std::size_t b = 0; b < 4; ++b) st.r_alpha(a, b) = inputs[l][a] * std::conj(inputs[l][b]);
        }
        st.sigma_alpha = std::norm(desired[l]);
        st.samples += 1;
    }
    const double got = aposteriori_cost(st, 2);
    const double want = direct_cost({inputs.back()}, {desired.back()}, st.filter.T, st.filter.w_bar,
                                    0.5 /*irrelevant for one sample*/, 2);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("aposteriori_cost: 3-sample window at alpha = 0.5 matches direct summation") {
    ExtendedJioState st = ExtendedJioState::init(5, 1, 4, 0.998, 0.5);
    Rng rng(17);
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    for (int i = 0; i < 3; ++i) {
        inputs.push_back(oracle::random_cvec(5, rng));
        desired.push_back(cplx{rng.normal(), rng.normal()});
    }
    for (std::size_t l = 0; l < inputs.size(); ++l) st.step(inputs[l], desired[l]);
    for (int d = 1; d <= 4; ++d) {
        const double got = aposteriori_cost(st, d);
        const double want = direct_cost(inputs, desired, st.filter.T, st.filter.w_bar, 0.5, d);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("select_rank_extended: degenerate range always returns it") {
    ExtendedJioState st = ExtendedJioState::init(8, 4, 4, 0.998, 0.99);
    Rng rng(21);
    for (int i = 0; i < 30; ++i) st.step(oracle::random_cvec(8, rng), cplx{rng.normal(), 0.0});
    const RankDecision dec = select_rank_extended(st);
    CHECK(dec.rank == 4);
    CHECK(dec.costs.size() == 1);
}

TEST_CASE("select_rank_extended: reported rank is the literal argmin and stays in bounds") {
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    make_stream(10, 3, 200, 0.15, 31, inputs, desired);
    ExtendedJioState st = ExtendedJioState::init(10, 2, 7, 0.998, 0.99);
    for (std::size_t l = 0; l < inputs.size(); ++l) {
        st.step(inputs[l], desired[l]);
        const RankDecision dec = select_rank_extended(st);
        CHECK(dec.rank >= 2);
        CHECK(dec.rank <= 7);
        double best = dec.costs[0];
        for (double c : dec.costs) best = std::min(best, c);
        CHECK(dec.cost_at(dec.rank, 2) == doctest::Approx(best));
        for (int d = 2; d < dec.rank; ++d) CHECK(dec.cost_at(d, 2) > best);
    }
}

TEST_CASE("select_rank_extended: rank-3 data, the chosen rank is at least as good as rank 3") {
    // The jointly adapted filter does not spread the signal evenly over its
    // columns, so prefix costs keep improving with d and the selection
    // saturates high; the guarantee that holds is that the chosen rank's
    // cost never exceeds the signal-rank cost, and the choice stabilizes.
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    make_stream(10, 3, 600, 0.05, 37, inputs, desired);
    ExtendedJioState st = ExtendedJioState::init(10, 1, 6, 0.998, 0.99);
    int last_switch = 0;
    for (std::size_t l = 0; l < inputs.size(); ++l) {
        const int before = st.selected_rank;
        st.step(inputs[l], desired[l]);
        if (st.selected_rank != before) last_switch = int(l) + 1;
    }
    const RankDecision dec = select_rank_extended(st);
    CHECK(dec.cost_at(dec.rank, 1) <= 1.01 * dec.cost_at(3, 1));
    CHECK(last_switch <= 500);  // settled well before the end of the window
}

TEST_CASE("extended prefix property: prefix outputs equal a standalone rank-d filter") {
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    make_stream(9, 3, 50, 0.2, 41, inputs, desired);
    ExtendedJioState st = ExtendedJioState::init(9, 2, 6, 0.998, 0.99);
    for (std::size_t l = 0; l < inputs.size(); ++l) st.step(inputs[l], desired[l]);

    Rng rng(43);
    const CVec probe = oracle::random_cvec(9, rng);
    for (int d = 2; d <= 6; ++d) {
        JioRlsState standalone = JioRlsState::init(9, d, 0.998);
        for (std::size_t r = 0; r < 9; ++r)
            for (int c = 0; c < d; ++c) standalone.T(r, std::size_t(c)) = st.filter.T(r, std::size_t(c));
        for (int c = 0; c < d; ++c) standalone.w_bar[std::size_t(c)] = st.filter.w_bar[std::size_t(c)];
        st.selected_rank = d;
        CHECK(std::abs(st.output(probe) - standalone.output(probe)) < 1e-12);
    }
}

TEST_CASE("rank selection trends smaller early, larger at steady state") {
    const int runs = 20;
    double early = 0.0, late = 0.0;
    for (int run = 0; run < runs; ++run) {
        std::vector<CVec> inputs;
        std::vector<cplx> desired;
        make_stream(10, 4, 400, 0.2, 100 + std::uint64_t(run), inputs, desired);
        ExtendedJioState st = ExtendedJioState::init(10, 1, 8, 0.998, 0.99);
        for (std::size_t l = 0; l < inputs.size(); ++l) {
            st.step(inputs[l], desired[l]);
            if (l + 1 == 25) early += st.selected_rank;
        }
        late += st.selected_rank;
    }
    early /= runs;
    late /= runs;
    CHECK(early <= late + 0.25);
}

TEST_CASE("select_rank_multiple: degenerate range and agreement with the extended method") {
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    make_stream(10, 3, 300, 0.15, 53, inputs, desired);

    MultiFilterBank single = MultiFilterBank::init(10, 4, 4, 0.998, 0.99);
    for (std::size_t l = 0; l < 50; ++l) single.step(inputs[l], desired[l]);
    CHECK(select_rank_multiple(single).rank == 4);

    // Both methods minimize the same weighted criterion over different
    // filter trajectories. The bank's per-rank costs all sit at the
    // rank-independent fixed point, so its argmin wanders among near-ties
    // while the extended method rides its own prefix costs; what the two
    // share is the achieved minimum cost itself.
    MultiFilterBank bank = MultiFilterBank::init(10, 2, 6, 0.998, 0.99);
    ExtendedJioState ext = ExtendedJioState::init(10, 2, 6, 0.998, 0.99);
    int agree = 0, total = 0;
    for (std::size_t l = 0; l < inputs.size(); ++l) {
        bank.step(inputs[l], desired[l]);
        ext.step(inputs[l], desired[l]);
        if (l >= 50) {
            const RankDecision db = select_rank_multiple(bank);
            const RankDecision de = select_rank_extended(ext);
            const double cb = db.cost_at(db.rank, 2);
            const double ce = de.cost_at(de.rank, 2);
            agree += std::abs(cb - ce) <= 0.05 * std::max(cb, ce) ? 1 : 0;
            total += 1;
        }
        CHECK(bank.selected_rank >= 2);
        CHECK(bank.selected_rank <= 6);
    }
    CHECK(double(agree) / total >= 0.70);
}

TEST_CASE("select_rank_stopping: orthogonal, duplicated, and random columns") {
    CMat ortho = CMat::eye_top(8, 5);
    RankDecision dec = select_rank_stopping(ortho, 0.01, 2, 5);
    CHECK(dec.rank == 2);
    for (double c : dec.costs) CHECK(c == doctest::Approx(0.0));

    CMat dup = CMat::eye_top(8, 4);
    for (std::size_t r = 0; r < 8; ++r) dup(r, 3) = dup(r, 0);
    dec = select_rank_stopping(dup, 0.5, 2, 4);
    CHECK(dec.rank == 4);
    CHECK(dec.cost_at(4, 2) == doctest::Approx(1.0));

    Rng rng(59);
    CMat t(12, 6);
    for (std::size_t r = 0; r < 12; ++r)
        for (std::size_t c = 0; c < 6; ++c) t(r, c) = cplx{rng.normal(), rng.normal()};
    dec = select_rank_stopping(t, 0.01, 1, 6);
    const std::vector<double> want = oracle::gs_projection_ratios(t);
    for (int d = 1; d <= 6; ++d)
        CHECK(dec.cost_at(d, 1) == doctest::Approx(want[std::size_t(d - 1)]).epsilon(1e-10));

    CMat withzero = t;
    for (std::size_t r = 0; r < 12; ++r) withzero(r, 3) = 0.0;
    dec = select_rank_stopping(withzero, 0.01, 1, 6);
    CHECK(dec.cost_at(4, 1) == doctest::Approx(0.0));
}

TEST_CASE("select_rank_cv: single candidate rank") {
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    make_stream(6, 2, 20, 0.2, 61, inputs, desired);
    CvHistory hist{inputs, desired, 1.0};
    CHECK(select_rank_cv(hist, 3, 3, 0.99).rank == 3);
}

TEST_CASE("select_rank_cv: noiseless rank-2 data fits exactly at d = 2") {
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    make_stream(6, 2, 25, 0.0, 67, inputs, desired);
    CvHistory hist{inputs, desired, 1.0};
    const RankDecision dec = select_rank_cv(hist, 2, 5, 0.99);
    CHECK(dec.rank == 2);
    CHECK(dec.cost_at(2, 2) < 1e-6);
}

TEST_CASE("select_rank_cv: deflation equals literal leave-one-out refits") {
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    make_stream(6, 3, 18, 0.2, 71, inputs, desired);
    const double lambda = 0.998, alpha = 0.95;
    CvHistory hist{inputs, desired, lambda};
    const RankDecision dec = select_rank_cv(hist, 2, 4, alpha);

    const std::size_t n = inputs.size();
    for (int d = 2; d <= 4; ++d) {
        double literal = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            // literal refit: rebuild moments from scratch without sample l,
            // keeping each remaining sample's original weight
            Moments mom;
            mom.R = CMat(6, 6);
            mom.p = CVec(6);
            for (std::size_t m = 0; m < n; ++m) {
                if (m == l) continue;
                const double w = std::pow(lambda, double(n - 1 - m));
                for (std::size_t a = 0; a < 6; ++a) {
                    mom.p[a] += w * std::conj(desired[m]) * inputs[m][a];
                    for (std::size_t b = 0; b < 6; ++b)
                        mom.R(a, b) += w * inputs[m][a] * std::conj(inputs[m][b]);
                }
                mom.sigma_d2 += w * std::norm(desired[m]);
            }
            mom.R = hermitianize(mom.R);
            const LsSolution fit = jio_batch_ls(mom, d, 100, 1e-10, 0.01, lambda);
            const cplx pred = dot(fit.w_bar, adjoint(fit.T) * inputs[l]);
            literal += std::pow(alpha, double(n - 1 - l)) * std::norm(desired[l] - pred);
        }
        CHECK(dec.cost_at(d, 2) == doctest::Approx(literal).epsilon(1e-8));
    }
}

TEST_CASE("select_rank_cv: leave-one-out cost dominates the in-sample cost") {
    int wins = 0, trials = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::vector<CVec> inputs;
        std::vector<cplx> desired;
        make_stream(5, 2, 14, 0.4, 200 + seed, inputs, desired);
        CvHistory hist{inputs, desired, 1.0};
        const double alpha = 0.97;
        const RankDecision cv = select_rank_cv(hist, 2, 3, alpha);

        bool all_ge = true;
        BatchDataset data{inputs, desired, 1.0};
        const Moments full = accumulate_moments(data);
        for (int d = 2; d <= 3; ++d) {
            const LsSolution fit = jio_batch_ls(full, d, 100, 1e-10, 0.01, 1.0);
            double in_sample = 0.0;
            const std::size_t n = inputs.size();
            for (std::size_t l = 0; l < n; ++l) {
                const cplx pred = dot(fit.w_bar, adjoint(fit.T) * inputs[l]);
                in_sample += std::pow(alpha, double(n - 1 - l)) * std::norm(desired[l] - pred);
            }
            if (cv.cost_at(d, 2) < in_sample - 1e-12) all_ge = false;
        }
        wins += all_ge ? 1 : 0;
        trials += 1;
    }
    CHECK(trials == 100);
    CHECK(wins >= 95);
}

TEST_CASE("selector window guard: tiny histories skip infeasible ranks") {
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    make_stream(6, 2, 4, 0.2, 81, inputs, desired);
    CvHistory hist{inputs, desired, 1.0};
    // rank 4 needs at least 5 samples; rank 3 exactly fits
    const RankDecision dec = select_rank_cv(hist, 3, 4, 0.99);
    CHECK(dec.rank == 3);
    CHECK(std::isinf(dec.cost_at(4, 3)));
}
