#include "rrstap/estimators.hpp"

#include <cmath>
#include <ostream>

namespace rrstap {

namespace {

void dump_matrix(std::ostream& os, const char* name, const CMat& m) {
    os << name << " " << m.rows() << " " << m.cols() << "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c)
            os << m(r, c).real() << " " << m(r, c).imag() << (c + 1 < m.cols() ? " " : "");
        os << "\n";
    }
}

void dump_vector(std::ostream& os, const char* name, const CVec& v) {
    os << name << " " << v.size() << "\n";
    for (std::size_t i = 0; i < v.size(); ++i)
        os << v[i].real() << " " << v[i].imag() << (i + 1 < v.size() ? " " : "\n");
}

}  // namespace

FullRankRlsState FullRankRlsState::init(int dim, double lambda, double delta) {
    FullRankRlsState s;
    s.w = CVec(dim);
    s.P = (cplx{1.0 / delta}) * CMat::identity(dim);
    s.lambda = lambda;
    return s;
}

void FullRankRlsState::dump(std::ostream& os) const {
    os << "full_rank_rls lambda " << lambda << "\n";
    dump_vector(os, "w", w);
    dump_matrix(os, "P", P);
}

cplx full_rank_rls_step(FullRankRlsState& state, const CVec& r, cplx d) {
    if (r.size() != state.w.size()) throw ContractViolation("full_rank_rls_step: dimension mismatch");
    const cplx x = dot(state.w, r);
    Rank1Update upd = rank1_inverse_update(state.P, r, r, state.lambda);
    state.P = hermitianize(upd.next);
    const cplx err = d - x;
    state.w = state.w + std::conj(err) * upd.gain;
    return x;
}

JioRlsState JioRlsState::init(int dim, int rank, double lambda, double delta, WbarMoments mode) {
    if (rank < 1 || rank > dim) throw ContractViolation("JioRlsState: rank must be in [1, dim]");
    JioRlsState s;
    s.T = CMat::eye_top(dim, rank);
    s.w_bar = CVec::unit(rank, 0);
    s.P = (cplx{1.0 / delta}) * CMat::identity(dim);
    s.Q_w = (cplx{1.0 / delta}) * CMat::identity(rank);
    s.Phi_bar = (cplx{1.0 / delta}) * CMat::identity(rank);
    s.lambda = lambda;
    s.delta = delta;
    s.moments_mode = mode;
    return s;
}

cplx JioRlsState::output(const CVec& r) const {
    cplx acc = 0.0;
    for (std::size_t d = 0; d < T.cols(); ++d) {
        cplx rd = 0.0;
        for (std::size_t row = 0; row < T.rows(); ++row) rd += std::conj(T(row, d)) * r[row];
        acc += std::conj(w_bar[d]) * rd;
    }
    return acc;
}

void JioRlsState::dump(std::ostream& os) const {
    os << "jio_rls lambda " << lambda << " delta " << delta << " moments "
       << (moments_mode == WbarMoments::instantaneous ? "instantaneous" : "accumulated") << "\n";
    dump_matrix(os, "T", T);
    dump_vector(os, "w_bar", w_bar);
    dump_matrix(os, "P", P);
    dump_matrix(os, "Q_w", Q_w);
    dump_matrix(os, "Phi_bar", Phi_bar);
}

cplx jio_rls_step(JioRlsState& state, const CVec& r, cplx d) {
    const std::size_t jm = state.T.rows();
    const std::size_t rank = state.T.cols();
    if (r.size() != jm) throw ContractViolation("jio_rls_step: input dimension mismatch");

    // (1) input gain and inverse Gram
    Rank1Update pu;
    try {
        pu = rank1_inverse_update(state.P, r, r, state.lambda);
    } catch (const DegenerateUpdate& e) {
        throw DegenerateUpdate(std::string("jio_rls_step: input stage: ") + e.what());
    }
    state.P = hermitianize(pu.next);
    const CVec& k = pu.gain;

    // (2) reduced-filter direction t
    CVec t(rank);
    if (state.moments_mode == WbarMoments::accumulated) {
        Rank1Update qu;
        try {
            qu = rank1_inverse_update(state.Q_w, state.w_bar, state.w_bar, state.lambda);
        } catch (const DegenerateUpdate& e) {
            throw DegenerateUpdate(std::string("jio_rls_step: filter-moment stage: ") + e.what());
        }
        state.Q_w = hermitianize(qu.next);
        t = qu.gain;
    } else {
        // (w w^H + delta I)^-1 w = w / (delta + ||w||^2)
        const double n2 = norm(state.w_bar) * norm(state.w_bar);
        if (n2 + state.delta < 1e-300)
            throw DegenerateUpdate("jio_rls_step: reduced filter vanished; reinitialize");
        t = (cplx{1.0 / (state.delta + n2)}) * state.w_bar;
    }

    // (3) a priori reduced input with the old projection
    CVec rbar_prev(rank);
    for (std::size_t c = 0; c < rank; ++c) {
        cplx acc = 0.0;
        for (std::size_t row = 0; row < jm; ++row) acc += std::conj(state.T(row, c)) * r[row];
        rbar_prev[c] = acc;
    }

    // (4) projection update T += k (d* t^H - rbar_prev^H)
    const cplx dconj = std::conj(d);
    for (std::size_t row = 0; row < jm; ++row) {
        const cplx kr = k[row];
        if (kr == cplx{}) continue;
        for (std::size_t c = 0; c < rank; ++c)
            state.T(row, c) += kr * (dconj * std::conj(t[c]) - std::conj(rbar_prev[c]));
    }

    // (5) reduced input with the new projection
    CVec rbar(rank);
    for (std::size_t c = 0; c < rank; ++c) {
        cplx acc = 0.0;
        for (std::size_t row = 0; row < jm; ++row) acc += std::conj(state.T(row, c)) * r[row];
        rbar[c] = acc;
    }

    // (6) reduced gain and inverse reduced Gram
    Rank1Update fu;
    try {
        fu = rank1_inverse_update(state.Phi_bar, rbar, rbar, state.lambda);
    } catch (const DegenerateUpdate& e) {
        throw DegenerateUpdate(std::string("jio_rls_step: reduced stage: ") + e.what());
    }
    state.Phi_bar = hermitianize(fu.next);

    // (7) reduced filter update
    const cplx x = dot(state.w_bar, rbar);
    const cplx xi = d - x;
    state.w_bar = state.w_bar + std::conj(xi) * fu.gain;
    return x;
}

Moments accumulate_moments(const BatchDataset& data) {
    if (data.inputs.empty()) throw ContractViolation("accumulate_moments: empty dataset");
    if (data.inputs.size() != data.desired.size())
        throw ContractViolation("accumulate_moments: inputs/desired length mismatch");
    const std::size_t n = data.inputs.size();
    const std::size_t dim = data.inputs[0].size();
    Moments m;
    m.R = CMat(dim, dim);
    m.p = CVec(dim);
    for (std::size_t l = 0; l < n; ++l) {
        const double w = std::pow(data.lambda, double(n - 1 - l));
        const CVec& r = data.inputs[l];
        if (r.size() != dim) throw ContractViolation("accumulate_moments: ragged inputs");
        const cplx dw = w * std::conj(data.desired[l]);
        for (std::size_t a = 0; a < dim; ++a) {
            m.p[a] += dw * r[a];
            for (std::size_t b = 0; b < dim; ++b) m.R(a, b) += w * r[a] * std::conj(r[b]);
        }
        m.sigma_d2 += w * std::norm(data.desired[l]);
    }
    m.R = hermitianize(m.R);
    return m;
}

namespace {

/// R^-1 with the configured conditioning ridge when needed.
CMat regularized_inverse(const CMat& R, int dim) {
    EigResult eig = hermitian_eig(R);
    const double largest = eig.values.front();
    const double smallest = eig.values.back();
    double ridge = 0.0;
    if (!(smallest > 0.0) || largest / std::max(smallest, 1e-300) > 1e12) {
        double trace = 0.0;
        for (double v : eig.values) trace += v;
        ridge = 1e-6 * trace / double(dim);
        if (!(ridge > 0.0))
            throw SolveFailure("jio_batch_ls: input Gram singular even with ridge; condition estimate " +
                               std::to_string(largest / std::max(smallest, 1e-300)));
    }
    CMat inv(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            cplx acc = 0.0;
            for (int k = 0; k < dim; ++k)
                acc += eig.vectors(r, k) * std::conj(eig.vectors(c, k)) / (eig.values[k] + ridge);
            inv(r, c) = acc;
        }
    return inv;
}

}  // namespace

LsSolution jio_batch_ls(const Moments& m, int rank, int max_iters, double tol, double delta,
                        double lambda) {
    const int dim = int(m.R.rows());
    if (rank < 1 || rank > dim) throw ContractViolation("jio_batch_ls: rank must be in [1, dim]");

    const CMat r_inv = regularized_inverse(m.R, dim);
    const CVec wiener = r_inv * m.p;

    LsSolution sol;
    sol.T = CMat::eye_top(dim, rank);
    sol.w_bar = CVec::unit(rank, 0);
    CMat r_w = (cplx{delta}) * CMat::identity(rank);

    double prev_ses = 0.0;
    for (int it = 1; it <= max_iters; ++it) {
        if (norm(sol.w_bar) < 1e-300)
            throw SolveFailure("jio_batch_ls: reduced filter collapsed to zero; reinitialize");
        // projection half-step: T = R^-1 (p w^H) R_w^-1
        r_w = (cplx{lambda}) * r_w + outer(sol.w_bar, sol.w_bar);
        const CMat rw_inv = regularized_inverse(hermitianize(r_w), rank);
        // p w^H rw_inv  ==  p (rw_inv^H w)^H; rw_inv Hermitian
        const CVec col = rw_inv * sol.w_bar;
        sol.T = outer(wiener, col);

        // filter half-step: w = (T^H R T)^+ (T^H p)
        const CMat rbar = hermitianize(adjoint(sol.T) * (m.R * sol.T));
        const CVec pbar = adjoint(sol.T) * m.p;
        sol.w_bar = pinv_hermitian_solve(rbar, pbar, 1e-12);

        const double cur = m.sigma_d2 - std::real(dot(pbar, sol.w_bar));
        sol.ses_trace.push_back(cur);
        sol.iterations = it;
        if (it > 1 && std::abs(prev_ses - cur) < tol * std::max(1.0, std::abs(prev_ses))) {
            sol.ses = cur;
            break;
        }
        prev_ses = cur;
        sol.ses = cur;
    }
    return sol;
}

LsSolution jio_batch_ls(const BatchDataset& data, int rank, int max_iters, double tol) {
    return jio_batch_ls(accumulate_moments(data), rank, max_iters, tol, 0.01, data.lambda);
}

double ses(const CMat& R, const CVec& p, double sigma_d2, const CMat& T) {
    const CMat rbar = hermitianize(adjoint(T) * (R * T));
    const CVec pbar = adjoint(T) * p;
    CVec y;
    try {
        y = hermitian_solve(rbar, pbar);
    } catch (const SolveFailure&) {
        EigResult eig = hermitian_eig(rbar);
        throw SolveFailure("ses: reduced Gram singular; smallest eigenvalue " +
                           std::to_string(eig.values.back()));
    }
    return sigma_d2 - std::real(dot(pbar, y));
}

double pair_cost(const CMat& R, const CVec& p, double sigma_d2, const CMat& T, const CVec& w_bar) {
    const CVec composite = T * w_bar;
    return sigma_d2 - 2.0 * std::real(dot(p, composite)) + std::real(dot(composite, R * composite));
}

CVec optimal_reduced_rank(const CMat& R, const CVec& p, int rank) {
    const int dim = int(R.rows());
    if (rank < 1 || rank > dim) throw ContractViolation("optimal_reduced_rank: rank out of range");
    const CMat s = inv_sqrt(R);
    const EigResult eig = hermitian_eig(R);
    const CVec whitened = s * p;
    // coordinates of the whitened cross-correlation in R's eigenbasis
    CVec coords = adjoint(eig.vectors) * whitened;
    std::vector<std::size_t> order(dim);
    for (int i = 0; i < dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::norm(coords[a]) > std::norm(coords[b]); });
    CVec kept(dim);
    for (int j = 0; j < rank; ++j) kept[order[j]] = coords[order[j]];
    return s * (eig.vectors * kept);
}

Moments genie_moments(const GenieScenario& scenario) {
    const auto& sigs = *scenario.signatures;
    const auto& chan = *scenario.channels;
    const int jm = chan.antennas * sigs.at(0).chip_window;
    Moments m;
    m.R = CMat(jm, jm);
    m.p = CVec(jm);
    m.sigma_d2 = 1.0;
    const long i = scenario.symbol;
    for (std::size_t k = 0; k < sigs.size(); ++k) {
        const double a2 = scenario.amplitudes[k] * scenario.amplitudes[k];
        const CVec contrib[3] = {
            sigs[k].apply(SignatureSet::Role::prev, spacetime_channel_vector(chan, int(k), i - 1)),
            sigs[k].apply(SignatureSet::Role::cur, spacetime_channel_vector(chan, int(k), i)),
            sigs[k].apply(SignatureSet::Role::next, spacetime_channel_vector(chan, int(k), i + 1))};
        for (const CVec& v : contrib)
            for (int a = 0; a < jm; ++a)
                for (int b = 0; b < jm; ++b) m.R(a, b) += a2 * v[a] * std::conj(v[b]);
        if (k == 0)
            for (int a = 0; a < jm; ++a) m.p[a] = scenario.amplitudes[0] * contrib[1][a];
    }
    for (int a = 0; a < jm; ++a) m.R(a, a) += scenario.noise_variance;
    m.R = hermitianize(m.R);
    return m;
}

CVec mmse_genie(const GenieScenario& scenario) {
    Moments m = genie_moments(scenario);
    try {
        return hermitian_solve(m.R, m.p);
    } catch (const SolveFailure& e) {
        throw SolveFailure(std::string("mmse_genie: ensemble covariance solve failed: ") + e.what());
    }
}

}  // namespace rrstap
