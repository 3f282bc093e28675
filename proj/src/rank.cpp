#include "rrstap/rank.hpp"

#include <cmath>
#include <limits>

namespace rrstap {

namespace {

void check_bounds(int d_min, int d_max) {
    if (d_min < 1) throw ContractViolation("rank selection: d_min must be >= 1");
    if (d_max < d_min) throw ContractViolation("rank selection: d_max must be >= d_min");
}

void fold_sample(CMat& r_alpha, CVec& p_alpha, double& sigma_alpha, double alpha, const CVec& r,
                 cplx d) {
    const std::size_t n = r.size();
    const cplx dconj = std::conj(d);
    for (std::size_t a = 0; a < n; ++a) {
        p_alpha[a] = alpha * p_alpha[a] + dconj * r[a];
        for (std::size_t b = 0; b < n; ++b)
            r_alpha(a, b) = alpha * r_alpha(a, b) + r[a] * std::conj(r[b]);
    }
    sigma_alpha = alpha * sigma_alpha + std::norm(d);
}

/// Costs of every rank prefix of (T, w) under the quadratic expansion
/// sigma - 2 Re(w_d^H c_d) + w_d^H B_d w_d, grown one index at a time.
std::vector<double> prefix_costs(const CMat& T, const CVec& w, const CMat& r_alpha,
                                 const CVec& p_alpha, double sigma_alpha, int d_min, int d_max) {
    const std::size_t jm = T.rows();
    const std::size_t width = std::size_t(d_max);
    // B = T^H R T and c = T^H p restricted to the first d_max columns
    CMat rt(jm, width);
    for (std::size_t a = 0; a < jm; ++a)
        for (std::size_t c = 0; c < width; ++c) {
            cplx acc = 0.0;
            for (std::size_t b = 0; b < jm; ++b) acc += r_alpha(a, b) * T(b, c);
            rt(a, c) = acc;
        }
    CMat bmat(width, width);
    CVec cvec(width);
    for (std::size_t a = 0; a < width; ++a) {
        for (std::size_t c = 0; c < width; ++c) {
            cplx acc = 0.0;
            for (std::size_t b = 0; b < jm; ++b) acc += std::conj(T(b, a)) * rt(b, c);
            bmat(a, c) = acc;
        }
        cplx acc = 0.0;
        for (std::size_t b = 0; b < jm; ++b) acc += std::conj(T(b, a)) * p_alpha[b];
        cvec[a] = acc;
    }

    std::vector<double> costs;
    costs.reserve(std::size_t(d_max - d_min + 1));
    double lin = 0.0;   // Re(w_d^H c_d)
    double quad = 0.0;  // w_d^H B_d w_d
    for (int d = 1; d <= d_max; ++d) {
        const std::size_t j = std::size_t(d - 1);
        lin += std::real(std::conj(w[j]) * cvec[j]);
        cplx cross = 0.0;
        for (std::size_t a = 0; a < j; ++a) cross += std::conj(w[a]) * bmat(a, j);
        quad += 2.0 * std::real(cross * w[j]) +
                std::real(std::conj(w[j]) * bmat(j, j) * w[j]);
        if (d >= d_min) costs.push_back(sigma_alpha - 2.0 * lin + quad);
    }
    return costs;
}

int argmin_rank(const std::vector<double>& costs, int d_min) {
    int best = d_min;
    double best_cost = costs[0];
    for (std::size_t i = 1; i < costs.size(); ++i)
        if (costs[i] < best_cost) {
            best_cost = costs[i];
            best = d_min + int(i);
        }
    return best;
}

}  // namespace

ExtendedJioState ExtendedJioState::init(int dim, int d_min, int d_max, double lambda, double alpha,
                                        double delta) {
    check_bounds(d_min, d_max);
    if (d_max > dim) throw ContractViolation("ExtendedJioState: d_max exceeds input dimension");
    ExtendedJioState s;
    s.filter = JioRlsState::init(dim, d_max, lambda, delta);
    s.d_min = d_min;
    s.d_max = d_max;
    s.alpha = alpha;
    s.r_alpha = CMat(dim, dim);
    s.p_alpha = CVec(dim);
    s.selected_rank = d_min;
    return s;
}

cplx ExtendedJioState::output(const CVec& r) const {
    const int d = selected_rank;
    cplx acc = 0.0;
    for (int c = 0; c < d; ++c) {
        cplx rd = 0.0;
        for (std::size_t row = 0; row < filter.T.rows(); ++row)
            rd += std::conj(filter.T(row, std::size_t(c))) * r[row];
        acc += std::conj(filter.w_bar[std::size_t(c)]) * rd;
    }
    return acc;
}

cplx ExtendedJioState::step(const CVec& r, cplx d) {
    const cplx x = jio_rls_step(filter, r, d);
    fold_sample(r_alpha, p_alpha, sigma_alpha, alpha, r, d);
    samples += 1;
    selected_rank = select_rank_extended(*this).rank;
    return x;
}

double aposteriori_cost(const ExtendedJioState& state, int rank) {
    if (rank < 1 || rank > state.d_max) throw ContractViolation("aposteriori_cost: rank out of range");
    if (state.samples == 0) return 0.0;  // empty history
    return prefix_costs(state.filter.T, state.filter.w_bar, state.r_alpha, state.p_alpha,
                        state.sigma_alpha, rank, rank)[0];
}

RankDecision select_rank_extended(const ExtendedJioState& state) {
    RankDecision dec;
    if (state.samples == 0) {
        dec.rank = state.d_min;
        dec.costs.assign(std::size_t(state.d_max - state.d_min + 1), 0.0);
        return dec;
    }
    dec.costs = prefix_costs(state.filter.T, state.filter.w_bar, state.r_alpha, state.p_alpha,
                             state.sigma_alpha, state.d_min, state.d_max);
    dec.rank = argmin_rank(dec.costs, state.d_min);
    return dec;
}

MultiFilterBank MultiFilterBank::init(int dim, int d_min, int d_max, double lambda, double alpha,
                                      double delta) {
    check_bounds(d_min, d_max);
    if (d_max > dim) throw ContractViolation("MultiFilterBank: d_max exceeds input dimension");
    MultiFilterBank bank;
    for (int d = d_min; d <= d_max; ++d)
        bank.filters.push_back(JioRlsState::init(dim, d, lambda, delta));
    bank.d_min = d_min;
    bank.d_max = d_max;
    bank.alpha = alpha;
    bank.r_alpha = CMat(dim, dim);
    bank.p_alpha = CVec(dim);
    bank.selected_rank = d_min;
    return bank;
}

cplx MultiFilterBank::output(const CVec& r) const {
    return filters[std::size_t(selected_rank - d_min)].output(r);
}

cplx MultiFilterBank::step(const CVec& r, cplx d) {
    const cplx x = filters[std::size_t(selected_rank - d_min)].output(r);
    for (auto& f : filters) jio_rls_step(f, r, d);
    fold_sample(r_alpha, p_alpha, sigma_alpha, alpha, r, d);
    samples += 1;
    selected_rank = select_rank_multiple(*this).rank;
    return x;
}

RankDecision select_rank_multiple(const MultiFilterBank& bank) {
    RankDecision dec;
    dec.costs.reserve(bank.filters.size());
    for (const auto& f : bank.filters) {
        const int d = f.rank();
        if (bank.samples == 0) {
            dec.costs.push_back(0.0);
            continue;
        }
        dec.costs.push_back(prefix_costs(f.T, f.w_bar, bank.r_alpha, bank.p_alpha, bank.sigma_alpha,
                                         d, d)[0]);
    }
    dec.rank = argmin_rank(dec.costs, bank.d_min);
    return dec;
}

RankDecision select_rank_stopping(const CMat& T, double threshold, int d_min, int d_max) {
    check_bounds(d_min, d_max);
    if (std::size_t(d_max) > T.cols())
        throw ContractViolation("select_rank_stopping: d_max exceeds projection width");
    const std::size_t jm = T.rows();

    RankDecision dec;
    dec.costs.reserve(std::size_t(d_max - d_min + 1));
    int best = d_min;
    for (int d = d_min; d <= d_max; ++d) {
        // ratio of column d's energy inside span(columns 1..d-1)
        CVec col(jm);
        for (std::size_t r = 0; r < jm; ++r) col[r] = T(r, std::size_t(d - 1));
        const double total = norm(col);
        double ratio = 0.0;
        if (total == 0.0) {
            dec.costs.push_back(0.0);  // skipped
            continue;
        }
        const int lead = d - 1;
        if (lead > 0) {
            CMat lead_T(jm, std::size_t(lead));
            for (std::size_t r = 0; r < jm; ++r)
                for (int c = 0; c < lead; ++c) lead_T(r, std::size_t(c)) = T(r, std::size_t(c));
            const CMat gram = hermitianize(adjoint(lead_T) * lead_T);
            const CVec rhs = adjoint(lead_T) * col;
            const CVec coeffs = pinv_hermitian_solve(gram, rhs, 1e-12);
            ratio = norm(lead_T * coeffs) / total;
        }
        dec.costs.push_back(ratio);
        if (ratio > threshold) best = d;
    }
    dec.rank = best;
    return dec;
}

RankDecision select_rank_cv(const CvHistory& history, int d_min, int d_max, double alpha) {
    check_bounds(d_min, d_max);
    const std::size_t n = history.inputs.size();
    if (n == 0) throw ContractViolation("select_rank_cv: empty history");

    BatchDataset data{history.inputs, history.desired, history.lambda};
    const Moments full = accumulate_moments(data);

    RankDecision dec;
    dec.costs.assign(std::size_t(d_max - d_min + 1), std::numeric_limits<double>::infinity());
    for (int d = d_min; d <= d_max; ++d) {
        if (n < std::size_t(d) + 1) continue;  // window too small for this rank
        double cost = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double train_w = std::pow(history.lambda, double(n - 1 - l));
            Moments deflated;
            deflated.R = full.R;
            deflated.p = full.p;
            deflated.sigma_d2 = full.sigma_d2 - train_w * std::norm(history.desired[l]);
            const CVec& rl = history.inputs[l];
            const cplx dl = history.desired[l];
            for (std::size_t a = 0; a < rl.size(); ++a) {
                deflated.p[a] -= train_w * std::conj(dl) * rl[a];
                for (std::size_t b = 0; b < rl.size(); ++b)
                    deflated.R(a, b) -= train_w * rl[a] * std::conj(rl[b]);
            }
            const LsSolution fit = jio_batch_ls(deflated, d, 100, 1e-10, 0.01, history.lambda);
            const cplx pred = dot(fit.w_bar, adjoint(fit.T) * rl);
            cost += std::pow(alpha, double(n - 1 - l)) * std::norm(dl - pred);
        }
        dec.costs[std::size_t(d - d_min)] = cost;
    }
    bool any = false;
    for (double c : dec.costs)
        if (std::isfinite(c)) any = true;
    if (!any) throw ContractViolation("select_rank_cv: window too small for every candidate rank");
    dec.rank = argmin_rank(dec.costs, d_min);
    return dec;
}

}  // namespace rrstap
