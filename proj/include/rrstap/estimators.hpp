#pragma once

#include <iosfwd>
#include <vector>

#include "rrstap/linalg.hpp"
#include "rrstap/signal.hpp"

namespace rrstap {

/// Conventional exponentially weighted RLS over the full JM-dimensional
/// observation. P tracks the inverse of the lambda-weighted input Gram.
struct FullRankRlsState {
    CVec w;
    CMat P;
    double lambda = 0.998;

    static FullRankRlsState init(int dim, double lambda, double delta = 0.01);

    cplx output(const CVec& r) const { return dot(w, r); }

    /// Plain-text state dump: one labelled "re im" pair per entry.
    void dump(std::ostream& os) const;
};

/// One RLS step; returns the a priori output w^H r.
cplx full_rank_rls_step(FullRankRlsState& state, const CVec& r, cplx d);

/// How the inverse of the reduced-filter Gram R_w = E[w w^H] entering the
/// projection update is formed.
///   instantaneous: R_w = w w^H + delta I rebuilt each step, applied in
///                  closed form as t = w / (delta + ||w||^2). Scale-stable;
///                  the default.
///   accumulated:   R_w^-1 tracked by the matrix inversion lemma over the
///                  lambda-weighted history of w. Kept selectable for
///                  fidelity checks of the inverse recursions; its filter
///                  scales drift in steady state.
enum class WbarMoments { instantaneous, accumulated };

/// Joint projection + reduced filter RLS state. P tracks the inverse input
/// Gram (JM x JM), Phi_bar the inverse reduced-input Gram (D x D), and Q_w
/// the inverse reduced-filter Gram when running in accumulated mode.
struct JioRlsState {
    CMat T;       // JM x D projection
    CVec w_bar;   // D
    CMat P;       // JM x JM
    CMat Q_w;     // D x D
    CMat Phi_bar; // D x D
    double lambda = 0.998;
    double delta = 0.01;
    WbarMoments moments_mode = WbarMoments::instantaneous;

    static JioRlsState init(int dim, int rank, double lambda, double delta = 0.01,
                            WbarMoments mode = WbarMoments::instantaneous);

    int rank() const { return int(T.cols()); }

    /// A priori output with the current filters: w^H (T^H r).
    cplx output(const CVec& r) const;

    void dump(std::ostream& os) const;
};

/// One joint recursion step. Update order: input gain/P; reduced-filter
/// direction t (per moments_mode); projection T; reduced input; reduced
/// gain/Phi_bar; reduced filter w. Returns x = w^H[i-1] (T^H[i] r).
cplx jio_rls_step(JioRlsState& state, const CVec& r, cplx d);

struct BatchDataset {
    std::vector<CVec> inputs;
    std::vector<cplx> desired;
    double lambda = 1.0;
};

/// lambda-weighted second-order statistics of a dataset: R = sum w_l r r^H,
/// p = sum w_l d* r, sigma_d2 = sum w_l |d|^2 with w_l = lambda^(n-1-l).
struct Moments {
    CMat R;
    CVec p;
    double sigma_d2 = 0.0;
};

Moments accumulate_moments(const BatchDataset& data);

struct LsSolution {
    CMat T;
    CVec w_bar;
    double ses = 0.0;
    int iterations = 0;
    std::vector<double> ses_trace;  // SES after each full alternation
};

/// Alternating exact LS solver for the joint projection/filter problem:
/// repeats T = R^-1 (p w^H) R_w^-1 and w = (T^H R T)^+ T^H p from
/// T = [I_D; 0], w = e1 until the SES change falls below tol. R_w follows
/// the lambda-weighted accumulation over iterations seeded with delta I.
LsSolution jio_batch_ls(const Moments& m, int rank, int max_iters = 100, double tol = 1e-8,
                        double delta = 0.01, double lambda = 1.0);
LsSolution jio_batch_ls(const BatchDataset& data, int rank, int max_iters = 100, double tol = 1e-8);

/// Projection-only SES: sigma_d2 - p^H T (T^H R T)^-1 T^H p. Invariant under
/// T -> T G for invertible G. Throws SolveFailure naming the smallest
/// eigenvalue when the reduced Gram is singular.
double ses(const CMat& R, const CVec& p, double sigma_d2, const CMat& T);

/// Achieved weighted cost of a concrete (T, w) pair:
/// sigma_d2 - 2 Re(p^H T w) + w^H T^H R T w.
double pair_cost(const CMat& R, const CVec& p, double sigma_d2, const CMat& T, const CVec& w_bar);

/// Eigendecomposition-based rank-D Wiener filter: whiten p by R^-1/2, keep
/// the D dominant coordinates in R's eigenbasis, map back through R^-1/2.
CVec optimal_reduced_rank(const CMat& R, const CVec& p, int rank);

/// Exact ensemble knowledge for one symbol instant: everything the optimal
/// linear estimator is allowed to see.
struct GenieScenario {
    const std::vector<SignatureSet>* signatures = nullptr;
    const ChannelState* channels = nullptr;
    std::vector<double> amplitudes;
    double noise_variance = 0.0;
    long symbol = 1;
};

/// Exact R and p for user 0 built from the known signatures, channel
/// realization, powers, and noise floor.
Moments genie_moments(const GenieScenario& scenario);

/// Full-rank MMSE filter R^-1 p from exact ensemble statistics.
CVec mmse_genie(const GenieScenario& scenario);

}  // namespace rrstap
