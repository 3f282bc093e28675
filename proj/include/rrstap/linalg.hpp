#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrstap {

using cplx = std::complex<double>;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Caller handed in something that violates an interface precondition.
struct ContractViolation : Error {
    using Error::Error;
};
/// A factorization or linear solve could not be completed.
struct SolveFailure : Error {
    using Error::Error;
};
/// Rank-1 inverse update hit a vanishing denominator.
struct DegenerateUpdate : Error {
    using Error::Error;
};
/// Eigensolver failed to converge within its sweep budget.
struct EigFailure : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct ExperimentError : Error {
    using Error::Error;
};

/// Dense complex vector, double precision throughout.
class CVec {
  public:
    CVec() = default;
    explicit CVec(std::size_t n) : v_(n) {}
    CVec(std::initializer_list<cplx> init) : v_(init) {}

    std::size_t size() const { return v_.size(); }
    cplx& operator[](std::size_t i) { return v_[i]; }
    const cplx& operator[](std::size_t i) const { return v_[i]; }
    cplx* data() { return v_.data(); }
    const cplx* data() const { return v_.data(); }

    static CVec unit(std::size_t n, std::size_t k);

  private:
    std::vector<cplx> v_;
};

/// Dense complex matrix, row-major.
class CMat {
  public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    cplx& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
    cplx* row(std::size_t r) { return a_.data() + r * cols_; }
    const cplx* row(std::size_t r) const { return a_.data() + r * cols_; }

    static CMat identity(std::size_t n);
    /// n x k matrix whose top k x k block is the identity ([I_k; 0]).
    static CMat eye_top(std::size_t n, std::size_t k);

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

CVec operator+(const CVec& a, const CVec& b);
CVec operator-(const CVec& a, const CVec& b);
CVec operator*(cplx s, const CVec& a);
CMat operator+(const CMat& a, const CMat& b);
CMat operator-(const CMat& a, const CMat& b);
CMat operator*(cplx s, const CMat& a);
CVec operator*(const CMat& a, const CVec& x);
CMat operator*(const CMat& a, const CMat& b);

CMat adjoint(const CMat& a);
/// u v^H
CMat outer(const CVec& u, const CVec& v);
/// a^H b
cplx dot(const CVec& a, const CVec& b);
double norm(const CVec& a);
double fro_norm(const CMat& a);
/// (A + A^H) / 2
CMat hermitianize(const CMat& a);
bool all_finite(const CVec& a);
bool all_finite(const CMat& a);

/// Hermiticity check against tol * max|entry|.
bool is_hermitian(const CMat& a, double tol = 1e-10);

/// Solve A x = b for Hermitian positive definite A (Cholesky with one
/// refinement pass). Throws ContractViolation for non-Hermitian input and
/// SolveFailure naming the offending pivot when A is singular/indefinite.
CVec hermitian_solve(const CMat& a, const CVec& b);

struct Rank1Update {
    CVec gain;
    CMat next;
};

/// Matrix-inversion-lemma step shared by all the exponentially weighted
/// recursions: given P tracking M^-1, returns the gain vector and the
/// inverse of (lambda * M + u v^H).
///   gain = lambda^-1 P u / (1 + lambda^-1 v^H P u)
///   next = lambda^-1 P - lambda^-1 gain v^H P
Rank1Update rank1_inverse_update(const CMat& p_prev, const CVec& u, const CVec& v, double lambda);

struct EigResult {
    std::vector<double> values;  // descending
    CMat vectors;                // columns, orthonormal
};

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix. The input is
/// symmetrized as (A + A^H)/2 first to absorb accumulation drift.
EigResult hermitian_eig(const CMat& a);

/// Inverse matrix square root S of Hermitian PD A, with S A S = I.
CMat inv_sqrt(const CMat& a);

/// Minimum-norm least-squares solve of A x = b for Hermitian PSD A via
/// eigendecomposition; eigenvalues below rtol * max_eig are treated as zero.
CVec pinv_hermitian_solve(const CMat& a, const CVec& b, double rtol = 1e-12);

}  // namespace rrstap
