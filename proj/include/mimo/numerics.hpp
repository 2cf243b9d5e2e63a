#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mimo {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Hermitian by construction: the input is replaced by (A + A^H)/2 with a real diagonal.
class HermitianMatrix {
public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(const CMat& a);

    static HermitianMatrix diagonal(const RVec& d);
    static HermitianMatrix identity(int m, double scale = 1.0);

    int dim() const { return static_cast<int>(a_.rows()); }
    const CMat& mat() const { return a_; }
    bool is_diagonal() const { return diagonal_; }
    RVec diag() const { return a_.diagonal().real(); }
    double trace() const { return a_.diagonal().real().sum(); }

private:
    CMat a_;
    bool diagonal_ = false;
};

struct SpectralFactor {
    RVec eigenvalues;   // descending, clipped to >= 0
    CMat eigenvectors;  // columns match eigenvalues
    CMat root;          // eigenvectors * sqrt(eigenvalues), first `rank` columns
    int rank = 0;
    bool diagonal = false;
    RVec diag_root;     // sqrt of the diagonal in original order, set when `diagonal`

    int dim() const { return static_cast<int>(eigenvectors.rows()); }
};

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    double normal() { return normal_(engine_); }
    double uniform(double lo, double hi);
    // CN(0, 1)
    cplx cnormal();
    CVec cnormal_vec(int n);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);
// Stable stream id from a list of coordinates (purpose tag, trial, indices...).
std::uint64_t stream_id(std::initializer_list<std::uint64_t> parts);

SpectralFactor psd_factor(const HermitianMatrix& a, double tol = -1.0);

CVec sample_cn(const SpectralFactor& f, RngStream& rng);

CMat hermitian_solve(const HermitianMatrix& a, const CMat& b);

// Cached Cholesky factor of a Hermitian positive-definite matrix.
class HermitianSolver {
public:
    HermitianSolver() = default;
    explicit HermitianSolver(const CMat& a);

    CMat solve(const CMat& b) const;
    CVec solve(const CVec& b) const;
    int dim() const { return n_; }

private:
    Eigen::LLT<CMat> llt_;
    int n_ = 0;
};

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

}  // namespace mimo
