#include "mimo/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "mimo/errors.hpp"

namespace mimo {

HermitianMatrix::HermitianMatrix(const CMat& a) {
    if (a.rows() != a.cols() || a.rows() == 0)
        throw std::invalid_argument("HermitianMatrix: input must be square and non-empty");
    if (!a.allFinite()) throw std::invalid_argument("HermitianMatrix: non-finite entry");
    a_ = (a + a.adjoint()) * 0.5;
    for (Eigen::Index i = 0; i < a_.rows(); ++i) a_(i, i) = cplx(a_(i, i).real(), 0.0);
    diagonal_ = true;
    for (Eigen::Index c = 0; c < a_.cols() && diagonal_; ++c)
        for (Eigen::Index r = 0; r < a_.rows(); ++r)
            if (r != c && a_(r, c) != cplx(0.0, 0.0)) {
                diagonal_ = false;
                break;
            }
}

HermitianMatrix HermitianMatrix::diagonal(const RVec& d) {
    CMat a = CMat::Zero(d.size(), d.size());
    a.diagonal() = d.cast<cplx>();
    return HermitianMatrix(a);
}

HermitianMatrix HermitianMatrix::identity(int m, double scale) {
    return diagonal(RVec::Constant(m, scale));
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_id(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

double RngStream::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

cplx RngStream::cnormal() {
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return cplx(re, im) * M_SQRT1_2;
}

CVec RngStream::cnormal_vec(int n) {
    CVec g(n);
    for (int i = 0; i < n; ++i) g(i) = cnormal();
    return g;
}

SpectralFactor psd_factor(const HermitianMatrix& a, double tol) {
    const int m = a.dim();
    SpectralFactor f;
    if (a.is_diagonal()) {
        RVec d = a.diag();
        const double scale = d.cwiseAbs().maxCoeff();
        const double t = tol >= 0.0 ? tol : 1e-10 * scale;
        std::vector<int> order(m);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return d(x) > d(y); });
        f.eigenvalues.resize(m);
        f.eigenvectors = CMat::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            double v = d(order[i]);
            if (v < -t) throw NotPSD("eigenvalue " + std::to_string(v) + " below -" + std::to_string(t));
            f.eigenvalues(i) = std::max(v, 0.0);
            f.eigenvectors(order[i], i) = 1.0;
        }
        f.diagonal = true;
        f.diag_root = d.cwiseMax(0.0).cwiseSqrt();
    } else {
        Eigen::SelfAdjointEigenSolver<CMat> es(a.mat());
        if (es.info() != Eigen::Success) throw NotPSD("eigendecomposition failed");
        RVec ev = es.eigenvalues().reverse();
        f.eigenvectors = es.eigenvectors().rowwise().reverse();
        const double scale = ev.cwiseAbs().maxCoeff();
        const double t = tol >= 0.0 ? tol : 1e-10 * scale;
        if (ev(m - 1) < -t)
            throw NotPSD("eigenvalue " + std::to_string(ev(m - 1)) + " below -" + std::to_string(t));
        f.eigenvalues = ev.cwiseMax(0.0);
    }
    f.rank = 0;
    while (f.rank < m && f.eigenvalues(f.rank) > 0.0) ++f.rank;
    if (!f.diagonal) {
        f.root = f.eigenvectors.leftCols(f.rank) *
                 f.eigenvalues.head(f.rank).cwiseSqrt().cast<cplx>().asDiagonal();
    }
    return f;
}

CVec sample_cn(const SpectralFactor& f, RngStream& rng) {
    const int m = f.dim();
    CVec g = rng.cnormal_vec(m);
    if (f.diagonal) return f.diag_root.cast<cplx>().cwiseProduct(g);
    if (f.rank == 0) return CVec::Zero(m);
    return f.root * g.head(f.rank);
}

HermitianSolver::HermitianSolver(const CMat& a) : llt_(a), n_(static_cast<int>(a.rows())) {
    if (llt_.info() != Eigen::Success) throw Singular("Cholesky factorization failed");
}

CMat HermitianSolver::solve(const CMat& b) const { return llt_.solve(b); }
CVec HermitianSolver::solve(const CVec& b) const { return llt_.solve(b); }

CMat hermitian_solve(const HermitianMatrix& a, const CMat& b) {
    if (b.rows() != a.dim()) throw std::invalid_argument("hermitian_solve: dimension mismatch");
    HermitianSolver s(a.mat());
    CMat x = s.solve(b);
    const double bn = b.norm();
    if (bn > 0.0) {
        const double res = (a.mat() * x - b).norm() / bn;
        if (!(res <= 1e-8)) throw Singular("residual " + std::to_string(res) + " exceeds 1e-8");
    }
    return x;
}

void CompensatedSum::add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
        c_ += (sum_ - t) + x;
    else
        c_ += (x - t) + sum_;
    sum_ = t;
}

}  // namespace mimo
