#pragma once

// Dense Hermitian operators over tensor-product bases, ladder/charge operator
// factories and Kronecker-product assembly helpers.

#include <complex>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcirc/errors.hpp"

namespace qcirc {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using MatrixXd = Eigen::MatrixXd;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;

enum class StorageKind { dense, sparse };

struct HermitianOperator {
    MatrixXcd mat;
    std::vector<std::string> basis_labels; // one per tensor factor, optional
    StorageKind storage = StorageKind::dense;

    Eigen::Index dim() const { return mat.rows(); }

    /// Max-entry deviation from Hermiticity, relative to the matrix scale.
    double hermiticity_defect() const {
        const double scale = mat.cwiseAbs().maxCoeff();
        if (scale == 0.0) return 0.0;
        return (mat - mat.adjoint()).cwiseAbs().maxCoeff() / scale;
    }

    void assert_hermitian(double tol = 1e-13) const {
        if (hermiticity_defect() > tol)
            throw Error(ErrorCode::DimensionMismatch,
                        "operator is not Hermitian within tolerance");
    }
};

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Kronecker product over a full chain of factors, first factor slowest.
inline MatrixXcd kron_chain(const std::vector<MatrixXcd>& factors) {
    if (factors.empty()) return MatrixXcd::Identity(1, 1);
    MatrixXcd out = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
    return out;
}

/// A sparse description of a tensor-product operator: identity on every
/// factor except those listed. Multiplying chains merges factor maps, with
/// same-site factors composed in multiplication order.
struct OpChain {
    std::map<int, MatrixXcd> factors; // site -> small matrix
    Complex weight{1.0, 0.0};

    OpChain operator*(const OpChain& rhs) const {
        OpChain out;
        out.weight = weight * rhs.weight;
        out.factors = factors;
        for (const auto& [site, m] : rhs.factors) {
            auto it = out.factors.find(site);
            if (it == out.factors.end())
                out.factors.emplace(site, m);
            else
                it->second = it->second * m;
        }
        return out;
    }
};

/// Materialize a chain on the full space defined by per-site dimensions.
inline void accumulate_chain(MatrixXcd& target, const OpChain& chain,
                             const std::vector<int>& dims) {
    std::vector<MatrixXcd> factors;
    factors.reserve(dims.size());
    for (int site = 0; site < static_cast<int>(dims.size()); ++site) {
        auto it = chain.factors.find(site);
        if (it == chain.factors.end())
            factors.push_back(MatrixXcd::Identity(dims[site], dims[site]));
        else {
            if (it->second.rows() != dims[site])
                throw Error(ErrorCode::DimensionMismatch, "chain factor dimension mismatch");
            factors.push_back(it->second);
        }
    }
    target += chain.weight * kron_chain(factors);
}

struct LadderOps {
    MatrixXcd a;        // annihilation
    MatrixXcd adag;     // creation
    MatrixXcd n;        // number
    MatrixXcd x;        // a + a^dag
    MatrixXcd p;        // i (a^dag - a)
};

/// Standard truncated harmonic-oscillator ladder operators.
inline LadderOps oscillator_ops(int dim) {
    if (dim < 2) throw Error(ErrorCode::DimensionMismatch, "oscillator dim must be >= 2");
    LadderOps ops;
    ops.a = MatrixXcd::Zero(dim, dim);
    for (int k = 1; k < dim; ++k) ops.a(k - 1, k) = std::sqrt(static_cast<double>(k));
    ops.adag = ops.a.adjoint();
    ops.n = ops.adag * ops.a;
    ops.x = ops.a + ops.adag;
    ops.p = Complex(0, 1) * (ops.adag - ops.a);
    return ops;
}

/// Charge-basis operators on the window n in [center-n_max, center+n_max].
struct ChargeOps {
    MatrixXcd q;      // diagonal of charge values n
    MatrixXcd shift;  // e^{i phi}: |n> -> |n+1>
    int center = 0;
    int n_max = 0;
};

inline ChargeOps charge_ops(int n_max, int center = 0) {
    if (n_max < 1) throw Error(ErrorCode::TruncationTooSmall, "charge n_max must be >= 1");
    const int dim = 2 * n_max + 1;
    ChargeOps ops;
    ops.center = center;
    ops.n_max = n_max;
    ops.q = MatrixXcd::Zero(dim, dim);
    ops.shift = MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) ops.q(k, k) = static_cast<double>(center - n_max + k);
    for (int k = 0; k + 1 < dim; ++k) ops.shift(k + 1, k) = 1.0; // raises n by one
    return ops;
}

/// Parity (-1)^{a^dag a} in the Fock basis.
inline MatrixXcd fock_parity(int dim) {
    MatrixXcd p = MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    return p;
}

/// Parity in the charge basis: |n> -> |-n> (window must be centered on 0).
inline MatrixXcd charge_parity(int n_max) {
    const int dim = 2 * n_max + 1;
    MatrixXcd p = MatrixXcd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) p(dim - 1 - k, k) = 1.0;
    return p;
}

/// Hermitian function calculus: f applied to the eigenvalues of a Hermitian
/// matrix, rotated back. Used for cos/exp of flux operator combinations.
template <typename F>
MatrixXcd hermitian_function(const MatrixXcd& h, F&& f) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::NoConvergence, "eigendecomposition failed in function calculus");
    VectorXcd fd(h.rows());
    for (Eigen::Index i = 0; i < h.rows(); ++i) fd(i) = f(es.eigenvalues()(i));
    return es.eigenvectors() * fd.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace qcirc
