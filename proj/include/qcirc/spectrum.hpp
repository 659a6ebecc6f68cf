#pragma once

// Finite-dimensional Hermitian matrices for a HamiltonianSpec in mixed
// charge/Fock bases, diagonalization, parameter sweeps, and the independent
// phase-grid oracle for Cooper-pair-box spectra.

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "qcirc/builder.hpp"
#include "qcirc/constants.hpp"
#include "qcirc/errors.hpp"
#include "qcirc/operators.hpp"

namespace qcirc {

struct VariableBasis {
    enum class Kind { charge, fock } kind = Kind::fock;
    int dim = 40;          // Fock dimension, or 2*n_max+1 charge states
    int n_max = 15;        // charge truncation
    double offset_ng = 0.0;  // charge offset (2e), compact variables
    double frame_freq_ghz = 0.0; // harmonic frame, extended variables
    double frame_z_ohm = 0.0;    // frame impedance

    static VariableBasis charge(int n_max, double ng = 0.0) {
        VariableBasis b;
        b.kind = Kind::charge;
        b.n_max = n_max;
        b.dim = 2 * n_max + 1;
        b.offset_ng = ng;
        return b;
    }
    static VariableBasis fock(int dim, double freq_ghz, double z_ohm) {
        VariableBasis b;
        b.kind = Kind::fock;
        b.dim = dim;
        b.frame_freq_ghz = freq_ghz;
        b.frame_z_ohm = z_ohm;
        return b;
    }
};

struct BasisSpec {
    std::vector<VariableBasis> variables;

    int total_dim() const {
        int d = 1;
        for (const auto& v : variables) d *= v.dim;
        return d;
    }
};

/// Default truncations: charge n_max = 15 for compact variables, Fock dim 40
/// for extended ones, with the harmonic frame taken from the variable's own
/// E_C and E_L scales.
inline BasisSpec default_basis(const HamiltonianSpec& spec, int charge_n_max = 15,
                               int fock_dim = 40) {
    BasisSpec basis;
    for (int i = 0; i < spec.size(); ++i) {
        const auto& v = spec.variables[i];
        if (v.kind == VariableKind::compact) {
            basis.variables.push_back(VariableBasis::charge(charge_n_max, spec.charge_offset(i)));
        } else {
            if (!(v.el_ghz > 0.0))
                throw Error(ErrorCode::SingularCapacitance,
                            "extended variable '" + v.name + "' has no quadratic confinement");
            const double freq = std::sqrt(8.0 * v.el_ghz * v.ec_ghz);
            const double z = v.phi_zpf * v.phi_zpf * constants::r_quantum / M_PI;
            basis.variables.push_back(VariableBasis::fock(fock_dim, freq, z));
        }
    }
    return basis;
}

enum class CosineExpansion { spectral, taylor4, taylor6 };

namespace detail {

struct SiteOps {
    MatrixXcd q;        // charge operator (2e)
    MatrixXcd x;        // flux operator (Phi0); empty for charge sites
    MatrixXcd shift;    // e^{i phi}; empty for Fock sites
    double phi_zpf = 0.0;
    bool compact = false;
    int dim = 0;
};

inline SiteOps make_site(const VariableBasis& b) {
    SiteOps s;
    s.dim = b.dim;
    if (b.kind == VariableBasis::Kind::charge) {
        s.compact = true;
        const int center = static_cast<int>(-std::round(b.offset_ng));
        auto ops = charge_ops(b.n_max, center);
        s.q = ops.q;
        s.shift = ops.shift;
    } else {
        if (b.dim < 2) throw Error(ErrorCode::DimensionMismatch, "Fock dim must be >= 2");
        if (!(b.frame_z_ohm > 0.0))
            throw Error(ErrorCode::InvalidArgument, "Fock basis needs a positive frame impedance");
        auto ops = oscillator_ops(b.dim);
        s.phi_zpf = std::sqrt(M_PI * b.frame_z_ohm / constants::r_quantum);
        const double q_zpf = 1.0 / (2.0 * s.phi_zpf);
        s.q = q_zpf * ops.p;                      // i q_zpf (a^dag - a)
        s.x = (s.phi_zpf / (2.0 * M_PI)) * ops.x; // flux in Phi0
    }
    return s;
}

// exp(i m phi) on a single Fock site, by spectral calculus on m*phi.
inline MatrixXcd site_exp_iphi(const SiteOps& s, double m) {
    const MatrixXcd arg = (2.0 * M_PI * m) * s.x; // m * phi operator
    return hermitian_function(arg, [](double lam) { return std::exp(Complex(0, 1) * lam); });
}

// (e^{i phi})^m on a charge site.
inline MatrixXcd site_shift_power(const SiteOps& s, int m) {
    MatrixXcd out = MatrixXcd::Identity(s.dim, s.dim);
    const MatrixXcd b = (m >= 0) ? s.shift : MatrixXcd(s.shift.adjoint());
    for (int k = 0; k < std::abs(m); ++k) out = b * out;
    return out;
}

} // namespace detail

/// Assemble the Hamiltonian matrix (E/h in GHz) of a spec over the given
/// basis, tensor factors in declared variable order. Cosines of compact
/// variables become charge-shift products; cosines touching extended
/// variables use spectral calculus (or an explicit Taylor truncation).
inline HermitianOperator assemble(const HamiltonianSpec& spec, const BasisSpec& basis,
                                  CosineExpansion expansion = CosineExpansion::spectral) {
    const int n = spec.size();
    if (static_cast<int>(basis.variables.size()) != n)
        throw Error(ErrorCode::DimensionMismatch, "basis does not match spec variable count");

    std::vector<detail::SiteOps> site(n);
    std::vector<int> dims(n);
    for (int i = 0; i < n; ++i) {
        if (spec.variables[i].kind == VariableKind::compact &&
            basis.variables[i].kind != VariableBasis::Kind::charge)
            throw Error(ErrorCode::DimensionMismatch,
                        "compact variable '" + spec.variables[i].name + "' needs a charge basis");
        if (spec.variables[i].kind == VariableKind::extended &&
            basis.variables[i].kind != VariableBasis::Kind::fock)
            throw Error(ErrorCode::DimensionMismatch,
                        "extended variable '" + spec.variables[i].name + "' needs a Fock basis");
        site[i] = detail::make_site(basis.variables[i]);
        dims[i] = site[i].dim;
    }
    const int total = basis.total_dim();
    MatrixXcd h = MatrixXcd::Zero(total, total);

    // ---- kinetic: 4 sum_ij EC_ij P_i P_j with P_i = q_i + ng_i - A_i ----
    const Eigen::MatrixXd ec = charging_energy_ghz(1.0) * spec.inv_cap;
    auto momentum_terms = [&](int i) {
        std::vector<OpChain> terms;
        OpChain q;
        q.factors[i] = site[i].q;
        terms.push_back(q);
        const double ng = spec.variables[i].kind == VariableKind::compact
                              ? basis.variables[i].offset_ng
                              : spec.charge_offset(i);
        if (ng != 0.0) {
            OpChain c;
            c.weight = ng;
            terms.push_back(c);
        }
        for (int m = 0; m < n; ++m) {
            const double w = spec.vec_potential(i, m);
            if (w == 0.0) continue;
            OpChain a;
            a.weight = -w;
            a.factors[m] = site[m].x;
            terms.push_back(a);
        }
        return terms;
    };
    std::vector<std::vector<OpChain>> p_ops(n);
    for (int i = 0; i < n; ++i) p_ops[i] = momentum_terms(i);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (ec(i, j) == 0.0) continue;
            for (const auto& a : p_ops[i])
                for (const auto& b : p_ops[j]) {
                    OpChain prod = a * b;
                    prod.weight *= 4.0 * ec(i, j);
                    accumulate_chain(h, prod, dims);
                }
        }

    // ---- quadratic + linear potential over flux variables ----
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double kij = spec.potential.quadratic(i, j);
            if (kij == 0.0) continue;
            OpChain xi, xj;
            xi.factors[i] = site[i].x;
            xj.factors[j] = site[j].x;
            OpChain prod = xi * xj;
            prod.weight = 0.5 * kij;
            accumulate_chain(h, prod, dims);
        }
    for (int i = 0; i < n; ++i) {
        const double ci = spec.potential.linears(i);
        if (ci == 0.0) continue;
        OpChain c;
        c.weight = ci;
        c.factors[i] = site[i].x;
        accumulate_chain(h, c, dims);
    }
    if (spec.potential.constant != 0.0)
        h += spec.potential.constant * MatrixXcd::Identity(total, total);

    // ---- cosines ----
    for (const auto& ct : spec.potential.cosines) {
        bool touches_extended = false;
        for (int i = 0; i < n; ++i)
            if (std::abs(ct.coefficients(i)) > 1e-12 && !site[i].compact) touches_extended = true;

        if (expansion == CosineExpansion::spectral || !touches_extended) {
            // -E_J/2 (e^{i theta} U + h.c.) with U a product of per-site
            // shift/exp factors (factors on different sites commute).
            OpChain fwd;
            for (int i = 0; i < n; ++i) {
                const double m = ct.coefficients(i);
                if (std::abs(m) < 1e-12) continue;
                if (site[i].compact)
                    fwd.factors[i] = detail::site_shift_power(site[i], static_cast<int>(std::round(m)));
                else
                    fwd.factors[i] = detail::site_exp_iphi(site[i], m);
            }
            OpChain bwd = fwd;
            for (auto& [k, f] : bwd.factors) f = f.adjoint().eval();
            fwd.weight = -0.5 * ct.ej_ghz * std::exp(Complex(0, 1) * ct.phase);
            bwd.weight = -0.5 * ct.ej_ghz * std::exp(Complex(0, -1) * ct.phase);
            accumulate_chain(h, fwd, dims);
            accumulate_chain(h, bwd, dims);
        } else {
            // Taylor truncation of -E_J cos(X + theta) around X = 0.
            MatrixXcd x = MatrixXcd::Zero(total, total);
            for (int i = 0; i < n; ++i) {
                const double m = ct.coefficients(i);
                if (std::abs(m) < 1e-12) continue;
                if (site[i].compact)
                    throw Error(ErrorCode::InvalidArgument,
                                "Taylor expansion is only defined over extended variables");
                OpChain c;
                c.weight = 2.0 * M_PI * m; // phi = 2 pi x
                c.factors[i] = site[i].x;
                accumulate_chain(x, c, dims);
            }
            const MatrixXcd x2 = x * x;
            const MatrixXcd x3 = x2 * x;
            const MatrixXcd x4 = x2 * x2;
            MatrixXcd cosx = MatrixXcd::Identity(total, total) - 0.5 * x2 + x4 / 24.0;
            MatrixXcd sinx = x - x3 / 6.0;
            if (expansion == CosineExpansion::taylor6) {
                cosx -= x4 * x2 / 720.0;
                sinx += x4 * x / 120.0;
            }
            h += -ct.ej_ghz * (std::cos(ct.phase) * cosx - std::sin(ct.phase) * sinx);
        }
    }

    HermitianOperator op;
    op.mat = std::move(h);
    for (int i = 0; i < n; ++i)
        op.basis_labels.push_back(spec.variables[i].name +
                                  (site[i].compact ? ":charge" : ":fock"));
    op.assert_hermitian(1e-12);
    return op;
}

struct SpectrumResult {
    VectorXd eigenvalues; // ascending, GHz
    std::optional<MatrixXcd> eigenvectors;
    int truncation_used = 0;
    double truncation_error = 0.0; // estimated, GHz
};

namespace detail {

// Lanczos with full reorthogonalization for the lowest part of the spectrum
// of large Hermitian matrices.
inline VectorXd lanczos_lowest(const MatrixXcd& h, int k, int max_iter = 400) {
    const Eigen::Index dim = h.rows();
    VectorXcd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        v(i) = Complex(std::sin(0.7 * (i + 1)), std::cos(1.3 * (i + 1)));
    v.normalize();
    std::vector<VectorXcd> basis{v};
    std::vector<double> alpha, beta;
    VectorXcd w;
    for (int it = 0; it < max_iter; ++it) {
        w = h * basis.back();
        const double a = std::real(basis.back().dot(w));
        alpha.push_back(a);
        w -= a * basis.back();
        if (basis.size() > 1) w -= beta.back() * basis[basis.size() - 2];
        for (const auto& u : basis) w -= u.dot(w) * u; // reorthogonalize
        const double b = w.norm();
        if (b < 1e-13) break;
        beta.push_back(b);
        basis.push_back(w / b);
    }
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        tri(i, i) = alpha[i];
        if (i + 1 < m && i < static_cast<int>(beta.size())) {
            tri(i, i + 1) = beta[i];
            tri(i + 1, i) = beta[i];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    return es.eigenvalues().head(std::min(k, m));
}

} // namespace detail

/// Lowest k eigenvalues (dense below 4096, Lanczos above). Residuals of the
/// dense path are checked against the solver tolerance.
inline SpectrumResult diagonalize(const HermitianOperator& h, int k, bool want_vectors = false) {
    const Eigen::Index dim = h.dim();
    if (k > dim) throw Error(ErrorCode::DimensionMismatch, "requested more eigenvalues than dim");
    SpectrumResult out;
    out.truncation_used = static_cast<int>(dim);
    if (dim <= 4096) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es;
        es.compute(h.mat, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            throw Error(ErrorCode::NoConvergence, "dense eigensolver failed");
        out.eigenvalues = es.eigenvalues().head(k);
        if (want_vectors) {
            out.eigenvectors = es.eigenvectors().leftCols(k);
            // residual check ||H v - lambda v|| < 1e-9 ||H||
            const double scale = h.mat.cwiseAbs().maxCoeff();
            for (int i = 0; i < k; ++i) {
                const double resid =
                    (h.mat * out.eigenvectors->col(i) - out.eigenvalues(i) * out.eigenvectors->col(i))
                        .norm();
                if (resid > 1e-9 * std::max(1.0, scale) * std::sqrt(static_cast<double>(dim)))
                    throw Error(ErrorCode::NoConvergence, "eigenpair residual too large");
            }
        }
    } else {
        if (want_vectors)
            throw Error(ErrorCode::InvalidArgument, "eigenvectors unavailable for iterative path");
        out.eigenvalues = detail::lanczos_lowest(h.mat, k);
    }
    return out;
}

/// Tridiagonal charge-basis CPB Hamiltonian: diagonal 4 E_C (n + n_g)^2,
/// off-diagonal -E_J/2, window centered on the minimizing charge state.
inline HermitianOperator cpb_matrix(double ec_ghz, double ej_ghz, double ng, int n_max) {
    if (n_max < 10)
        throw Error(ErrorCode::TruncationTooSmall, "include at least 21 charge states (n_max >= 10)");
    const int center = static_cast<int>(-std::round(ng));
    const int dim = 2 * n_max + 1;
    HermitianOperator h;
    h.mat = MatrixXcd::Zero(dim, dim);
    for (int idx = 0; idx < dim; ++idx) {
        const double q = center - n_max + idx;
        h.mat(idx, idx) = 4.0 * ec_ghz * (q + ng) * (q + ng);
        if (idx + 1 < dim) {
            h.mat(idx, idx + 1) = -0.5 * ej_ghz;
            h.mat(idx + 1, idx) = -0.5 * ej_ghz;
        }
    }
    h.basis_labels = {"charge"};
    return h;
}

/// Independent finite-difference oracle for the CPB eigenvalue problem:
/// 4 E_C (-i d/dphi + n_g)^2 - E_J cos(phi) on [0, 2pi) with periodic
/// boundary (the rotor sector n_alpha = 0), fourth-order stencils.
inline double phi_grid_oracle(double ec_ghz, double ej_ghz, double ng, int level, int grid) {
    if (grid < 256) throw Error(ErrorCode::InvalidArgument, "grid must be >= 256");
    const double hstep = 2.0 * M_PI / grid;
    MatrixXcd h = MatrixXcd::Zero(grid, grid);
    // five-point stencils: f'' ~ (-f[i-2] + 16 f[i-1] - 30 f[i] + 16 f[i+1] - f[i+2]) / 12h^2
    //                      f'  ~ ( f[i-2] - 8 f[i-1] + 8 f[i+1] - f[i+2]) / 12h
    const double c2[5] = {-1.0, 16.0, -30.0, 16.0, -1.0};
    const double c1[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
    for (int i = 0; i < grid; ++i) {
        const double phi = hstep * i;
        for (int off = -2; off <= 2; ++off) {
            const int j = ((i + off) % grid + grid) % grid;
            const double d2 = c2[off + 2] / (12.0 * hstep * hstep);
            const double d1 = c1[off + 2] / (12.0 * hstep);
            // 4 E_C (-d^2/dphi^2 - 2 i ng d/dphi + ng^2)
            h(i, j) += 4.0 * ec_ghz * (-d2 - 2.0 * ng * Complex(0, 1) * d1);
        }
        h(i, i) += 4.0 * ec_ghz * ng * ng - ej_ghz * std::cos(phi);
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::NoConvergence, "oracle eigensolver failed");
    return es.eigenvalues()(level);
}

struct DuffingParams {
    double omega_ghz = 0.0; // sqrt(8 E_J E_C) - E_C
    double delta_ghz = 0.0; // -E_C
    bool transmon_regime = true; // advisory: E_J/E_C >= 10
};

inline DuffingParams duffing_params(double ec_ghz, double ej_ghz) {
    DuffingParams p;
    p.omega_ghz = std::sqrt(8.0 * ej_ghz * ec_ghz) - ec_ghz;
    p.delta_ghz = -ec_ghz;
    p.transmon_regime = ej_ghz / ec_ghz >= 10.0;
    return p;
}

/// Duffing oscillator coupled to a harmonic mode: an extended
/// Jaynes-Cummings model with g (a^dag b + a b^dag).
inline HermitianOperator jc_model(double omega_t_ghz, double delta_t_ghz, double omega_r_ghz,
                                  double g_ghz, int dim_t, int dim_r) {
    if (dim_t < 2 || dim_r < 2)
        throw Error(ErrorCode::DimensionMismatch, "jc_model needs dims >= 2");
    auto bt = oscillator_ops(dim_t);
    auto ar = oscillator_ops(dim_r);
    const MatrixXcd it = MatrixXcd::Identity(dim_t, dim_t);
    const MatrixXcd ir = MatrixXcd::Identity(dim_r, dim_r);
    MatrixXcd h = omega_t_ghz * kron(bt.n, ir) +
                  0.5 * delta_t_ghz * kron(bt.adag * bt.adag * bt.a * bt.a, ir) +
                  omega_r_ghz * kron(it, ar.n) +
                  g_ghz * (kron(bt.adag, ar.a) + kron(bt.a, ar.adag));
    HermitianOperator op;
    op.mat = std::move(h);
    op.basis_labels = {"transmon:fock", "resonator:fock"};
    return op;
}

/// Evaluate a parameterized spectrum over a grid; points are independent and
/// may be computed concurrently, results are ordered by grid index.
inline std::vector<SpectrumResult> sweep(const std::function<HermitianOperator(double)>& build,
                                         const std::vector<double>& grid, int k,
                                         int max_threads = 1) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "sweep grid is empty");
    std::vector<SpectrumResult> out(grid.size());
    const int n_threads = std::max(1, std::min<int>(max_threads, static_cast<int>(grid.size())));
    if (n_threads == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) out[i] = diagonalize(build(grid[i]), k);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::string> errors(grid.size());
    for (int tid = 0; tid < n_threads; ++tid) {
        pool.emplace_back([&, tid] {
            for (std::size_t i = tid; i < grid.size(); i += n_threads) {
                try {
                    out[i] = diagonalize(build(grid[i]), k);
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (!errors[i].empty())
            throw Error(ErrorCode::NoConvergence,
                        "sweep point " + std::to_string(i) + " failed: " + errors[i]);
    return out;
}

/// Diagonalize with a truncation self-check: re-run with every Fock dim
/// increased by 4 and compare the lowest k levels. On failure the dims are
/// doubled, at most three times.
inline SpectrumResult converged_spectrum(const HamiltonianSpec& spec, BasisSpec basis, int k,
                                         double tol_ghz = 1e-6,
                                         CosineExpansion expansion = CosineExpansion::spectral) {
    for (int attempt = 0;; ++attempt) {
        SpectrumResult a = diagonalize(assemble(spec, basis, expansion), k);
        BasisSpec bumped = basis;
        for (auto& v : bumped.variables)
            if (v.kind == VariableBasis::Kind::fock) v.dim += 4;
        SpectrumResult b = diagonalize(assemble(spec, bumped, expansion), k);
        const double drift = (a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff();
        a.truncation_error = drift;
        a.truncation_used = basis.total_dim();
        if (drift < tol_ghz || attempt >= 3) {
            if (drift >= tol_ghz)
                throw Error(ErrorCode::NoConvergence, "spectrum not converged after escalation");
            return a;
        }
        for (auto& v : basis.variables)
            if (v.kind == VariableBasis::Kind::fock) v.dim *= 2;
    }
}

} // namespace qcirc
