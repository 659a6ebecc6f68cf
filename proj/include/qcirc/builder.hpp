#pragma once

// From a decomposed circuit graph to a quantized Hamiltonian specification:
// capacitance matrix and charge offsets, structured potential terms, gyrator
// vector potential, per-variable compact/extended classification.
//
// Canonical units: capacitance fF, inductance nH, energies E/h in GHz,
// node flux x in Phi0 (so phi = 2 pi x), charge q in 2e.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcirc/constants.hpp"
#include "qcirc/errors.hpp"
#include "qcirc/netlist.hpp"
#include "qcirc/tree.hpp"

namespace qcirc {

struct CosineTerm {
    double ej_ghz = 0.0;           // U -= ej * cos(sum_i m_i phi_i + phase)
    Eigen::VectorXd coefficients;  // per-variable, integer for junction terms
    double phase = 0.0;            // radians, carries the external flux
};

struct KineticForm {
    std::vector<std::string> variables; // live, non-driven node names
    Eigen::MatrixXd cap_matrix;         // fF, symmetric
    Eigen::VectorXd source_offset;      // 2e, from voltage sources
    Eigen::MatrixXd vec_potential;      // 2e per Phi0, antisymmetric (gyrators)
};

struct PotentialForm {
    Eigen::MatrixXd quadratic; // h GHz per Phi0^2; U_quad = 1/2 x^T K x
    Eigen::VectorXd linears;   // h GHz per Phi0; U_lin = c^T x
    std::vector<CosineTerm> cosines;
    double constant = 0.0;     // h GHz
};

enum class VariableKind { compact, extended };

struct VariableInfo {
    std::string name;
    VariableKind kind = VariableKind::extended;
    double ec_ghz = 0.0;  // e^2/(2 C_eff h) from the inverse capacitance diagonal
    double el_ghz = 0.0;  // quadratic confinement, zero for compact variables
    double phi_zpf = 0.0; // (2 E_C/E_L)^{1/4}, extended only
    double q_zpf = 0.0;   // (E_L/2E_C)^{1/4}/2, extended only
};

struct HamiltonianSpec {
    std::vector<VariableInfo> variables;
    Eigen::MatrixXd cap_matrix;    // fF (after eliminating zero-kinetic rows)
    Eigen::MatrixXd inv_cap;       // 1/fF
    Eigen::VectorXd charge_offset; // 2e (n_g per variable)
    Eigen::MatrixXd vec_potential; // 2e per Phi0
    PotentialForm potential;

    int size() const { return static_cast<int>(variables.size()); }
};

namespace detail {

// Nodes pinned by a grounded voltage source, with dPhi/dt = value (V).
inline std::map<std::string, double> driven_nodes(const CircuitGraph& g) {
    std::map<std::string, double> driven;
    for (const auto& b : g.branches) {
        if (b.kind != BranchKind::voltage_source) continue;
        if (g.is_ground(b.start))
            driven[b.finish] = b.value;
        else if (g.is_ground(b.finish))
            driven[b.start] = -b.value;
        else
            throw Error(ErrorCode::InvalidArgument,
                        "voltage source '" + b.id + "' must have one terminal at ground");
    }
    return driven;
}

inline std::vector<std::string> dynamic_variables(const CircuitGraph& g) {
    const auto driven = driven_nodes(g);
    std::vector<std::string> vars;
    for (const auto& n : g.nodes)
        if (!driven.count(n)) vars.push_back(n);
    return vars;
}

inline int var_index(const std::vector<std::string>& vars, const std::string& name) {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return static_cast<int>(i);
    return -1;
}

// Branch flux as an affine expression over variables: flux = r.x + e (Phi0),
// using the effective (tree-standardized) orientation.
struct FluxExpr {
    Eigen::VectorXd row;
    double offset = 0.0; // Phi0
    int sign = +1;       // effective vs declared orientation
};

inline FluxExpr branch_flux_expr(const CircuitGraph& g, const TreeDecomposition& t,
                                 const std::vector<std::string>& vars, const Branch& b) {
    FluxExpr fe;
    fe.row = Eigen::VectorXd::Zero(static_cast<int>(vars.size()));
    fe.sign = t.orientation_sign.at(b.id);
    std::string tail = b.start, head = b.finish;
    if (fe.sign < 0) std::swap(tail, head);
    const int ih = var_index(vars, head);
    const int it_ = var_index(vars, tail);
    if (ih >= 0) fe.row(ih) += 1.0;
    if (it_ >= 0) fe.row(it_) -= 1.0;
    auto fx = t.chord_flux.find(b.id);
    if (fx != t.chord_flux.end()) fe.offset = fx->second;
    return fe;
}

} // namespace detail

/// Capacitance matrix, voltage-source charge offsets and gyrator vector
/// potential. Diagonal entries are sums of incident capacitances,
/// off-diagonals minus the branch capacitance.
inline KineticForm kinetic_form(const CircuitGraph& g, const TreeDecomposition& t) {
    (void)t;
    KineticForm k;
    k.variables = detail::dynamic_variables(g);
    const auto driven = detail::driven_nodes(g);
    const int n = static_cast<int>(k.variables.size());
    k.cap_matrix = Eigen::MatrixXd::Zero(n, n);
    k.source_offset = Eigen::VectorXd::Zero(n);
    k.vec_potential = Eigen::MatrixXd::Zero(n, n);

    const double charge_2e = 2.0 * constants::e_charge;

    for (const auto& b : g.branches) {
        if (b.kind != BranchKind::capacitor) continue;
        const int iu = detail::var_index(k.variables, b.start);
        const int iv = detail::var_index(k.variables, b.finish);
        if (iu >= 0) k.cap_matrix(iu, iu) += b.value;
        if (iv >= 0) k.cap_matrix(iv, iv) += b.value;
        if (iu >= 0 && iv >= 0) {
            k.cap_matrix(iu, iv) -= b.value;
            k.cap_matrix(iv, iu) -= b.value;
        }
        // Capacitor to a voltage-driven node: C/2 (dphi - v_s)^2 leaves a
        // charge offset C v_s on the live side.
        auto push_offset = [&](int live, const std::string& other) {
            auto it = driven.find(other);
            if (it == driven.end() || live < 0) return;
            k.source_offset(live) += b.value * it->second * 1e-15 / charge_2e;
        };
        push_offset(iu, b.finish);
        push_offset(iv, b.start);
    }

    for (const auto& c : g.couplings) {
        if (c.kind != CouplingKind::gyrator) continue;
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n), v = Eigen::VectorXd::Zero(n);
        auto set = [&](Eigen::VectorXd& vec, const std::string& node, double val) {
            const int i = detail::var_index(k.variables, node);
            if (i >= 0) vec(i) += val;
        };
        set(u, c.p1_plus, 1.0);
        set(u, c.p1_minus, -1.0);
        set(v, c.p2_plus, 1.0);
        set(v, c.p2_minus, -1.0);
        // L_gyr = (G/2)[(u.x)(v.xdot) - (v.x)(u.xdot)]; in 2e/Phi0 units the
        // prefactor is G R_Q / 2.
        const double w = c.conductance_s * constants::r_quantum / 2.0;
        k.vec_potential += w * (v * u.transpose() - u * v.transpose());
    }
    return k;
}

/// Inductors, mutual blocks, junction cosines and current-source linears.
inline PotentialForm potential_form(const CircuitGraph& g, const TreeDecomposition& t) {
    PotentialForm u;
    const auto vars = detail::dynamic_variables(g);
    const int n = static_cast<int>(vars.size());
    u.quadratic = Eigen::MatrixXd::Zero(n, n);
    u.linears = Eigen::VectorXd::Zero(n);

    const auto driven = detail::driven_nodes(g);
    auto forbid_driven = [&](const Branch& b) {
        if (driven.count(b.start) || driven.count(b.finish))
            throw Error(ErrorCode::InvalidArgument,
                        "branch '" + b.id + "' attaches an inductive element to a driven node");
    };

    // Inductors participating in a mutual coupling are handled as 2x2 blocks.
    std::map<std::string, const Coupling*> in_mutual;
    for (const auto& c : g.couplings) {
        if (c.kind != CouplingKind::mutual_inductance) continue;
        for (const auto& id : {c.branch_a, c.branch_b}) {
            if (in_mutual.count(id))
                throw Error(ErrorCode::InvalidArgument,
                            "branch '" + id + "' participates in more than one mutual coupling");
            in_mutual[id] = &c;
        }
    }

    // 1/2 x^T K x bookkeeping for an affine pair with inverse-inductance
    // gamma (1/nH): U += gamma_fac/2 (ra.x+ea)(rb.x+eb) in h GHz.
    const double ghz_per_inv_nh = 4.0 * M_PI * M_PI * inductive_energy_ghz(1.0);
    auto add_bilinear = [&](double gamma_inv_nh, const detail::FluxExpr& a,
                            const detail::FluxExpr& b) {
        const double w = gamma_inv_nh * ghz_per_inv_nh;
        u.quadratic += 0.5 * w * (a.row * b.row.transpose() + b.row * a.row.transpose());
        u.linears += w * (a.offset * b.row + b.offset * a.row);
        u.constant += w * a.offset * b.offset;
    };

    for (const auto& b : g.branches) {
        switch (b.kind) {
            case BranchKind::inductor: {
                forbid_driven(b);
                if (in_mutual.count(b.id)) break; // handled with its partner
                const auto fe = detail::branch_flux_expr(g, t, vars, b);
                add_bilinear(1.0 / b.value, fe, fe);
                break;
            }
            case BranchKind::josephson: {
                forbid_driven(b);
                const auto fe = detail::branch_flux_expr(g, t, vars, b);
                CosineTerm ct;
                ct.ej_ghz = b.value;
                ct.coefficients = fe.row;
                ct.phase = 2.0 * M_PI * fe.offset;
                u.cosines.push_back(ct);
                break;
            }
            case BranchKind::current_source: {
                // U = i_s * flux along the declared orientation.
                const auto fe = detail::branch_flux_expr(g, t, vars, b);
                const double c_ghz =
                    b.value * constants::phi0 / constants::h_planck * 1e-9 * fe.sign;
                u.linears += c_ghz * fe.row;
                u.constant += c_ghz * fe.offset;
                break;
            }
            default: break; // capacitors/voltage sources in the kinetic form; resistors lossless-ignored
        }
    }

    // Mutual blocks: U = 1/2 [fa fb] M^{-1} [fa fb]^T with M = [[La,M],[M,Lb]].
    for (const auto& c : g.couplings) {
        if (c.kind != CouplingKind::mutual_inductance) continue;
        const Branch* ba = g.find_branch(c.branch_a);
        const Branch* bb = g.find_branch(c.branch_b);
        if (!ba || !bb || ba->kind != BranchKind::inductor || bb->kind != BranchKind::inductor)
            throw Error(ErrorCode::InvalidArgument,
                        "mutual '" + c.id + "' must couple two inductor branches");
        const double la = ba->value, lb = bb->value, m = c.mutual_nh;
        const double det = la * lb - m * m;
        if (!(det > 0.0))
            throw Error(ErrorCode::PerfectCouplingSingular,
                        "mutual '" + c.id + "' has |k| >= 1 (singular inductance block)");
        const auto fa = detail::branch_flux_expr(g, t, vars, *ba);
        const auto fb = detail::branch_flux_expr(g, t, vars, *bb);
        add_bilinear(lb / det, fa, fa);
        add_bilinear(la / det, fb, fb);
        add_bilinear(-m / det, fa, fb);
        add_bilinear(-m / det, fb, fa);
    }
    return u;
}

namespace detail {

inline bool is_integer_row(const Eigen::VectorXd& row, double tol = 1e-9) {
    for (int i = 0; i < row.size(); ++i)
        if (std::abs(row(i) - std::round(row(i))) > tol) return false;
    return true;
}

} // namespace detail

/// Legendre transform bookkeeping: eliminate zero-kinetic-row variables when
/// the potential is quadratic in them (stationarity / Schur complement),
/// invert the capacitance matrix and classify variables.
inline HamiltonianSpec hamiltonian_spec(const KineticForm& k, const PotentialForm& u) {
    const int n = static_cast<int>(k.variables.size());

    std::vector<int> keep, drop;
    for (int i = 0; i < n; ++i) {
        const bool zero_row = k.cap_matrix.row(i).cwiseAbs().maxCoeff() == 0.0;
        if (!zero_row) {
            keep.push_back(i);
            continue;
        }
        if (k.vec_potential.row(i).cwiseAbs().maxCoeff() != 0.0)
            throw Error(ErrorCode::SingularCapacitance,
                        "node '" + k.variables[i] + "' has a gyrator but no capacitance");
        for (const auto& ct : u.cosines)
            if (std::abs(ct.coefficients(i)) > 1e-12)
                throw Error(ErrorCode::SingularCapacitance,
                            "node '" + k.variables[i] +
                                "' has no capacitive path yet appears in a junction "
                                "cosine; add an explicit small junction capacitance");
        drop.push_back(i);
    }

    Eigen::MatrixXd K = u.quadratic;
    Eigen::VectorXd c = u.linears;
    double constant = u.constant;

    const int na = static_cast<int>(keep.size());
    const int ne = static_cast<int>(drop.size());

    Eigen::MatrixXd Kaa(na, na), Kae(na, ne), Kee(ne, ne);
    Eigen::VectorXd ca(na), ce(ne);
    for (int i = 0; i < na; ++i) {
        ca(i) = c(keep[i]);
        for (int j = 0; j < na; ++j) Kaa(i, j) = K(keep[i], keep[j]);
        for (int j = 0; j < ne; ++j) Kae(i, j) = K(keep[i], drop[j]);
    }
    for (int i = 0; i < ne; ++i) {
        ce(i) = c(drop[i]);
        for (int j = 0; j < ne; ++j) Kee(i, j) = K(drop[i], drop[j]);
    }

    if (ne > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Kee);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw Error(ErrorCode::SingularCapacitance,
                        "zero-kinetic variables lack a stable quadratic minimum");
        const Eigen::MatrixXd Kee_inv = Kee.inverse();
        Kaa -= Kae * Kee_inv * Kae.transpose();
        ca -= Kae * Kee_inv * ce;
        constant -= 0.5 * ce.dot(Kee_inv * ce);
    }

    HamiltonianSpec spec;
    spec.cap_matrix.resize(na, na);
    spec.charge_offset.resize(na);
    spec.vec_potential.resize(na, na);
    for (int i = 0; i < na; ++i) {
        spec.charge_offset(i) = k.source_offset(keep[i]);
        for (int j = 0; j < na; ++j) {
            spec.cap_matrix(i, j) = k.cap_matrix(keep[i], keep[j]);
            spec.vec_potential(i, j) = k.vec_potential(keep[i], keep[j]);
        }
    }
    spec.potential.quadratic = Kaa;
    spec.potential.linears = ca;
    spec.potential.constant = constant;
    for (const auto& ct : u.cosines) {
        CosineTerm reduced = ct;
        reduced.coefficients.resize(na);
        for (int i = 0; i < na; ++i) reduced.coefficients(i) = ct.coefficients(keep[i]);
        spec.potential.cosines.push_back(reduced);
    }

    // Invert the capacitance matrix; the residual must be small.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(spec.cap_matrix);
    if (!lu.isInvertible())
        throw Error(ErrorCode::SingularCapacitance,
                    "capacitance matrix is singular (floating island or missing shunt)");
    spec.inv_cap = lu.inverse();

    // A variable absent from every potential term has a conserved conjugate
    // charge; restrict to its zero-charge sector by striking the row/column
    // of the inverse capacitance (not of C itself).
    {
        std::vector<int> live;
        for (int i = 0; i < static_cast<int>(keep.size()); ++i) {
            const bool in_quad = spec.potential.quadratic.row(i).cwiseAbs().maxCoeff() > 0.0;
            const bool in_lin = std::abs(spec.potential.linears(i)) > 0.0;
            bool in_cos = false;
            for (const auto& ct : spec.potential.cosines)
                if (std::abs(ct.coefficients(i)) > 1e-12) in_cos = true;
            const bool in_gyr = spec.vec_potential.row(i).cwiseAbs().maxCoeff() > 0.0 ||
                                spec.vec_potential.col(i).cwiseAbs().maxCoeff() > 0.0;
            if (in_quad || in_lin || in_cos || in_gyr) live.push_back(i);
        }
        if (static_cast<int>(live.size()) < static_cast<int>(keep.size())) {
            const int nl = static_cast<int>(live.size());
            Eigen::MatrixXd inv2(nl, nl), w2(nl, nl), quad2(nl, nl);
            Eigen::VectorXd off2(nl), lin2(nl);
            std::vector<int> keep2(nl);
            for (int i = 0; i < nl; ++i) {
                keep2[i] = keep[live[i]];
                off2(i) = spec.charge_offset(live[i]);
                lin2(i) = spec.potential.linears(live[i]);
                for (int j = 0; j < nl; ++j) {
                    inv2(i, j) = spec.inv_cap(live[i], live[j]);
                    w2(i, j) = spec.vec_potential(live[i], live[j]);
                    quad2(i, j) = spec.potential.quadratic(live[i], live[j]);
                }
            }
            for (auto& ct : spec.potential.cosines) {
                Eigen::VectorXd coeff(nl);
                for (int i = 0; i < nl; ++i) coeff(i) = ct.coefficients(live[i]);
                ct.coefficients = coeff;
            }
            spec.inv_cap = inv2;
            spec.cap_matrix = inv2.inverse();
            spec.vec_potential = w2;
            spec.charge_offset = off2;
            spec.potential.quadratic = quad2;
            spec.potential.linears = lin2;
            keep = keep2;
        }
    }
    const int nf = static_cast<int>(keep.size());
    const double resid =
        (spec.inv_cap * spec.cap_matrix - Eigen::MatrixXd::Identity(nf, nf)).cwiseAbs().maxCoeff();
    if (resid > 1e-12 * std::max(1.0, spec.cap_matrix.cwiseAbs().maxCoeff() *
                                          spec.inv_cap.cwiseAbs().maxCoeff()))
        throw Error(ErrorCode::SingularCapacitance, "capacitance matrix is badly conditioned");

    for (int i = 0; i < nf; ++i) {
        VariableInfo v;
        v.name = k.variables[keep[i]];
        v.ec_ghz = charging_energy_ghz(1.0) * spec.inv_cap(i, i);
        v.el_ghz = spec.potential.quadratic(i, i) / (4.0 * M_PI * M_PI);

        bool in_cosine = false, integer_coeffs = true;
        for (const auto& ct : spec.potential.cosines) {
            if (std::abs(ct.coefficients(i)) < 1e-12) continue;
            in_cosine = true;
            if (std::abs(ct.coefficients(i) - std::round(ct.coefficients(i))) > 1e-9)
                integer_coeffs = false;
        }
        const bool no_quadratic = spec.potential.quadratic.row(i).cwiseAbs().maxCoeff() < 1e-12;
        const bool no_linear = std::abs(spec.potential.linears(i)) < 1e-12;
        const bool no_gyr = spec.vec_potential.row(i).cwiseAbs().maxCoeff() < 1e-12 &&
                            spec.vec_potential.col(i).cwiseAbs().maxCoeff() < 1e-12;

        if (in_cosine && integer_coeffs && no_quadratic && no_linear && no_gyr) {
            v.kind = VariableKind::compact;
        } else {
            v.kind = VariableKind::extended;
            if (v.el_ghz > 0.0) {
                v.phi_zpf = std::pow(2.0 * v.ec_ghz / v.el_ghz, 0.25);
                v.q_zpf = 0.5 * std::pow(v.el_ghz / (2.0 * v.ec_ghz), 0.25);
            }
        }
        spec.variables.push_back(v);
    }
    return spec;
}

/// Build the full spec for a netlist in one call.
inline HamiltonianSpec quantize(const CircuitGraph& g, bool prefer_capacitive = true) {
    auto t = assign_chord_fluxes(decompose(g, prefer_capacitive), g);
    return hamiltonian_spec(kinetic_form(g, t), potential_form(g, t));
}

/// Time-dependent external flux parameters: static value plus an optional
/// harmonic modulation consumed by the dynamics module.
struct FluxDescriptor {
    double value_phi0 = 0.0;
    double amplitude_phi0 = 0.0;
    double carrier_ghz = 0.0;
    double phase_rad = 0.0;
};

/// Two-junction SQUID loop with the time-dependent flux split across the
/// junctions so that no dPhi_ext/dt term enters the kinetic energy.
/// Weights are C2/(C1-C2) and C1/(C1-C2).
namespace detail {

inline HamiltonianSpec squid_spec(double c1_ff, double c2_ff, double ej1_ghz, double ej2_ghz,
                                  double phase1, double phase2) {
    HamiltonianSpec spec;
    spec.cap_matrix = Eigen::MatrixXd::Constant(1, 1, c1_ff + c2_ff);
    spec.inv_cap = Eigen::MatrixXd::Constant(1, 1, 1.0 / (c1_ff + c2_ff));
    spec.charge_offset = Eigen::VectorXd::Zero(1);
    spec.vec_potential = Eigen::MatrixXd::Zero(1, 1);
    spec.potential.quadratic = Eigen::MatrixXd::Zero(1, 1);
    spec.potential.linears = Eigen::VectorXd::Zero(1);
    CosineTerm j1, j2;
    j1.ej_ghz = ej1_ghz;
    j1.coefficients = Eigen::VectorXd::Ones(1);
    j1.phase = phase1;
    j2.ej_ghz = ej2_ghz;
    j2.coefficients = Eigen::VectorXd::Ones(1);
    j2.phase = phase2;
    spec.potential.cosines = {j1, j2};
    VariableInfo v;
    v.name = "squid";
    v.kind = VariableKind::compact;
    v.ec_ghz = charging_energy_ghz(c1_ff + c2_ff);
    spec.variables.push_back(v);
    return spec;
}

} // namespace detail

inline HamiltonianSpec irrotational_gauge(double c1_ff, double c2_ff, double ej1_ghz,
                                          double ej2_ghz, const FluxDescriptor& flux) {
    if (std::abs(c1_ff - c2_ff) <= 1e-12 * std::max(std::abs(c1_ff), std::abs(c2_ff)))
        throw Error(ErrorCode::DegenerateGauge, "irrotational gauge requires C1 != C2");
    const double phi_ext = 2.0 * M_PI * flux.value_phi0;
    return detail::squid_spec(c1_ff, c2_ff, ej1_ghz, ej2_ghz,
                              -c2_ff / (c1_ff - c2_ff) * phi_ext,
                              -c1_ff / (c1_ff - c2_ff) * phi_ext);
}

/// The same SQUID with the whole flux on the second junction (the plain
/// chord assignment), for gauge-equivalence checks.
inline HamiltonianSpec squid_chord_gauge(double c1_ff, double c2_ff, double ej1_ghz,
                                         double ej2_ghz, const FluxDescriptor& flux) {
    return detail::squid_spec(c1_ff, c2_ff, ej1_ghz, ej2_ghz, 0.0,
                              -2.0 * M_PI * flux.value_phi0);
}

struct PerturbativeInverse {
    Eigen::MatrixXd inverse;
    double perturbation_ratio = 0.0; // ||C0^{-1} E||
    double error_bound = 0.0;        // operator-norm bound vs the exact inverse
};

/// Block-diagonal inverse plus first (and optionally second) order
/// corrections: C0^{-1} - C0^{-1} E C0^{-1} + C0^{-1} E C0^{-1} E C0^{-1}.
inline PerturbativeInverse perturbative_inverse(const Eigen::MatrixXd& c,
                                                const std::vector<std::vector<int>>& partition,
                                                int order) {
    if (order != 1 && order != 2)
        throw Error(ErrorCode::InvalidArgument, "perturbative_inverse supports order 1 or 2");
    const int n = static_cast<int>(c.rows());
    Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(n, n);
    for (const auto& block : partition)
        for (int i : block)
            for (int j : block) c0(i, j) = c(i, j);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(c0);
    if (!lu.isInvertible())
        throw Error(ErrorCode::SingularCapacitance, "block-diagonal part is singular");
    const Eigen::MatrixXd c0i = lu.inverse();
    const Eigen::MatrixXd e = c - c0;

    PerturbativeInverse out;
    const Eigen::MatrixXd c0ie = c0i * e;
    out.perturbation_ratio = c0ie.operatorNorm();
    if (out.perturbation_ratio >= 1.0)
        throw Error(ErrorCode::DominantPerturbation,
                    "off-block coupling is not perturbative (||C0^{-1}E|| >= 1)");
    out.inverse = c0i - c0ie * c0i;
    if (order == 2) out.inverse += c0ie * c0ie * c0i;
    // Geometric-series tail: ||C^{-1} - approx|| <= ||C0^{-1}|| r^{order+1}/(1-r).
    out.error_bound = c0i.operatorNorm() *
                      std::pow(out.perturbation_ratio, order + 1) /
                      (1.0 - out.perturbation_ratio);
    return out;
}

/// Classical normal-mode frequencies sqrt(eig(C^{-1} K)) in GHz, for
/// harmonic specs; the Euler-Lagrange route used as an independent check.
inline Eigen::VectorXd harmonic_frequencies_ghz(const HamiltonianSpec& spec) {
    const double k_si = constants::h_planck * 1e9 / (constants::phi0 * constants::phi0);
    const Eigen::MatrixXd m =
        (spec.inv_cap * 1e15) * (spec.potential.quadratic * k_si); // 1/s^2
    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd f(m.rows());
    for (int i = 0; i < m.rows(); ++i)
        f(i) = std::sqrt(std::max(0.0, es.eigenvalues()(i).real())) / (2.0 * M_PI) * 1e-9;
    std::sort(f.data(), f.data() + f.size());
    return f;
}

} // namespace qcirc
