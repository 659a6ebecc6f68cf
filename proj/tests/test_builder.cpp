#include <catch2/catch_amalgamated.hpp>

#include "qcirc/builder.hpp"
#include "qcirc/spectrum.hpp"

using namespace qcirc;

namespace {

HamiltonianSpec quantize_text(const char* src) { return quantize(parse_netlist(src)); }

// Classical Hamilton's equations for a harmonic spec with vector potential:
// xdot = Cinv (Q - W x), Qdot = W^T Cinv (Q - W x) - K x, all in SI.
struct ClassicalState {
    Eigen::VectorXd x, q;
};

struct ClassicalSystem {
    Eigen::MatrixXd cinv_si, w_si, k_si;

    explicit ClassicalSystem(const HamiltonianSpec& s) {
        cinv_si = s.inv_cap * 1e15;
        const double q2e = 2.0 * constants::e_charge;
        w_si = s.vec_potential * q2e / constants::phi0;
        k_si = s.potential.quadratic * constants::h_planck * 1e9 /
               (constants::phi0 * constants::phi0);
    }
    double energy(const ClassicalState& s) const {
        const Eigen::VectorXd p = s.q - w_si * s.x;
        return 0.5 * p.dot(cinv_si * p) + 0.5 * s.x.dot(k_si * s.x);
    }
    ClassicalState deriv(const ClassicalState& s) const {
        const Eigen::VectorXd p = cinv_si * (s.q - w_si * s.x);
        return {p, w_si.transpose() * p - k_si * s.x};
    }
    void rk4(ClassicalState& s, double dt) const {
        auto add = [](const ClassicalState& a, const ClassicalState& b, double f) {
            return ClassicalState{a.x + f * b.x, a.q + f * b.q};
        };
        const auto k1 = deriv(s);
        const auto k2 = deriv(add(s, k1, dt / 2));
        const auto k3 = deriv(add(s, k2, dt / 2));
        const auto k4 = deriv(add(s, k3, dt));
        s.x += dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        s.q += dt / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
    }
};

} // namespace

TEST_CASE("driven-LC capacitance matrix", "[builder]") {
    // voltage source replaced by its capacitor C_s; two live nodes
    const char* src = R"(
C cs 1 0 120fF
C cg 1 2 4fF
C c  2 0 80fF
L l  2 0 10nH
)";
    auto g = parse_netlist(src);
    auto t = assign_chord_fluxes(decompose(g), g);
    auto k = kinetic_form(g, t);
    REQUIRE(k.cap_matrix.rows() == 2);
    CHECK(k.cap_matrix(0, 0) == Catch::Approx(124.0));
    CHECK(k.cap_matrix(0, 1) == Catch::Approx(-4.0));
    CHECK(k.cap_matrix(1, 0) == Catch::Approx(-4.0));
    CHECK(k.cap_matrix(1, 1) == Catch::Approx(84.0));
}

TEST_CASE("single grounded capacitor", "[builder]") {
    auto g = parse_netlist("C c1 1 0 50fF\nL l1 1 0 1nH\n");
    auto t = assign_chord_fluxes(decompose(g), g);
    auto k = kinetic_form(g, t);
    REQUIRE(k.cap_matrix.rows() == 1);
    CHECK(k.cap_matrix(0, 0) == Catch::Approx(50.0));
}

TEST_CASE("transmon-resonator capacitance matrix", "[builder]") {
    const char* src = R"(
C ct 1 0 70fF
J jt 1 0 12GHz
C cc 1 2 3fF
C cr 2 0 250fF
L lr 2 0 2nH
)";
    auto g = parse_netlist(src);
    auto t = assign_chord_fluxes(decompose(g), g);
    auto k = kinetic_form(g, t);
    REQUIRE(k.cap_matrix.rows() == 2);
    CHECK(k.cap_matrix(0, 0) == Catch::Approx(73.0));
    CHECK(k.cap_matrix(0, 1) == Catch::Approx(-3.0));
    CHECK(k.cap_matrix(1, 1) == Catch::Approx(253.0));
}

TEST_CASE("voltage source folds into a charge offset", "[builder]") {
    const char* src = R"(
V vs 3 0 1uV
C cg 3 2 4fF
C c  2 0 80fF
L l  2 0 10nH
)";
    auto g = parse_netlist(src);
    auto t = assign_chord_fluxes(decompose(g), g);
    auto k = kinetic_form(g, t);
    REQUIRE(k.variables == std::vector<std::string>{"2"});
    CHECK(k.cap_matrix(0, 0) == Catch::Approx(84.0));
    // offset = C_g v_s in 2e units
    const double expect = 4e-15 * 1e-6 / (2.0 * constants::e_charge);
    CHECK(k.source_offset(0) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("junction cosine with zero external flux", "[builder]") {
    auto spec = quantize_text("C c1 1 0 60fF\nJ j1 1 0 15GHz\n");
    REQUIRE(spec.potential.cosines.size() == 1);
    CHECK(spec.potential.cosines[0].ej_ghz == Catch::Approx(15.0));
    CHECK(spec.potential.cosines[0].phase == 0.0);
    CHECK(spec.variables[0].kind == VariableKind::compact);
    // H = 4 E_C q^2 - E_J cos(phi)
    CHECK(spec.variables[0].ec_ghz == Catch::Approx(charging_energy_ghz(60.0)));
}

TEST_CASE("current-biased junction gives a washboard", "[builder]") {
    auto spec = quantize_text("C c1 1 0 60fF\nJ j1 1 0 15GHz\nI ib 1 0 1nA\n");
    REQUIRE(spec.potential.cosines.size() == 1);
    // U = i_s Phi - E_J cos(2 pi Phi/Phi0): linear term i_s Phi0/h in GHz/Phi0
    const double expect = 1e-9 * constants::phi0 / constants::h_planck * 1e-9;
    CHECK(spec.potential.linears(0) == Catch::Approx(expect).epsilon(1e-12));
    // the linear term makes the variable extended, but E_L stays zero
    CHECK(spec.variables[0].kind == VariableKind::extended);
}

TEST_CASE("rf-SQUID pair quadratic block is the inverted inductance matrix", "[builder]") {
    const char* src = R"(
C c1 1 0 5fF
J j1 1 0 8GHz
L l1 1 0 300nH flux=f1
C c2 2 0 5fF
J j2 2 0 8GHz
L l2 2 0 200nH flux=f2
MUT m12 l1 l2 50
FLUX f1 0.5
FLUX f2 0.5
)";
    auto spec = quantize_text(src);
    const double det = 300.0 * 200.0 - 50.0 * 50.0;
    const double fac = 4.0 * M_PI * M_PI * inductive_energy_ghz(1.0);
    // K = Phi0^2 M^{-1} (in h GHz per Phi0^2)
    CHECK(spec.potential.quadratic(0, 0) == Catch::Approx(fac * 200.0 / det).epsilon(1e-10));
    CHECK(spec.potential.quadratic(1, 1) == Catch::Approx(fac * 300.0 / det).epsilon(1e-10));
    CHECK(spec.potential.quadratic(0, 1) == Catch::Approx(-fac * 50.0 / det).epsilon(1e-10));
    // external flux shifted the inductive branches: linear terms appear
    CHECK(std::abs(spec.potential.linears(0)) > 0.0);
}

TEST_CASE("perfect coupling |k| = 1 is singular", "[builder]") {
    const char* src = R"(
C c1 1 0 5fF
L l1 1 0 100nH
C c2 2 0 5fF
L l2 2 0 400nH
MUT m12 l1 l2 200
)";
    auto g = parse_netlist(src);
    auto t = assign_chord_fluxes(decompose(g), g);
    CHECK_THROWS_AS(potential_form(g, t), Error);
}

TEST_CASE("LC spec reproduces 1/(2 pi sqrt(LC))", "[builder]") {
    auto spec = quantize_text("C c1 1 0 80fF\nL l1 1 0 10nH\n");
    const double f_expected =
        1.0 / (2.0 * M_PI * std::sqrt(10e-9 * 80e-15)) * 1e-9; // 5.627 GHz
    auto f = harmonic_frequencies_ghz(spec);
    REQUIRE(f.size() == 1);
    CHECK(f(0) == Catch::Approx(f_expected).epsilon(1e-12));
    CHECK(f(0) == Catch::Approx(5.627).epsilon(1e-3));

    // quantized ladder: E_{n+1} - E_n = f_r
    auto basis = default_basis(spec, 15, 30);
    auto res = diagonalize(assemble(spec, basis), 4);
    for (int n = 0; n + 1 < 4; ++n)
        CHECK(res.eigenvalues(n + 1) - res.eigenvalues(n) == Catch::Approx(f_expected).epsilon(1e-9));
}

TEST_CASE("Legendre consistency for coupled harmonic spec", "[builder][property]") {
    const char* src = R"(
C c1 1 0 100fF
L l1 1 0 8nH
C c12 1 2 20fF
C c2 2 0 60fF
L l2 2 0 12nH
)";
    auto spec = quantize_text(src);
    auto f_el = harmonic_frequencies_ghz(spec); // Euler-Lagrange route
    auto basis = default_basis(spec, 15, 24);
    auto res = diagonalize(assemble(spec, basis), 6, true);
    // single-excitation energies above the ground state are the mode frequencies
    const double e0 = res.eigenvalues(0);
    std::vector<double> found;
    for (int i = 1; i < 6; ++i) found.push_back(res.eigenvalues(i) - e0);
    // the two lowest single-mode transitions must match f_el
    CHECK(found[0] == Catch::Approx(f_el(0)).epsilon(1e-10));
    bool second = std::abs(found[1] - f_el(1)) < 1e-8 * f_el(1) ||
                  std::abs(found[2] - f_el(1)) < 1e-8 * f_el(1);
    CHECK(second);
}

TEST_CASE("zero-kinetic quadratic variable is eliminated by stationarity", "[builder]") {
    // series inductors with a bare middle node: effective L = L1 + L2
    const char* src = R"(
C c1 1 0 90fF
L l1 1 2 4nH
L l2 2 0 6nH
)";
    auto spec = quantize_text(src);
    REQUIRE(spec.size() == 1);
    auto f = harmonic_frequencies_ghz(spec);
    const double f_expected = 1.0 / (2.0 * M_PI * std::sqrt(10e-9 * 90e-15)) * 1e-9;
    CHECK(f(0) == Catch::Approx(f_expected).epsilon(1e-10));
}

TEST_CASE("nonlinear zero-kinetic variable is refused", "[builder]") {
    // C in series with L, junction to ground: no capacitive path at node 1
    const char* src = R"(
C c 2 0 50fF
L l 2 1 5nH
J j 1 0 10GHz
)";
    auto g = parse_netlist(src);
    auto t = decompose(g);
    CHECK_FALSE(t.capacitive_tree);
    try {
        quantize(g);
        FAIL("expected SingularCapacitance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularCapacitance);
        CHECK(std::string(e.what()).find("capacitance") != std::string::npos);
    }
}

TEST_CASE("gyrator vector potential is antisymmetric with G R_Q/2 entries", "[builder]") {
    const char* src = R"(
C c1 1 0 100fF
L l1 1 0 10nH
C c2 2 0 100fF
L l2 2 0 10nH
GYR g1 1 0 2 0 0.02
)";
    auto spec = quantize_text(src);
    const double w = 0.02 * constants::r_quantum / 2.0;
    CHECK(spec.vec_potential(0, 1) == Catch::Approx(-w));
    CHECK(spec.vec_potential(1, 0) == Catch::Approx(w));
    CHECK((spec.vec_potential + spec.vec_potential.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gyrator conserves classical energy along trajectories", "[builder][property]") {
    const char* src = R"(
C c1 1 0 100fF
L l1 1 0 10nH
C c2 2 0 100fF
L l2 2 0 10nH
GYR g1 1 0 2 0 0.005
)";
    auto spec = quantize_text(src);
    ClassicalSystem sys(spec);
    ClassicalState s;
    s.x = Eigen::VectorXd::Zero(2);
    s.q = Eigen::VectorXd::Zero(2);
    s.x(0) = 0.3 * constants::phi0;
    s.q(1) = 2.0 * constants::e_charge * 5.0;
    const double e0 = sys.energy(s);
    const double dt = 1e-13; // s; frequencies are ~5 GHz
    for (int step = 0; step < 20000; ++step) sys.rk4(s, dt);
    CHECK(sys.energy(s) == Catch::Approx(e0).epsilon(1e-8));
}

TEST_CASE("gyrator spectrum matches the Landau-like closed form", "[builder]") {
    // two identical LC ports coupled by G: f_pm = sqrt(f0^2 + fc^2/4) +- fc/2,
    // with the cyclotron analog fc = G/(2 pi C).
    const double c_ff = 100.0, l_nh = 10.0, g_s = 0.002;
    const char* src = R"(
C c1 1 0 100fF
L l1 1 0 10nH
C c2 2 0 100fF
L l2 2 0 10nH
GYR g1 1 0 2 0 0.002
)";
    auto spec = quantize_text(src);
    const double f0 = 1.0 / (2.0 * M_PI * std::sqrt(l_nh * 1e-9 * c_ff * 1e-15)) * 1e-9;
    const double fc = g_s / (c_ff * 1e-15) / (2.0 * M_PI) * 1e-9;
    const double fplus = std::sqrt(f0 * f0 + fc * fc / 4.0) + fc / 2.0;
    const double fminus = std::sqrt(f0 * f0 + fc * fc / 4.0) - fc / 2.0;

    auto basis = default_basis(spec, 15, 28);
    auto res = diagonalize(assemble(spec, basis), 8);
    const double e0 = res.eigenvalues(0);
    CHECK(res.eigenvalues(1) - e0 == Catch::Approx(fminus).epsilon(1e-7));
    // the upper mode sits among multi-quanta levels of the lower one
    double best = 1e9;
    for (int i = 1; i < 8; ++i)
        best = std::min(best, std::abs(res.eigenvalues(i) - e0 - fplus));
    CHECK(best < 1e-6 * fplus);
}

TEST_CASE("irrotational gauge limits and degeneracy", "[builder]") {
    FluxDescriptor flux;
    flux.value_phi0 = 0.37;
    // C2 = 0: all flux on the second junction
    auto spec = irrotational_gauge(5.0, 0.0, 10.0, 12.0, flux);
    CHECK(spec.potential.cosines[0].phase == Catch::Approx(0.0));
    CHECK(spec.potential.cosines[1].phase == Catch::Approx(-2.0 * M_PI * 0.37));
    CHECK_THROWS_AS(irrotational_gauge(3.0, 3.0, 10.0, 12.0, flux), Error);
}

TEST_CASE("static flux: gauged and ungauged spectra agree", "[builder][property]") {
    FluxDescriptor flux;
    flux.value_phi0 = 0.23;
    auto gauged = irrotational_gauge(2.0, 1.0, 9.0, 11.0, flux);
    auto plain = squid_chord_gauge(2.0, 1.0, 9.0, 11.0, flux);
    auto b1 = default_basis(gauged, 15, 0);
    auto b2 = default_basis(plain, 15, 0);
    auto e1 = diagonalize(assemble(gauged, b1), 6).eigenvalues;
    auto e2 = diagonalize(assemble(plain, b2), 6).eigenvalues;
    for (int i = 0; i < 6; ++i)
        CHECK(e1(i) == Catch::Approx(e2(i)).epsilon(1e-10));
}

TEST_CASE("perturbative inverse", "[builder]") {
    Eigen::MatrixXd c(3, 3);
    c << 100.0, -2.0, 0.0,
         -2.0, 80.0, -1.0,
         0.0, -1.0, 120.0;
    std::vector<std::vector<int>> partition{{0}, {1}, {2}};

    SECTION("E = 0 gives the exact block inverse") {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
        d.diagonal() << 10.0, 20.0, 30.0;
        auto r = perturbative_inverse(d, partition, 1);
        CHECK((r.inverse - d.inverse()).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(r.error_bound == Catch::Approx(0.0).margin(1e-30));
    }

    SECTION("error bound honest against the dense inverse") {
        for (int order : {1, 2}) {
            auto r = perturbative_inverse(c, partition, order);
            const double err = (r.inverse - c.inverse()).operatorNorm();
            CHECK(err <= r.error_bound * (1.0 + 1e-12));
        }
        // second order beats first order for a weak perturbation
        auto r1 = perturbative_inverse(c, partition, 1);
        auto r2 = perturbative_inverse(c, partition, 2);
        CHECK((r2.inverse - c.inverse()).operatorNorm() <
              (r1.inverse - c.inverse()).operatorNorm());
    }

    SECTION("first-order correction keeps the coupling sparsity") {
        // 3-node chain, weak couplings: C0^{-1} E C0^{-1} has no (0,2) entry
        auto r = perturbative_inverse(c, partition, 1);
        Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(3, 3);
        c0.diagonal() = c.diagonal();
        const Eigen::MatrixXd corr = c0.inverse() - r.inverse; // = C0^{-1} E C0^{-1}
        CHECK(std::abs(corr(0, 2)) < 1e-18);
        CHECK(std::abs(corr(0, 1)) > 0.0);
    }

    SECTION("dominant perturbation is rejected") {
        Eigen::MatrixXd bad(2, 2);
        bad << 1.0, 2.0, 2.0, 1.0;
        CHECK_THROWS_AS(perturbative_inverse(bad, {{0}, {1}}, 1), Error);
    }

    SECTION("weak-coupling error scale") {
        // chain with C_weak = C_strong/100: the first-order error is second
        // order in the coupling ratio
        auto chain_error = [](double cw) {
            const double cs = 100.0;
            Eigen::MatrixXd chain(3, 3);
            chain << cs + cw, -cw, 0.0,
                     -cw, cs + 2 * cw, -cw,
                     0.0, -cw, cs + cw;
            auto r = perturbative_inverse(chain, {{0}, {1}, {2}}, 1);
            return (r.inverse - chain.inverse()).cwiseAbs().maxCoeff();
        };
        const double cs = 100.0, cw = 1.0;
        Eigen::MatrixXd c0 = Eigen::MatrixXd::Zero(3, 3);
        c0.diagonal() << cs + cw, cs + 2 * cw, cs + cw;
        // middle node couples twice, hence the sqrt(2) in the ratio
        const double scale = 2.0 * (cw / cs) * (cw / cs) * c0.inverse().operatorNorm();
        CHECK(chain_error(cw) < scale);
        // quadratic scaling: halving the coupling quarters the error
        CHECK(chain_error(cw / 2) == Catch::Approx(chain_error(cw) / 4.0).epsilon(0.05));
    }
}

TEST_CASE("ground-node independence: harmonic circuit", "[builder][property]") {
    const char* src = R"(
C c1 1 0 100fF
L l1 1 0 8nH
C c12 1 2 15fF
C c2 2 0 70fF
L l2 2 0 12nH
)";
    auto g = parse_netlist(src);
    auto s1 = quantize(g);
    auto s2 = quantize(g.reground("2"));
    auto f1 = harmonic_frequencies_ghz(s1);
    auto f2 = harmonic_frequencies_ghz(s2);
    REQUIRE(f1.size() == f2.size());
    for (int i = 0; i < f1.size(); ++i) CHECK(f1(i) == Catch::Approx(f2(i)).epsilon(1e-12));

    auto e1 = diagonalize(assemble(s1, default_basis(s1, 15, 22)), 4).eigenvalues;
    auto e2 = diagonalize(assemble(s2, default_basis(s2, 15, 22)), 4).eigenvalues;
    for (int i = 1; i < 4; ++i)
        CHECK(e1(i) - e1(0) == Catch::Approx(e2(i) - e2(0)).epsilon(1e-8));
}

TEST_CASE("ground-node independence: transmon circuit", "[builder][property]") {
    const char* src = R"(
C ct 1 0 40fF
J jt 1 0 8GHz
C cc 1 2 4fF
C cr 2 0 120fF
L lr 2 0 4nH
)";
    auto g = parse_netlist(src);
    auto s1 = quantize(g);
    auto s2 = quantize(g.reground("2"));

    auto e1 = diagonalize(assemble(s1, default_basis(s1, 9, 24)), 4).eigenvalues;
    auto e2 = diagonalize(assemble(s2, default_basis(s2, 9, 24)), 4).eigenvalues;
    for (int i = 1; i < 4; ++i)
        CHECK(e1(i) - e1(0) == Catch::Approx(e2(i) - e2(0)).epsilon(1e-8));
}

TEST_CASE("capacitive island node reduces to the series rule", "[builder]") {
    // a pure capacitive island between the qubit and the resonator carries a
    // conserved charge; striking it from the inverse capacitance must give
    // the series combination Cc1 Cc2/(Cc1 + Cc2)
    const char* with_island = R"(
C c   a 0 40fF
J j   a 0 8GHz
C cc1 a d 12fF
C cc2 d b 6fF
C cr  b 0 120fF
L lr  b 0 4nH
)";
    const char* reduced = R"(
C c  a 0 40fF
J j  a 0 8GHz
C cc a b 4fF
C cr b 0 120fF
L lr b 0 4nH
)";
    auto s1 = quantize(parse_netlist(with_island));
    auto s2 = quantize(parse_netlist(reduced));
    REQUIRE(s1.size() == 2);
    REQUIRE(s2.size() == 2);
    CHECK((s1.cap_matrix - s2.cap_matrix).cwiseAbs().maxCoeff() < 1e-10);

    auto e1 = diagonalize(assemble(s1, default_basis(s1, 9, 20)), 4).eigenvalues;
    auto e2 = diagonalize(assemble(s2, default_basis(s2, 9, 20)), 4).eigenvalues;
    for (int i = 1; i < 4; ++i)
        CHECK(e1(i) - e1(0) == Catch::Approx(e2(i) - e2(0)).epsilon(1e-10));
}
