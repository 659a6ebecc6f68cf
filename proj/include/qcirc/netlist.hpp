#pragma once

// Netlist front end: a line-oriented element list is parsed into an oriented
// circuit multigraph. Node "0" is ground. Values carry explicit unit
// suffixes; Josephson junctions are specified by E_J/h in GHz.
//
//   C  id  node+ node-  80fF            capacitor
//   L  id  node+ node-  10nH  [flux=t]  inductor
//   J  id  node+ node-  16GHz [flux=t]  Josephson junction (E_J/h)
//   V  id  node+ node-  1uV             voltage source
//   I  id  node+ node-  1nA   [flux=t]  current source
//   R  id  node+ node-  50Ohm           resistor
//   MUT id  br_a br_b   2.5             mutual inductance (nH)
//   GYR id  n1+ n1- n2+ n2-  0.02       gyrator (S)
//   FLUX tag 0.5                        external flux (Phi0)
//
// A JSON mirror of the same schema is accepted for files ending in .qcj.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qcirc/constants.hpp"
#include "qcirc/errors.hpp"

#include <json.hpp>

namespace qcirc {

enum class BranchKind { capacitor, inductor, josephson, voltage_source, current_source, resistor };

inline const char* branch_kind_name(BranchKind k) {
    switch (k) {
        case BranchKind::capacitor: return "capacitor";
        case BranchKind::inductor: return "inductor";
        case BranchKind::josephson: return "josephson";
        case BranchKind::voltage_source: return "voltage-source";
        case BranchKind::current_source: return "current-source";
        case BranchKind::resistor: return "resistor";
    }
    return "?";
}

struct Branch {
    std::string id;
    BranchKind kind;
    std::string start;  // node the orientation arrow leaves
    std::string finish; // node the arrow points to; flux = phi(finish) - phi(start)
    double value = 0.0; // fF | nH | GHz | V | A | Ohm depending on kind
    std::optional<std::string> flux_tag;
    int line = 0; // source line for diagnostics
};

enum class CouplingKind { mutual_inductance, gyrator };

struct Coupling {
    std::string id;
    CouplingKind kind;
    // mutual inductance
    std::string branch_a, branch_b;
    double mutual_nh = 0.0;
    // gyrator: port 1 = (p1_plus, p1_minus), port 2 = (p2_plus, p2_minus)
    std::string p1_plus, p1_minus, p2_plus, p2_minus;
    double conductance_s = 0.0;
    int line = 0;
};

struct CircuitGraph {
    std::vector<std::string> nodes; // live nodes in first-appearance order; ground "0" excluded
    std::vector<Branch> branches;
    std::vector<Coupling> couplings;
    std::map<std::string, double> external_fluxes; // tag -> flux in Phi0

    static constexpr const char* ground = "0";

    int node_index(const std::string& name) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i] == name) return static_cast<int>(i);
        return -1; // ground or unknown
    }

    bool is_ground(const std::string& name) const { return name == ground; }

    const Branch* find_branch(const std::string& id) const {
        for (const auto& b : branches)
            if (b.id == id) return &b;
        return nullptr;
    }

    double flux_of_tag(const std::string& tag) const {
        auto it = external_fluxes.find(tag);
        return it == external_fluxes.end() ? 0.0 : it->second;
    }

    /// Same circuit with a different node chosen as ground. The previous
    /// ground node becomes a live node under the old ground's name slot.
    CircuitGraph reground(const std::string& new_ground) const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

struct UnitScale {
    const char* suffix;
    double scale;
};

// Accepted suffixes per element kind, scaled to the canonical unit.
inline double parse_value(const std::string& tok, BranchKind kind, int line) {
    static const std::vector<UnitScale> cap = {{"fF", 1.0}, {"pF", 1e3}, {"nF", 1e6}, {"aF", 1e-3}};
    static const std::vector<UnitScale> ind = {{"nH", 1.0}, {"pH", 1e-3}, {"uH", 1e3}, {"H", 1e9}};
    static const std::vector<UnitScale> jj = {{"GHz", 1.0}, {"MHz", 1e-3}, {"THz", 1e3}};
    static const std::vector<UnitScale> volt = {{"uV", 1e-6}, {"mV", 1e-3}, {"V", 1.0}, {"nV", 1e-9}};
    static const std::vector<UnitScale> amp = {{"uA", 1e-6}, {"mA", 1e-3}, {"nA", 1e-9}, {"pA", 1e-12}, {"A", 1.0}};
    static const std::vector<UnitScale> res = {{"kOhm", 1e3}, {"MOhm", 1e6}, {"mOhm", 1e-3}, {"Ohm", 1.0}};

    const std::vector<UnitScale>* table = nullptr;
    switch (kind) {
        case BranchKind::capacitor: table = &cap; break;
        case BranchKind::inductor: table = &ind; break;
        case BranchKind::josephson: table = &jj; break;
        case BranchKind::voltage_source: table = &volt; break;
        case BranchKind::current_source: table = &amp; break;
        case BranchKind::resistor: table = &res; break;
    }

    double scale = 1.0;
    std::string numeric = tok;
    for (const auto& u : *table) {
        const std::string suf = u.suffix;
        if (tok.size() > suf.size() &&
            upper(tok.substr(tok.size() - suf.size())) == upper(suf)) {
            scale = u.scale;
            numeric = tok.substr(0, tok.size() - suf.size());
            break;
        }
    }
    try {
        std::size_t pos = 0;
        double v = std::stod(numeric, &pos);
        if (pos != numeric.size()) throw std::invalid_argument(numeric);
        return v * scale;
    } catch (const std::exception&) {
        throw Error(ErrorCode::UnknownElementKind,
                    "line " + std::to_string(line) + ": cannot parse value '" + tok + "'");
    }
}

inline double parse_plain_number(const std::string& tok, int line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::UnknownElementKind,
                    "line " + std::to_string(line) + ": cannot parse number '" + tok + "'");
    }
}

inline void register_node(CircuitGraph& g, const std::string& name) {
    if (g.is_ground(name)) return;
    if (g.node_index(name) < 0) g.nodes.push_back(name);
}

} // namespace detail

/// Parse the text netlist format described at the top of this header.
inline CircuitGraph parse_netlist(const std::string& text) {
    CircuitGraph g;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    bool ground_seen = false;

    auto note_node = [&](const std::string& n) {
        if (g.is_ground(n))
            ground_seen = true;
        else
            detail::register_node(g, n);
    };

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        std::istringstream ls(line);
        std::vector<std::string> tok;
        std::string t;
        while (ls >> t) tok.push_back(t);

        const std::string kind = detail::upper(tok[0]);

        if (kind == "FLUX") {
            if (tok.size() != 3)
                throw Error(ErrorCode::UnknownElementKind,
                            "line " + std::to_string(line_no) + ": FLUX tag value");
            g.external_fluxes[tok[1]] = detail::parse_plain_number(tok[2], line_no);
            continue;
        }
        if (kind == "MUT") {
            if (tok.size() != 5)
                throw Error(ErrorCode::UnknownElementKind,
                            "line " + std::to_string(line_no) + ": MUT id br_a br_b value_nH");
            Coupling c;
            c.id = tok[1];
            c.kind = CouplingKind::mutual_inductance;
            c.branch_a = tok[2];
            c.branch_b = tok[3];
            c.mutual_nh = detail::parse_plain_number(tok[4], line_no);
            c.line = line_no;
            g.couplings.push_back(c);
            continue;
        }
        if (kind == "GYR") {
            if (tok.size() != 7)
                throw Error(ErrorCode::UnknownElementKind,
                            "line " + std::to_string(line_no) + ": GYR id n1+ n1- n2+ n2- value_S");
            Coupling c;
            c.id = tok[1];
            c.kind = CouplingKind::gyrator;
            c.p1_plus = tok[2];
            c.p1_minus = tok[3];
            c.p2_plus = tok[4];
            c.p2_minus = tok[5];
            c.conductance_s = detail::parse_plain_number(tok[6], line_no);
            c.line = line_no;
            for (const auto& n : {c.p1_plus, c.p1_minus, c.p2_plus, c.p2_minus}) note_node(n);
            g.couplings.push_back(c);
            continue;
        }

        BranchKind bk;
        if (kind == "C" || kind == "CAP") bk = BranchKind::capacitor;
        else if (kind == "L" || kind == "IND") bk = BranchKind::inductor;
        else if (kind == "J" || kind == "JJ") bk = BranchKind::josephson;
        else if (kind == "V" || kind == "VSRC") bk = BranchKind::voltage_source;
        else if (kind == "I" || kind == "ISRC") bk = BranchKind::current_source;
        else if (kind == "R" || kind == "RES") bk = BranchKind::resistor;
        else
            throw Error(ErrorCode::UnknownElementKind,
                        "line " + std::to_string(line_no) + ": unknown element kind '" + tok[0] + "'");

        if (tok.size() < 5)
            throw Error(ErrorCode::UnknownElementKind,
                        "line " + std::to_string(line_no) + ": expected KIND id node+ node- value");

        Branch b;
        b.id = tok[1];
        b.kind = bk;
        // The arrow leaves the - node and points into the + node, so that
        // the branch flux is phi(node+) - phi(node-).
        b.finish = tok[2];
        b.start = tok[3];
        b.value = detail::parse_value(tok[4], bk, line_no);
        b.line = line_no;
        for (std::size_t i = 5; i < tok.size(); ++i) {
            if (tok[i].rfind("flux=", 0) == 0)
                b.flux_tag = tok[i].substr(5);
            else
                throw Error(ErrorCode::UnknownElementKind,
                            "line " + std::to_string(line_no) + ": unexpected token '" + tok[i] + "'");
        }

        if (b.start == b.finish)
            throw Error(ErrorCode::DanglingNode,
                        "line " + std::to_string(line_no) + ": branch '" + b.id +
                            "' connects node '" + b.start + "' to itself");
        const bool needs_positive = bk == BranchKind::capacitor || bk == BranchKind::inductor ||
                                    bk == BranchKind::josephson || bk == BranchKind::resistor;
        if (needs_positive && !(b.value > 0.0))
            throw Error(ErrorCode::NonPositiveValue,
                        "line " + std::to_string(line_no) + ": " + branch_kind_name(bk) + " '" +
                            b.id + "' must have a positive value");

        note_node(b.start);
        note_node(b.finish);
        g.branches.push_back(b);
    }

    if (!ground_seen)
        throw Error(ErrorCode::MissingGround, "no branch touches the ground node '0'");

    // Couplings may reference branches declared later, so resolve last.
    for (const auto& c : g.couplings) {
        if (c.kind != CouplingKind::mutual_inductance) continue;
        for (const auto& id : {c.branch_a, c.branch_b}) {
            const Branch* b = g.find_branch(id);
            if (!b)
                throw Error(ErrorCode::DanglingNode, "line " + std::to_string(c.line) +
                                                         ": mutual '" + c.id +
                                                         "' references unknown branch '" + id + "'");
        }
    }
    return g;
}

/// Serialize back to the text format; parse(serialize(g)) == g.
inline std::string serialize_netlist(const CircuitGraph& g) {
    std::ostringstream out;
    out.precision(17);
    for (const auto& b : g.branches) {
        const char* kind = nullptr;
        const char* unit = nullptr;
        switch (b.kind) {
            case BranchKind::capacitor: kind = "C"; unit = "fF"; break;
            case BranchKind::inductor: kind = "L"; unit = "nH"; break;
            case BranchKind::josephson: kind = "J"; unit = "GHz"; break;
            case BranchKind::voltage_source: kind = "V"; unit = "V"; break;
            case BranchKind::current_source: kind = "I"; unit = "A"; break;
            case BranchKind::resistor: kind = "R"; unit = "Ohm"; break;
        }
        out << kind << " " << b.id << " " << b.finish << " " << b.start << " " << b.value << unit;
        if (b.flux_tag) out << " flux=" << *b.flux_tag;
        out << "\n";
    }
    for (const auto& c : g.couplings) {
        if (c.kind == CouplingKind::mutual_inductance)
            out << "MUT " << c.id << " " << c.branch_a << " " << c.branch_b << " " << c.mutual_nh
                << "\n";
        else
            out << "GYR " << c.id << " " << c.p1_plus << " " << c.p1_minus << " " << c.p2_plus
                << " " << c.p2_minus << " " << c.conductance_s << "\n";
    }
    for (const auto& [tag, value] : g.external_fluxes) out << "FLUX " << tag << " " << value << "\n";
    return out.str();
}

/// JSON mirror of the netlist schema (.qcj files).
inline CircuitGraph parse_netlist_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::IOFailure, std::string("bad JSON netlist: ") + e.what());
    }
    std::ostringstream lines;
    for (const auto& b : j.value("branches", nlohmann::json::array())) {
        lines << b.value("kind", "?") << " " << b.value("id", "?") << " "
              << b.value("plus", "?") << " " << b.value("minus", "?") << " "
              << b.value("value", 0.0) << b.value("unit", "");
        if (b.contains("flux")) lines << " flux=" << b["flux"].get<std::string>();
        lines << "\n";
    }
    for (const auto& c : j.value("couplings", nlohmann::json::array())) {
        const std::string kind = c.value("kind", "?");
        if (kind == "MUT")
            lines << "MUT " << c.value("id", "?") << " " << c.value("branch_a", "?") << " "
                  << c.value("branch_b", "?") << " " << c.value("value_nH", 0.0) << "\n";
        else if (kind == "GYR")
            lines << "GYR " << c.value("id", "?") << " " << c.value("p1_plus", "?") << " "
                  << c.value("p1_minus", "?") << " " << c.value("p2_plus", "?") << " "
                  << c.value("p2_minus", "?") << " " << c.value("value_S", 0.0) << "\n";
        else
            throw Error(ErrorCode::UnknownElementKind, "unknown coupling kind '" + kind + "'");
    }
    for (const auto& [tag, value] : j.value("fluxes", nlohmann::json::object()).items())
        lines << "FLUX " << tag << " " << value.get<double>() << "\n";
    return parse_netlist(lines.str());
}

inline CircuitGraph CircuitGraph::reground(const std::string& new_ground) const {
    if (is_ground(new_ground)) return *this;
    if (node_index(new_ground) < 0)
        throw Error(ErrorCode::DanglingNode, "cannot reground to unknown node '" + new_ground + "'");
    // Swap names: new ground becomes "0", old ground gets a fresh name.
    const std::string old_ground_name = "was_ground";
    auto rename = [&](const std::string& n) -> std::string {
        if (n == new_ground) return ground;
        if (n == ground) return old_ground_name;
        return n;
    };
    CircuitGraph out;
    out.external_fluxes = external_fluxes;
    for (const auto& n : nodes)
        if (n != new_ground) out.nodes.push_back(n);
    out.nodes.push_back(old_ground_name);
    out.branches = branches;
    for (auto& b : out.branches) {
        b.start = rename(b.start);
        b.finish = rename(b.finish);
    }
    out.couplings = couplings;
    for (auto& c : out.couplings) {
        c.p1_plus = rename(c.p1_plus);
        c.p1_minus = rename(c.p1_minus);
        c.p2_plus = rename(c.p2_plus);
        c.p2_minus = rename(c.p2_minus);
    }
    return out;
}

struct ValidationReport {
    std::vector<std::string> diagnostics;
    bool clean() const { return diagnostics.empty(); }
};

/// Report-only sanity checks: isolated subgraphs, zero-valued elements,
/// mutual couplings on non-inductive branches, floating capacitive islands.
inline ValidationReport validate(const CircuitGraph& g) {
    ValidationReport rep;

    for (const auto& b : g.branches)
        if (b.value == 0.0)
            rep.diagnostics.push_back("branch '" + b.id + "' has zero value");

    for (const auto& c : g.couplings) {
        if (c.kind != CouplingKind::mutual_inductance) continue;
        for (const auto& id : {c.branch_a, c.branch_b}) {
            const Branch* b = g.find_branch(id);
            if (b && b->kind != BranchKind::inductor)
                rep.diagnostics.push_back("mutual '" + c.id + "' references non-inductive branch '" +
                                          id + "'");
        }
        if (c.branch_a == c.branch_b)
            rep.diagnostics.push_back("mutual '" + c.id + "' couples a branch to itself");
        const Branch* a = g.find_branch(c.branch_a);
        const Branch* b = g.find_branch(c.branch_b);
        if (a && b && a->kind == BranchKind::inductor && b->kind == BranchKind::inductor) {
            const double k = c.mutual_nh / std::sqrt(a->value * b->value);
            if (!(std::abs(k) < 1.0))
                rep.diagnostics.push_back("mutual '" + c.id + "' has |k| >= 1");
        }
    }

    // Connectivity over all branches (gyrators do not connect their ports).
    auto component_of = [&](auto&& adjacent) {
        std::map<std::string, int> comp;
        int next = 0;
        auto all_nodes = g.nodes;
        all_nodes.push_back(CircuitGraph::ground);
        for (const auto& seed : all_nodes) {
            if (comp.count(seed)) continue;
            std::vector<std::string> stack{seed};
            comp[seed] = next;
            while (!stack.empty()) {
                auto n = stack.back();
                stack.pop_back();
                for (const auto& m : adjacent(n))
                    if (!comp.count(m)) {
                        comp[m] = next;
                        stack.push_back(m);
                    }
            }
            ++next;
        }
        return std::pair{comp, next};
    };

    auto adj_all = [&](const std::string& n) {
        std::vector<std::string> out;
        for (const auto& b : g.branches) {
            if (b.start == n) out.push_back(b.finish);
            if (b.finish == n) out.push_back(b.start);
        }
        return out;
    };
    auto [comp_all, n_comp_all] = component_of(adj_all);
    if (n_comp_all > 1)
        rep.diagnostics.push_back("circuit graph has " + std::to_string(n_comp_all) +
                                  " disconnected components");

    // Capacitive connectivity: a component of the capacitive subgraph not
    // containing ground is a freely floating island.
    auto adj_cap = [&](const std::string& n) {
        std::vector<std::string> out;
        for (const auto& b : g.branches) {
            if (b.kind != BranchKind::capacitor) continue;
            if (b.start == n) out.push_back(b.finish);
            if (b.finish == n) out.push_back(b.start);
        }
        return out;
    };
    auto [comp_cap, n_comp_cap] = component_of(adj_cap);
    {
        const int ground_comp = comp_cap[CircuitGraph::ground];
        std::map<int, int> size;
        for (const auto& [node, c] : comp_cap) ++size[c];
        std::set<int> floating;
        for (const auto& [c, sz] : size)
            if (c != ground_comp && sz >= 2) floating.insert(c); // holds a capacitive branch
        if (!floating.empty())
            rep.diagnostics.push_back("freely floating subgraph: " +
                                      std::to_string(floating.size()) +
                                      " capacitive component(s) not connected to ground");
    }

    return rep;
}

} // namespace qcirc
