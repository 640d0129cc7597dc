#ifndef UNSEMI_IO_HPP
#define UNSEMI_IO_HPP

#include "gadget.hpp"
#include "lift.hpp"
#include "parser.hpp"
#include "verify.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace unsemi {

using Json = nlohmann::ordered_json;

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- polynomial ----

inline Json poly_terms_json(const Polynomial& p) {
    Json terms = Json::array();
    for (const auto& [m, c] : p.terms()) {
        Json t;
        t["coeff"] = to_string(c);
        t["exps"] = m;
        terms.push_back(std::move(t));
    }
    return terms;
}

inline Polynomial poly_from_terms(const std::vector<std::string>& vars, const Json& terms) {
    Polynomial p(vars);
    for (const auto& t : terms) {
        Monomial m = t.at("exps").get<Monomial>();
        p.add_term(m, parse_rational(t.at("coeff").get<std::string>()));
    }
    return p;
}

// ---- witness tree ----

inline Json witness_json(const WitnessNode& w) {
    Json j;
    switch (w.kind) {
        case WitnessNode::Kind::Eq:
            j["kind"] = "eq";
            j["poly"] = w.poly.to_string();
            break;
        case WitnessNode::Kind::Ge:
        case WitnessNode::Kind::Gt:
        case WitnessNode::Kind::Ne:
            j["kind"] = w.kind == WitnessNode::Kind::Ge ? "ge"
                       : w.kind == WitnessNode::Kind::Gt ? "gt" : "ne";
            j["slot"] = w.slot;
            j["poly"] = w.poly.to_string();
            break;
        case WitnessNode::Kind::Fixed:
            j["kind"] = "fixed";
            j["slot"] = w.slot;
            j["value"] = to_string(w.value);
            break;
        case WitnessNode::Kind::And:
            j["kind"] = "and";
            j["children"] = {witness_json(*w.children[0]), witness_json(*w.children[1])};
            break;
        case WitnessNode::Kind::Or: {
            j["kind"] = "or";
            j["children"] = {witness_json(*w.children[0]), witness_json(*w.children[1])};
            Json br = Json::array();
            for (const auto& f : w.branches) br.push_back(print_formula(*f));
            j["branches"] = std::move(br);
            break;
        }
        case WitnessNode::Kind::Bridge: {
            j["kind"] = "bridge";
            j["slot"] = w.slot;
            Json mat = Json::array();
            for (const auto& row : w.affine->matrix()) {
                Json r = Json::array();
                for (const auto& e : row) r.push_back(to_string(e));
                mat.push_back(std::move(r));
            }
            j["matrix"] = std::move(mat);
            Json off = Json::array();
            for (const auto& e : w.affine->offset()) off.push_back(to_string(e));
            j["offset"] = std::move(off);
            j["child"] = witness_json(*w.children[0]);
            break;
        }
    }
    return j;
}

inline WitnessPtr witness_from_json(const Json& j, const std::vector<std::string>& base_vars) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "eq")
        return WitnessNode::eq_leaf(parse_polynomial(j.at("poly").get<std::string>(), base_vars));
    if (kind == "ge" || kind == "gt" || kind == "ne") {
        Polynomial p = parse_polynomial(j.at("poly").get<std::string>(), base_vars);
        int slot = j.at("slot").get<int>();
        if (kind == "ge") return WitnessNode::ge_leaf(slot, std::move(p));
        if (kind == "gt") return WitnessNode::gt_leaf(slot, std::move(p));
        return WitnessNode::ne_leaf(slot, std::move(p));
    }
    if (kind == "fixed")
        return WitnessNode::fixed_leaf(j.at("slot").get<int>(),
                                       parse_rational(j.at("value").get<std::string>()));
    if (kind == "and")
        return WitnessNode::and_node(witness_from_json(j.at("children")[0], base_vars),
                                     witness_from_json(j.at("children")[1], base_vars));
    if (kind == "or") {
        auto fa = extend_formula(*parse_formula(j.at("branches")[0].get<std::string>()), base_vars);
        auto fb = extend_formula(*parse_formula(j.at("branches")[1].get<std::string>()), base_vars);
        return WitnessNode::or_node(witness_from_json(j.at("children")[0], base_vars), fa,
                                    witness_from_json(j.at("children")[1], base_vars), fb);
    }
    if (kind == "bridge") {
        std::vector<std::vector<Rational>> mat;
        for (const auto& row : j.at("matrix")) {
            std::vector<Rational> r;
            for (const auto& e : row) r.push_back(parse_rational(e.get<std::string>()));
            mat.push_back(std::move(r));
        }
        std::vector<Rational> off;
        for (const auto& e : j.at("offset")) off.push_back(parse_rational(e.get<std::string>()));
        auto A = std::make_shared<AffineMap>(std::move(mat), std::move(off));
        return WitnessNode::bridge_node(witness_from_json(j.at("child"), base_vars), A,
                                        j.at("slot").get<int>());
    }
    throw std::invalid_argument("unknown witness node kind '" + kind + "'");
}

// ---- lift ----

inline Json lift_json(const Lift& L) {
    Json j;
    j["base_dim"] = L.base_dim;
    j["aux_dim"] = L.aux_dim;
    j["var_names"] = L.P.vars();
    j["terms"] = poly_terms_json(L.P);
    j["source_text"] = L.source_text;
    j["witness_tree"] = L.witness ? witness_json(*L.witness) : Json(nullptr);
    return j;
}

inline Lift lift_from_json(const Json& j) {
    Lift L;
    L.base_dim = j.at("base_dim").get<std::size_t>();
    L.aux_dim = j.at("aux_dim").get<std::size_t>();
    std::vector<std::string> vars = j.at("var_names").get<std::vector<std::string>>();
    if (vars.size() != L.base_dim + L.aux_dim)
        throw std::invalid_argument("lift file: var_names length inconsistent with dims");
    L.P = poly_from_terms(vars, j.at("terms"));
    L.source_text = j.value("source_text", std::string{});
    std::vector<std::string> base(vars.begin(), vars.begin() + static_cast<std::ptrdiff_t>(L.base_dim));
    if (!L.source_text.empty()) L.source = extend_formula(*parse_formula(L.source_text), base);
    if (j.contains("witness_tree") && !j.at("witness_tree").is_null())
        L.witness = witness_from_json(j.at("witness_tree"), base);
    return L;
}

// ---- witness pairs ----

inline std::vector<Rational> rationals_from_json(const Json& a) {
    std::vector<Rational> v;
    for (const auto& e : a) v.push_back(parse_rational(e.get<std::string>()));
    return v;
}

inline Json rationals_json(const std::vector<Rational>& v) {
    Json a = Json::array();
    for (const auto& e : v) a.push_back(to_string(e));
    return a;
}

inline std::vector<WitnessPair> pairs_from_json(const Json& j) {
    std::vector<WitnessPair> out;
    for (const auto& p : j.at("pairs")) {
        WitnessPair w;
        w.x = rationals_from_json(p.at("x"));
        w.y1 = rationals_from_json(p.at("y1"));
        w.y2 = rationals_from_json(p.at("y2"));
        out.push_back(std::move(w));
    }
    return out;
}

inline Json pairs_json(const std::vector<WitnessPair>& pairs) {
    Json arr = Json::array();
    for (const auto& w : pairs) {
        Json p;
        p["x"] = rationals_json(w.x);
        p["y1"] = rationals_json(w.y1);
        p["y2"] = rationals_json(w.y2);
        arr.push_back(std::move(p));
    }
    Json j;
    j["pairs"] = std::move(arr);
    return j;
}

// ---- files ----

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Atomic write: temp file in the target directory, then rename.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

} // namespace unsemi

#endif // UNSEMI_IO_HPP
