// unsemi: compile semialgebraic descriptions into single-polynomial lifts,
// verify the projection contract numerically, and splice circle bridges.

#include <unsemi/gadget.hpp>
#include <unsemi/io.hpp>
#include <unsemi/lift.hpp>
#include <unsemi/parser.hpp>
#include <unsemi/verify.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace unsemi;

struct CliOptions {
    std::string box_spec;
    std::string aux_box_spec;
    std::optional<std::size_t> grid_res;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::optional<double> delta;
    std::optional<double> tau;
    std::optional<double> eps_boundary;
    std::optional<double> eps_prox;
    std::string config_path;
};

void add_common_flags(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--box", o.box_spec, "base box, lo:hi[,lo:hi...] (default -2:2 per axis)");
    cmd->add_option("--aux-box", o.aux_box_spec, "aux solver box, lo:hi (default -10:10)");
    cmd->add_option("--grid-res", o.grid_res, "grid points per axis");
    cmd->add_option("--samples", o.samples, "solver sample count");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--delta", o.delta, "variety acceptance |P| tolerance");
    cmd->add_option("--tau", o.tau, "float membership boundary band");
    cmd->add_option("--eps-boundary", o.eps_boundary, "classification exclusion band");
    cmd->add_option("--eps-prox", o.eps_prox, "component-graph edge radius");
    cmd->add_option("--config", o.config_path, "JSON config file (flags win)");
}

Interval parse_interval(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("interval must be lo:hi");
    Interval iv{parse_rational(s.substr(0, colon)), parse_rational(s.substr(colon + 1))};
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("degenerate interval " + s);
    return iv;
}

std::vector<Interval> parse_box(const std::string& spec, std::size_t dims) {
    std::vector<Interval> box;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        auto comma = spec.find(',', pos);
        std::string part = spec.substr(pos, comma == std::string::npos ? std::string::npos
                                                                       : comma - pos);
        box.push_back(parse_interval(part));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (box.size() == 1) box.resize(dims, box[0]);
    if (box.size() != dims)
        throw std::invalid_argument("box has " + std::to_string(box.size()) + " intervals, need " +
                                    std::to_string(dims));
    return box;
}

/// Assemble the effective config: defaults, then config file, then flags.
VerifyConfig effective_config(const CliOptions& o, std::size_t base_dim) {
    VerifyConfig cfg;
    std::string box_spec = "-2:2";
    std::string aux_spec = "-10:10";
    if (!o.config_path.empty()) {
        Json j = Json::parse(read_file(o.config_path));
        if (j.contains("box")) box_spec = j["box"].get<std::string>();
        if (j.contains("aux_box")) aux_spec = j["aux_box"].get<std::string>();
        if (j.contains("grid_res")) cfg.grid_res = j["grid_res"].get<std::size_t>();
        if (j.contains("n_samples")) cfg.n_samples = j["n_samples"].get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("delta_variety")) cfg.delta_variety = j["delta_variety"].get<double>();
        if (j.contains("tau_membership")) cfg.tau_membership = j["tau_membership"].get<double>();
        if (j.contains("eps_boundary")) cfg.eps_boundary = j["eps_boundary"].get<double>();
        if (j.contains("eps_proximity")) cfg.eps_proximity = j["eps_proximity"].get<double>();
    }
    if (!o.box_spec.empty()) box_spec = o.box_spec;
    if (!o.aux_box_spec.empty()) aux_spec = o.aux_box_spec;
    if (o.grid_res) cfg.grid_res = *o.grid_res;
    if (o.samples) cfg.n_samples = *o.samples;
    if (o.seed) cfg.seed = *o.seed;
    if (o.delta) cfg.delta_variety = *o.delta;
    if (o.tau) cfg.tau_membership = *o.tau;
    if (o.eps_boundary) cfg.eps_boundary = *o.eps_boundary;
    if (o.eps_prox) cfg.eps_proximity = *o.eps_prox;
    cfg.box = parse_box(box_spec, base_dim);
    cfg.aux_box = parse_interval(aux_spec);
    cfg.check();
    return cfg;
}

Json config_json(const VerifyConfig& cfg) {
    Json j;
    Json box = Json::array();
    for (const auto& iv : cfg.box) box.push_back(to_string(iv.lo) + ":" + to_string(iv.hi));
    j["box"] = std::move(box);
    j["aux_box"] = to_string(cfg.aux_box.lo) + ":" + to_string(cfg.aux_box.hi);
    j["grid_res"] = cfg.grid_res;
    j["n_samples"] = cfg.n_samples;
    j["seed"] = cfg.seed;
    j["delta_variety"] = format_double(cfg.delta_variety);
    j["tau_membership"] = format_double(cfg.tau_membership);
    j["eps_boundary"] = format_double(cfg.eps_boundary);
    j["eps_proximity"] = format_double(cfg.eps_proximity);
    return j;
}

void write_manifest(const std::string& out_path, const std::string& command,
                    const std::vector<std::string>& inputs, const Json& config,
                    std::uint64_t seed) {
    Json m;
    m["command"] = command;
    m["inputs"] = inputs;
    m["output"] = out_path;
    m["config"] = config;
    m["tool_version"] = kVersion;
    m["seed"] = seed;
    write_file_atomic(out_path + ".manifest.json", m.dump(2) + "\n");
}

FormulaPtr load_formula(const std::string& path) { return parse_formula(read_file(path)); }

int cmd_compile(const std::string& formula_path, const std::string& out_path) {
    FormulaPtr f = load_formula(formula_path);
    Lift L = compile(to_nnf(f));
    std::cout << "base_dim " << L.base_dim << "\n"
              << "aux_dim " << L.aux_dim << "\n"
              << "degree " << L.P.degree() << "\n"
              << "terms " << L.P.term_count() << "\n";
    if (!out_path.empty()) {
        write_file_atomic(out_path, lift_json(L).dump(2) + "\n");
        Json cfg;
        write_manifest(out_path, "compile", {formula_path}, cfg, 0);
    }
    return 0;
}

int cmd_verify(const std::string& formula_path, const std::string& lift_path,
               const CliOptions& opts, const std::string& out_path) {
    FormulaPtr f = load_formula(formula_path);
    Lift L = lift_from_json(Json::parse(read_file(lift_path)));
    if (f->base_dim() != L.base_dim) {
        std::cerr << "error: formula dimension " << f->base_dim() << " != lift base dimension "
                  << L.base_dim << "\n";
        return 2;
    }
    VerifyConfig cfg = effective_config(opts, L.base_dim);
    ProjectionReport rep = check_projection(*f, L, cfg);
    std::string text = report_text(rep, cfg);
    if (!out_path.empty()) {
        write_file_atomic(out_path, text);
        write_manifest(out_path, "verify", {formula_path, lift_path}, config_json(cfg), cfg.seed);
    } else {
        std::cout << text;
    }
    return rep.exit_status();
}

int cmd_bridge(const std::string& lift_path, const std::string& pairs_path,
               const CliOptions& opts, const std::string& out_path) {
    Lift L = lift_from_json(Json::parse(read_file(lift_path)));
    auto pairs = pairs_from_json(Json::parse(read_file(pairs_path)));
    VerifyConfig cfg = effective_config(opts, L.base_dim);
    Lift out = L;
    if (!pairs.empty()) {
        try {
            out = reduce_components(L, pairs, cfg.delta_variety);
        } catch (const StalePairError& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        } catch (const PairError& e) {
            std::cerr << "error: invalid witness pair: " << e.what() << "\n";
            return 1;
        }
    }
    auto before = estimate_components(L, cfg);
    auto after = estimate_components(out, cfg);
    std::cout << "aux_dim " << L.aux_dim << " -> " << out.aux_dim << "\n"
              << "components: " << before.count << " -> " << after.count << "\n";
    if (!out_path.empty()) {
        write_file_atomic(out_path, lift_json(out).dump(2) + "\n");
        write_manifest(out_path, "bridge", {lift_path, pairs_path}, config_json(cfg), cfg.seed);
    }
    return 0;
}

int cmd_sample(const std::string& formula_path, const CliOptions& opts,
               const std::string& out_path) {
    FormulaPtr f = load_formula(formula_path);
    VerifyConfig cfg = effective_config(opts, f->base_dim());
    auto pts = sample_formula(*f, cfg);
    std::ostringstream csv;
    for (std::size_t i = 0; i < f->base_dim(); ++i) csv << (i ? "," : "") << "x" << i + 1;
    csv << "\n";
    for (const auto& p : pts) {
        for (std::size_t i = 0; i < p.size(); ++i) csv << (i ? "," : "") << to_string(p[i]);
        csv << "\n";
    }
    if (!out_path.empty()) {
        write_file_atomic(out_path, csv.str());
        write_manifest(out_path, "sample", {formula_path}, config_json(cfg), cfg.seed);
    } else {
        std::cout << csv.str();
    }
    return 0;
}

std::string svg_scatter(const std::vector<std::vector<double>>& grid_pts,
                        const std::vector<std::vector<double>>& sample_pts,
                        const VerifyConfig& cfg, std::size_t m) {
    const double W = 600, H = (m == 2) ? 600 : 160, pad = 20;
    double lo0 = to_double(cfg.box[0].lo), hi0 = to_double(cfg.box[0].hi);
    double lo1 = m == 2 ? to_double(cfg.box[1].lo) : -1, hi1 = m == 2 ? to_double(cfg.box[1].hi) : 1;
    auto px = [&](double x) { return pad + (x - lo0) / (hi0 - lo0) * (W - 2 * pad); };
    auto py = [&](double y) { return H - pad - (y - lo1) / (hi1 - lo1) * (H - 2 * pad); };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& p : grid_pts) {
        double y = m == 2 ? p[1] : 0.25;
        s << "<rect x=\"" << format_double(px(p[0]) - 1.5) << "\" y=\""
          << format_double(py(y) - 1.5)
          << "\" width=\"3\" height=\"3\" fill=\"#2e7d32\" fill-opacity=\"0.6\"/>\n";
    }
    for (const auto& p : sample_pts) {
        double y = m == 2 ? p[1] : -0.25;
        s << "<circle cx=\"" << format_double(px(p[0])) << "\" cy=\"" << format_double(py(y))
          << "\" r=\"1.2\" fill=\"#1565c0\" fill-opacity=\"0.7\"/>\n";
    }
    s << "</svg>\n";
    return s.str();
}

int cmd_plot(const std::string& formula_path, const std::string& lift_path,
             const CliOptions& opts, const std::string& out_path, bool table_only) {
    FormulaPtr f;
    std::optional<Lift> L;
    if (!formula_path.empty()) f = load_formula(formula_path);
    if (!lift_path.empty()) L = lift_from_json(Json::parse(read_file(lift_path)));
    if (!f && L && L->source) f = L->source;
    if (!f && !L) {
        std::cerr << "error: plot needs a formula file and/or a lift file\n";
        return 2;
    }
    std::size_t m = f ? f->base_dim() : L->base_dim;
    if (m > 2 && !table_only) {
        std::cerr << "error: graphics output requires base dimension <= 2; use --table for a "
                     "point table\n";
        return 2;
    }
    VerifyConfig cfg = effective_config(opts, m);

    std::vector<std::vector<double>> grid_pts;
    if (f) {
        for (const auto& p : sample_formula(*f, cfg)) {
            std::vector<double> fp;
            for (const auto& c : p) fp.push_back(to_double(c));
            grid_pts.push_back(std::move(fp));
        }
    }
    std::vector<std::vector<double>> sample_pts;
    if (L) {
        for (const auto& p : sample_variety(*L, cfg))
            sample_pts.emplace_back(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(m));
    }

    std::ostringstream csv;
    for (std::size_t i = 0; i < m; ++i) csv << (i ? "," : "") << "x" << i + 1;
    csv << ",kind\n";
    for (const auto& p : grid_pts) {
        for (std::size_t i = 0; i < m; ++i) csv << (i ? "," : "") << format_double(p[i]);
        csv << ",grid\n";
    }
    for (const auto& p : sample_pts) {
        for (std::size_t i = 0; i < m; ++i) csv << (i ? "," : "") << format_double(p[i]);
        csv << ",sample\n";
    }

    std::vector<std::string> inputs;
    if (!formula_path.empty()) inputs.push_back(formula_path);
    if (!lift_path.empty()) inputs.push_back(lift_path);
    if (table_only) {
        if (out_path.empty()) {
            std::cout << csv.str();
        } else {
            write_file_atomic(out_path, csv.str());
            write_manifest(out_path, "plot", inputs, config_json(cfg), cfg.seed);
        }
        return 0;
    }
    std::string svg = svg_scatter(grid_pts, sample_pts, cfg, m);
    std::string svg_path = out_path.empty() ? "plot.svg" : out_path;
    write_file_atomic(svg_path, svg);
    std::string csv_path = svg_path;
    auto dot = csv_path.rfind('.');
    csv_path = (dot == std::string::npos ? csv_path : csv_path.substr(0, dot)) + ".csv";
    write_file_atomic(csv_path, csv.str());
    write_manifest(svg_path, "plot", inputs, config_json(cfg), cfg.seed);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"unsemi: semialgebraic set -> single-polynomial lift toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string formula_path, lift_path, pairs_path, out_path;
    bool table_only = false;
    CliOptions opts;

    auto* compile_cmd = app.add_subcommand("compile", "compile a formula file into a lift");
    compile_cmd->add_option("formula", formula_path, "formula file")->required();
    compile_cmd->add_option("-o,--output", out_path, "output lift file");

    auto* verify_cmd = app.add_subcommand("verify", "check a lift against a formula");
    verify_cmd->add_option("formula", formula_path, "formula file")->required();
    verify_cmd->add_option("lift", lift_path, "lift file")->required();
    verify_cmd->add_option("-o,--output", out_path, "report file (default stdout)");
    add_common_flags(verify_cmd, opts);

    auto* bridge_cmd = app.add_subcommand("bridge", "splice circle bridges into a lift");
    bridge_cmd->add_option("lift", lift_path, "lift file")->required();
    bridge_cmd->add_option("pairs", pairs_path, "witness-pair file")->required();
    bridge_cmd->add_option("-o,--output", out_path, "output lift file");
    add_common_flags(bridge_cmd, opts);

    auto* sample_cmd = app.add_subcommand("sample", "list in-set grid points");
    sample_cmd->add_option("formula", formula_path, "formula file")->required();
    sample_cmd->add_option("-o,--output", out_path, "CSV output (default stdout)");
    add_common_flags(sample_cmd, opts);

    auto* plot_cmd = app.add_subcommand("plot", "scatter of set membership and lift samples");
    plot_cmd->add_option("--formula", formula_path, "formula file");
    plot_cmd->add_option("--lift", lift_path, "lift file");
    plot_cmd->add_option("-o,--output", out_path, "output SVG (or CSV with --table)");
    plot_cmd->add_flag("--table", table_only, "tabular output only (any dimension)");
    add_common_flags(plot_cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (compile_cmd->parsed()) return cmd_compile(formula_path, out_path);
        if (verify_cmd->parsed()) return cmd_verify(formula_path, lift_path, opts, out_path);
        if (bridge_cmd->parsed()) return cmd_bridge(lift_path, pairs_path, opts, out_path);
        if (sample_cmd->parsed()) return cmd_sample(formula_path, opts, out_path);
        if (plot_cmd->parsed()) return cmd_plot(formula_path, lift_path, opts, out_path, table_only);
    } catch (const unsemi::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
