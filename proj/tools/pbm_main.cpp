// pbm: Maslov indices, lifted Poincare maps, circle/annulus degrees, and
// periodic-solution certificates for planar Hamiltonian systems.
//
// Subcommands: index, poincare, degree, find, certify, portrait, catalog.
// Systems are given as catalog entries, Hamiltonian expressions H(t,x,y), or
// second-order coefficients q(t,x); see the README for the config schema.

#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pbm/catalog.hpp"
#include "pbm/certify.hpp"
#include "pbm/degree.hpp"
#include "pbm/expr.hpp"
#include "pbm/lifted_flow.hpp"
#include "pbm/linear_flow.hpp"
#include "pbm/parallel.hpp"
#include "pbm/portrait.hpp"
#include "pbm/second_order.hpp"

using nlohmann::json;
using namespace pbm;

namespace {

const std::vector<std::string> kVarsTXY{"t", "x", "y"};
const std::vector<std::string> kVarsT{"t"};
const std::vector<std::string> kVarsTX{"t", "x"};

struct SystemSpec {
    PlanarHamiltonianSystem system;
    std::optional<LinearSystem> linear;
    const CatalogEntry* entry = nullptr;  // when taken from the catalog
    std::optional<SecondOrderPayload> second_order;
};

PeriodicScalar scalar_of_t(const std::string& src) {
    auto e = std::make_shared<expr::Expression>(expr::Expression::parse(src, kVarsT));
    return [e](double t) { return e->eval({t}); };
}

PeriodicMatrixFunction matrix_from_json(const json& j, double T) {
    if (j.contains("hill")) {
        PeriodicScalar a = scalar_of_t(j.at("hill").get<std::string>());
        return {[a](double t) { return Mat2::diag(a(t), 1.0); }, T};
    }
    if (j.contains("matrix")) {
        const auto& m = j.at("matrix");
        if (!m.is_array() || m.size() != 4)
            throw Error(ErrorClass::config, "linearization matrix must be [a11,a12,a21,a22]");
        std::array<PeriodicScalar, 4> es;
        for (int k = 0; k < 4; ++k) es[k] = scalar_of_t(m[k].get<std::string>());
        return {[es](double t) {
                    return Mat2{es[0](t), es[1](t), es[2](t), es[3](t)};
                },
                T};
    }
    throw Error(ErrorClass::config, "linearization block needs 'hill' or 'matrix'");
}

// Hamiltonian system from an H(t, x, y) expression; the gradient is exact
// (symbolic differentiation of the parsed tree).
PlanarHamiltonianSystem hamiltonian_from_expression(const std::string& src, double T) {
    expr::Expression H = expr::Expression::parse(src, kVarsTXY);
    auto hx = std::make_shared<expr::Expression>(H.derivative(1));
    auto hy = std::make_shared<expr::Expression>(H.derivative(2));
    PlanarHamiltonianSystem sys;
    sys.period = T;
    sys.grad_H = [hx, hy](double t, Vec2 z) {
        return Vec2{hx->eval({t, z.x, z.y}), hy->eval({t, z.x, z.y})};
    };
    return sys;
}

ScalarCoefficient coefficient_from_expression(const std::string& src, double T) {
    auto q = std::make_shared<expr::Expression>(expr::Expression::parse(src, kVarsTX));
    ScalarCoefficient out;
    out.period = T;
    out.q = [q](double t, double x) { return q->eval({t, x}); };
    return out;
}

SystemSpec resolve_system(const json& cfg) {
    SystemSpec spec;
    std::string kind = cfg.value("kind", cfg.contains("catalog") ? "catalog" : "");
    if (kind.empty()) throw Error(ErrorClass::config, "config: missing 'kind'");

    if (kind == "catalog") {
        std::string name = cfg.contains("catalog") ? cfg.at("catalog").get<std::string>()
                                                   : cfg.at("name").get<std::string>();
        spec.entry = &catalog_entry(name);
        spec.system = spec.entry->system;
        spec.linear = spec.entry->linear;
        spec.second_order = spec.entry->second_order;
        return spec;
    }

    double T = cfg.value("period", 0.0);
    if (!(T > 0.0)) throw Error(ErrorClass::config, "config: 'period' must be positive");

    if (kind == "hamiltonian-expression" || kind == "hamiltonian") {
        spec.system = hamiltonian_from_expression(cfg.at("H").get<std::string>(), T);
    } else if (kind == "second-order-expression" || kind == "second-order") {
        ScalarCoefficient q = coefficient_from_expression(cfg.at("q").get<std::string>(), T);
        spec.system = to_planar(q);
        SecondOrderPayload so;
        so.q = q;
        spec.second_order = so;
        if (cfg.contains("sandwich_zero")) {
            const json& s = cfg.at("sandwich_zero");
            so.a_lo = s.at("lower").get<double>();
            so.a_hi = s.at("upper").get<double>();
            so.r0_bar = s.at("radius").get<double>();
            spec.second_order = so;
        }
        if (cfg.contains("sandwich_infinity")) {
            const json& s = cfg.at("sandwich_infinity");
            so.b_lo = s.at("lower").get<double>();
            so.b_hi = s.at("upper").get<double>();
            so.rinf_bar = s.at("radius").get<double>();
            spec.second_order = so;
        }
    } else if (kind == "linear-hill") {
        PeriodicScalar a = scalar_of_t(cfg.at("a").get<std::string>());
        spec.linear = hill_system(a, T);
        spec.system = spec.linear->as_hamiltonian();
    } else if (kind == "linear-matrix") {
        PeriodicMatrixFunction L = matrix_from_json(cfg, T);
        spec.linear = LinearSystem{L, T};
        spec.system = spec.linear->as_hamiltonian();
    } else {
        throw Error(ErrorClass::config, "config: unknown kind '" + kind + "'");
    }

    if (cfg.contains("linearization_zero"))
        spec.system.linearization_at_zero = matrix_from_json(cfg.at("linearization_zero"), T);
    if (cfg.contains("linearization_infinity"))
        spec.system.linearization_at_infinity =
            matrix_from_json(cfg.at("linearization_infinity"), T);
    return spec;
}

LinearSystem require_linear(const SystemSpec& spec) {
    if (spec.linear) return *spec.linear;
    if (spec.system.linearization_at_zero)
        return {*spec.system.linearization_at_zero, spec.system.period};
    throw Error(ErrorClass::config, "this command needs a linear system "
                                    "(catalog linear entry, linear-hill, or linear-matrix)");
}

void write_output(const std::string& out_path, const std::string& payload) {
    if (out_path.empty()) {
        std::fwrite(payload.data(), 1, payload.size(), stdout);
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw Error(ErrorClass::config, "cannot open output file " + out_path);
    f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

json index_to_json(const MaslovIndex& m) {
    return json{{"index", m.index}, {"nullity", m.nullity}};
}

json certificate_to_json(const Certificate& c) {
    json j;
    j["i0"] = index_to_json(c.i0);
    j["i_infty"] = index_to_json(c.i_infty);
    j["guaranteed_count"] = c.guaranteed_count;
    j["found_count"] = c.found.size();
    j["valid"] = c.valid;
    if (!c.diagnostic.empty()) j["diagnostic"] = c.diagnostic;
    j["twist_radii"] = json{{"r0", c.radii.r0}, {"r_infty", c.radii.r_infty}};
    if (c.truncation_radius > 0.0) {
        j["truncation_radius"] = c.truncation_radius;
        j["escalations"] = c.escalations;
    }
    json cases = json::array();
    for (const auto& oc : c.case_breakdown) {
        json cj{{"case", std::string(1, oc.label)}, {"shift", oc.shift_M},
                {"winding", oc.winding},           {"required", oc.required},
                {"found", oc.found}};
        if (oc.label != 'a') cj["annulus_degree"] = oc.annulus_deg;
        if (!oc.note.empty()) cj["note"] = oc.note;
        cases.push_back(cj);
    }
    j["cases"] = cases;
    json sols = json::array();
    for (const auto& s : c.found) {
        Vec2 z = project(s.initial.phi, s.initial.r);
        sols.push_back(json{{"phi", s.initial.phi},
                            {"r", s.initial.r},
                            {"x", z.x},
                            {"y", z.y},
                            {"winding", s.winding},
                            {"residual", s.residual}});
    }
    j["solutions"] = sols;
    return j;
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// The linear-like pipeline applies when sandwich data is present.
bool has_sandwich(const SecondOrderPayload& so) {
    return so.a_lo < so.a_hi && so.b_lo < so.b_hi;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Maslov indices, lifted Poincare maps, annulus degrees and "
                 "periodic-solution certificates for planar Hamiltonian systems"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    std::string config_path, out_path, catalog_name, hamiltonian_src, q_src, hill_src;
    double period = 0.0, tol = 0.0;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON configuration file");
    app.add_option("--out", out_path, "output path (default: stdout)");
    app.add_option("--seed", seed, "rng seed recorded in reports");
    app.add_option("--tol", tol, "override of the residual tolerance");
    app.add_option("--catalog", catalog_name, "built-in system name");
    app.add_option("--hamiltonian", hamiltonian_src, "H(t,x,y) expression");
    app.add_option("--second-order", q_src, "q(t,x) expression");
    app.add_option("--hill", hill_src, "a(t) expression for a linear Hill system");
    app.add_option("--period", period, "period T")->check(CLI::PositiveNumber);

    auto* cmd_index = app.add_subcommand("index", "Maslov index and nullity of a linear system");

    auto* cmd_poincare =
        app.add_subcommand("poincare", "CSV table of phi, F1, F2 over a phi grid");
    double poi_radius = 1.0;
    int poi_grid = 64;
    cmd_poincare->add_option("--radius", poi_radius, "radius of the scanned circle");
    cmd_poincare->add_option("--grid", poi_grid, "number of grid angles");

    auto* cmd_degree = app.add_subcommand("degree", "degree D(F + (2 M pi, 0), r)");
    double deg_radius = 1.0;
    long deg_shift = 0;
    cmd_degree->add_option("--radius", deg_radius, "circle radius");
    cmd_degree->add_option("--shift", deg_shift, "shift M");

    auto* cmd_find = app.add_subcommand("find", "zeros of F + (2 M pi, 0) in an annulus");
    double find_r1 = 0.5, find_r2 = 2.0;
    long find_shift = 0;
    std::size_t find_budget = 1'000'000;
    cmd_find->add_option("--shift", find_shift, "shift M");
    cmd_find->add_option("--r1", find_r1, "inner radius");
    cmd_find->add_option("--r2", find_r2, "outer radius");
    cmd_find->add_option("--budget", find_budget, "field evaluation budget");

    auto* cmd_certify = app.add_subcommand("certify", "full certificate (theorem pipeline)");

    auto* cmd_portrait = app.add_subcommand("portrait", "SVG phase portrait");
    PortraitOptions popt;
    cmd_portrait->add_option("--x-min", popt.x_min);
    cmd_portrait->add_option("--x-max", popt.x_max);
    cmd_portrait->add_option("--y-min", popt.y_min);
    cmd_portrait->add_option("--y-max", popt.y_max);
    cmd_portrait->add_option("--seeds", popt.seeds_per_axis, "seeds per axis");
    cmd_portrait->add_option("--span", popt.t_span, "integration time per trajectory");

    auto* cmd_catalog = app.add_subcommand("catalog", "list built-in systems");
    bool catalog_verify = false;
    cmd_catalog->add_flag("--verify", catalog_verify, "re-validate the stored metadata");

    CLI11_PARSE(app, argc, argv);

    json cfg = json::object();
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw Error(ErrorClass::config, "cannot read config " + config_path);
        try {
            f >> cfg;
        } catch (const json::exception& e) {
            throw Error(ErrorClass::config, std::string("config JSON: ") + e.what());
        }
    }
    if (!catalog_name.empty()) {
        cfg["kind"] = "catalog";
        cfg["catalog"] = catalog_name;
    }
    if (!hamiltonian_src.empty()) {
        cfg["kind"] = "hamiltonian-expression";
        cfg["H"] = hamiltonian_src;
    }
    if (!q_src.empty()) {
        cfg["kind"] = "second-order-expression";
        cfg["q"] = q_src;
    }
    if (!hill_src.empty()) {
        cfg["kind"] = "linear-hill";
        cfg["a"] = hill_src;
    }
    if (period > 0.0) cfg["period"] = period;
    if (out_path.empty()) out_path = cfg.value("out", "");
    if (cfg.contains("seed") && seed == 0) seed = cfg["seed"].get<std::uint64_t>();

    if (cmd_catalog->parsed()) {
        json out = json::array();
        bool all_ok = true;
        for (const auto& e : catalog()) {
            json je{{"name", e.name},
                    {"description", e.description},
                    {"i0", e.meta.i0},
                    {"i_infty", e.meta.i_infty},
                    {"solution_count", e.meta.solution_count},
                    {"period", e.system.period},
                    {"kind", e.linear ? "linear" : (e.second_order ? "second-order" : "planar")},
                    {"certifiable", e.certifiable}};
            json marks = json::array();
            for (const auto& m : e.meta.known_solutions)
                marks.push_back(
                    json{{"label", m.label}, {"x", m.position.x}, {"y", m.position.y}});
            je["known_solutions"] = marks;
            if (catalog_verify) {
                CatalogValidation v = validate_entry(e);
                je["verified"] = v.passed;
                if (!v.passed) {
                    je["verify_detail"] = v.detail;
                    all_ok = false;
                }
            }
            out.push_back(je);
        }
        write_output(out_path, out.dump(2) + "\n");
        if (catalog_verify && !all_ok)
            throw Error(ErrorClass::invalid_result, "catalog verification failed");
        return 0;
    }

    SystemSpec spec = resolve_system(cfg);

    if (cmd_index->parsed()) {
        LinearSystem lin = require_linear(spec);
        LinearPoincareData d = linear_poincare_data(lin);
        write_output(out_path, index_to_json(d.index).dump() + "\n");
        return 0;
    }

    if (cmd_poincare->parsed()) {
        std::string csv = "phi,F1,F2\n";
        std::vector<LiftedPoincareRecord> rows(static_cast<std::size_t>(poi_grid));
        parallel_for(rows.size(), [&](std::size_t i) {
            double phi = kTwoPi * static_cast<double>(i) / poi_grid;
            rows[i] = poincare_T(spec.system, {phi, poi_radius});
        });
        for (const auto& rec : rows)
            csv += csv_number(rec.phi0) + "," + csv_number(rec.F1) + "," + csv_number(rec.F2) +
                   "\n";
        write_output(out_path, csv);
        return 0;
    }

    if (cmd_degree->parsed()) {
        long d = spec.linear
                     ? degree_shifted(linear_poincare_data(*spec.linear), deg_shift, deg_radius)
                     : degree_shifted(spec.system, deg_shift, deg_radius);
        json out{{"degree", d}, {"shift", deg_shift}, {"radius", deg_radius}};
        write_output(out_path, out.dump() + "\n");
        return 0;
    }

    if (cmd_find->parsed()) {
        LocateOptions lopt;
        if (tol > 0.0) lopt.tol_res = tol;
        LocateResult res =
            locate_zeros(spec.system, find_shift, find_r1, find_r2, find_budget, lopt);
        json zeros = json::array();
        for (const auto& z : res.zeros) {
            Vec2 p = project(z.location.phi, z.location.r);
            zeros.push_back(json{{"phi", z.location.phi},
                                 {"r", z.location.r},
                                 {"x", p.x},
                                 {"y", p.y},
                                 {"winding", z.winding_verified},
                                 {"residual", z.residual},
                                 {"method", z.history.method}});
        }
        json cand = json::array();
        for (const auto& u : res.unresolved)
            cand.push_back(json{{"phi_lo", u.phi_lo},
                                {"phi_hi", u.phi_hi},
                                {"r_lo", u.r_lo},
                                {"r_hi", u.r_hi}});
        json out{{"shift", find_shift},
                 {"zeros", zeros},
                 {"candidate_regions", cand},
                 {"field_evaluations", res.field_evals},
                 {"budget_exhausted", res.budget_exhausted}};
        write_output(out_path, out.dump(2) + "\n");
        return res.budget_exhausted ? 3 : 0;
    }

    if (cmd_certify->parsed()) {
        CertifyOptions copt;
        if (tol > 0.0) copt.locate.tol_res = tol;
        Certificate cert;
        if (spec.second_order && has_sandwich(*spec.second_order)) {
            const SecondOrderPayload& so = *spec.second_order;
            SandwichBounds s0 = SandwichBounds::make([&so](double) { return so.a_lo; },
                                                     [&so](double) { return so.a_hi; },
                                                     so.q.period, so.r0_bar);
            SandwichBounds si = SandwichBounds::make([&so](double) { return so.b_lo; },
                                                     [&so](double) { return so.b_hi; },
                                                     so.q.period, so.rinf_bar);
            LinearLikeOptions lopt;
            lopt.certify = copt;
            cert = certify_linear_like(so.q, s0, si, lopt);
        } else {
            cert = certify(spec.system, copt);
        }
        json out = certificate_to_json(cert);
        out["seed"] = seed;
        write_output(out_path, out.dump(2) + "\n");
        return cert.valid ? 0 : 4;
    }

    if (cmd_portrait->parsed()) {
        std::vector<PortraitMark> marks;
        if (spec.entry) {
            for (const auto& m : spec.entry->meta.known_solutions)
                marks.push_back({m.label, m.position});
        }
        write_output(out_path, render_portrait_svg(spec.system, marks, popt));
        return 0;
    }

    throw Error(ErrorClass::config, "no subcommand executed");
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const Error& e) {
        const char* cls = "internal";
        switch (e.cls()) {
            case ErrorClass::config: cls = "config"; break;
            case ErrorClass::numeric_budget: cls = "numeric-budget"; break;
            case ErrorClass::invalid_result: cls = "invalid-result"; break;
            case ErrorClass::internal: cls = "internal"; break;
        }
        json err{{"error", cls}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return static_cast<int>(e.cls());
    } catch (const std::exception& e) {
        json err{{"error", "internal"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 5;
    }
}
