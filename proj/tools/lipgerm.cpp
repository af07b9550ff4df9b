// lipgerm: command-line front end for polygonal surface germs.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lipgeo/conemaps.hpp"
#include "lipgeo/fuzz.hpp"
#include "lipgeo/germ_io.hpp"
#include "lipgeo/linktopo.hpp"
#include "lipgeo/metric.hpp"
#include "lipgeo/reduce.hpp"
#include "lipgeo/svg.hpp"

using namespace lipgeo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit { Ok = 0, InvalidInput = 2, NotLne = 3, CertificateFailure = 4 };

struct Config {
    std::optional<double> tmax;
    int grid_depth = 15;
    int truncation = 12;
    std::string svg_dir;
    std::optional<double> svg_t;
    unsigned long seed = 1;
    bool json = false;
};

int exit_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::ParseError:
    case ErrorKind::ConeViolation:
    case ErrorKind::DuplicateVertex:
    case ErrorKind::TooFewVertices:
    case ErrorKind::NotSimple:
    case ErrorKind::InvalidT:
    case ErrorKind::CoincidentArcs:
    case ErrorKind::HasOpenComponents:
    case ErrorKind::NonPositiveLeading:
    case ErrorKind::OutsideDomain:
    case ErrorKind::ConeTooNarrow:
    case ErrorKind::NotSynchronizable:
    case ErrorKind::UnboundedFamily:
    case ErrorKind::SouthPole:
        return InvalidInput;
    case ErrorKind::NotLNEInput: return NotLne;
    default: return CertificateFailure;
    }
}

PolygonalGerm load(const Config& cfg, const std::string& path) {
    GridOptions opt;
    opt.depth = cfg.grid_depth;
    opt.t_max = cfg.tmax;
    return read_germ_file(path, opt, Rational(cfg.truncation));
}

void require_lne(const PolygonalGerm& g) {
    auto v = is_lne(g);
    if (v.status == LneStatus::NotLNE) {
        std::string w = v.witness ? " (witness " + v.witness->p.str() + ", " + v.witness->q.str() + ")" : "";
        fail(ErrorKind::NotLNEInput, "germ is not LNE" + w);
    }
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f) fail(ErrorKind::ParseError, "cannot write " + p.string());
    f << text;
}

// Largest grid value at which the plane link is simple, unless the user fixed t.
double snapshot_t(const Config& cfg, const PolygonalGerm& g) {
    if (cfg.svg_t) return *cfg.svg_t;
    for (double t : g.grid()) try {
            plane_link(g, t);
            return t;
        } catch (const Error&) {
        }
    return g.grid().back();
}

std::string suffix(const PolygonalGerm& g, int c) { return g.component_count() > 1 ? "c" + std::to_string(c) + "_" : ""; }

std::string step_name(const std::string& pre, size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "step_%03zu.svg", k);
    return pre + buf;
}

// One snapshot before the first move and one after every move.
std::vector<fs::path> write_snapshots(const Config& cfg, const fs::path& dir, const std::string& pre,
                                      const PolygonalGerm& start, const std::vector<ReductionMove>& moves) {
    fs::create_directories(dir);
    std::vector<fs::path> out;
    double t = snapshot_t(cfg, start);
    PolygonalGerm g = start;
    for (size_t k = 0; k <= moves.size(); ++k) {
        if (k > 0) g = replay(g, {moves[k - 1]});
        std::string title = k == 0 ? "initial germ" : "after move " + std::to_string(k) + ": " +
                                                          std::string(to_string(moves[k - 1].kind));
        auto p = dir / step_name(pre, k);
        write_file(p, render_germ_svg(g, t, title));
        out.push_back(p);
    }
    return out;
}

// ---- subcommands ----------------------------------------------------------------

int cmd_validate(const Config& cfg, const std::string& path) {
    auto g = load(cfg, path);
    size_t verts = 0;
    for (auto& c : g.components()) verts += c.size();
    if (cfg.json) {
        std::cout << json{{"valid", true},
                          {"components", g.component_count()},
                          {"vertices", verts},
                          {"cone_opening", g.cone_opening()},
                          {"t_max", g.t_max()}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "valid: " << g.component_count() << " component(s), " << verts << " vertices, cone opening "
                  << g.cone_opening() << ", t_max " << g.t_max() << "\n";
    }
    return Ok;
}

json lne_json(const LneVerdict& v) {
    json j{{"status", std::string(to_string(v.status))}, {"symbolic_decided", v.symbolic_decided}, {"flat", v.flat}};
    if (v.witness)
        j["witness"] = {{"p", v.witness->p.str()},
                        {"q", v.witness->q.str()},
                        {"outer", to_string(v.witness->outer)},
                        {"inner", to_string(v.witness->inner)}};
    else
        j["witness"] = nullptr;
    json est = json::array();
    for (auto& [t, c] : v.constant_estimates) est.push_back({{"t", t}, {"constant", c}});
    j["constant_estimates"] = est;
    return j;
}

// The report is JSON whether or not --json is given.
int cmd_invariants(const Config&, const PolygonalGerm& g) {
    json comps = json::array();
    auto ex = edge_exponents(g);
    for (size_t c = 0; c < g.component_count(); ++c) {
        json e = json::array();
        for (auto& r : ex[c]) e.push_back(to_string(r));
        json nodes = json::array();
        for (size_t i = 0; i < g.component(c).size(); ++i) nodes.push_back(g.node_of(c, i));
        comps.push_back({{"component", c},
                         {"closed", g.component(c).closed},
                         {"nodes", nodes},
                         {"edge_exponents", e}});
    }
    json table = json::array();
    const auto& N = g.nodes();
    for (size_t i = 0; i < N.size(); ++i)
        for (size_t j = i + 1; j < N.size(); ++j) table.push_back({{"a", i}, {"b", j}, {"tord", tord(N[i], N[j]).str()}});
    json rep{{"components", comps}, {"tord", table}, {"lne", lne_json(is_lne(g))}};
    std::cout << rep.dump(2) << "\n";
    return Ok;
}

int cmd_classify(const Config& cfg, const PolygonalGerm& g) {
    require_lne(g);
    json arr = json::array();
    for (size_t c = 0; c < g.component_count(); ++c) {
        auto r = classify_connected(single_component(g, int(c)));
        if (cfg.json) {
            arr.push_back({{"component", c},
                           {"form", r.form.kind == CanonicalForm::Horn ? "Horn" : "HolderTriangle"},
                           {"exponent", to_string(r.form.exponent)},
                           {"cone", r.form.is_cone()},
                           {"moves", r.trace.moves.size()},
                           {"text", r.form.str()}});
        } else if (g.component_count() == 1) {
            std::cout << r.form.str() << "\n";
        } else {
            std::cout << "component " << c << ": " << r.form.str() << "\n";
        }
    }
    if (cfg.json) std::cout << json{{"components", arr}}.dump(2) << "\n";
    return Ok;
}

int cmd_reduce(const Config& cfg, const PolygonalGerm& g, const std::string& out) {
    require_lne(g);
    for (size_t c = 0; c < g.component_count(); ++c) {
        auto h = single_component(g, int(c));
        auto r = classify_connected(h);
        std::string text = write_trace(r.trace);
        if (out.empty()) {
            if (g.component_count() > 1) std::cout << "# component " << c << "\n";
            std::cout << text;
        } else {
            std::string p = g.component_count() > 1 ? out + ".c" + std::to_string(c) : out;
            write_file(p, text);
            std::cout << (g.component_count() > 1 ? "component " + std::to_string(c) + ": " : "") << r.form.str()
                      << " (" << r.trace.moves.size() << " moves, trace " << p << ")\n";
        }
        if (!cfg.svg_dir.empty()) write_snapshots(cfg, cfg.svg_dir, suffix(g, int(c)), h, r.trace.moves);
    }
    return Ok;
}

int cmd_compare(const Config& cfg, const PolygonalGerm& a, const PolygonalGerm& b) {
    auto v = decide_equivalence(a, b);
    if (cfg.json)
        std::cout << json{{"status", std::string(to_string(v.status))},
                          {"witness", v.witness ? json(*v.witness) : json(nullptr)}}
                         .dump(2)
                  << "\n";
    else
        std::cout << v.str() << "\n";
    return Ok;
}

int cmd_tree(const Config& cfg, const PolygonalGerm& g) {
    auto T = extended_tree(g);
    if (cfg.json) {
        json labels = json::array();
        for (auto& l : T.labels) labels.push_back(to_string(l));
        std::cout << json{{"encoding", canonical_encoding(T)}, {"labels", labels}, {"edges", T.edges}}.dump(2) << "\n";
    } else {
        std::cout << canonical_encoding(T) << "\n";
    }
    return Ok;
}

ArcGerm parse_arc_spec(const std::string& s) {
    // "x=<series>;y=<series>"
    auto semi = s.find(';');
    auto part = [&](std::string p, char var) {
        auto eq = p.find('=');
        auto name = p.substr(0, eq);
        name.erase(std::remove(name.begin(), name.end(), ' '), name.end());
        if (eq == std::string::npos || name != std::string(1, var))
            fail(ErrorKind::ParseError, std::string("map arc needs '") + var + "=...'");
        return parse_series(p.substr(eq + 1));
    };
    if (semi == std::string::npos) fail(ErrorKind::ParseError, "map arc needs 'x=...;y=...'");
    return {part(s.substr(0, semi), 'x'), part(s.substr(semi + 1), 'y')};
}

// Map specs: "translate:x=...;y=...", "dilate:<series>", "isotopy[:M]".
// The isotopy reads the germ's four open components as the chains f, a, b, g from top to bottom.
int cmd_verify_map(const Config& cfg, const PolygonalGerm& g, const std::string& spec, int points) {
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon), arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    LipschitzOptions lo;
    lo.seed = static_cast<unsigned>(cfg.seed);
    lo.points_per_t = points;
    const auto& grid = g.grid();
    LipschitzReport rep;
    double roundtrip = 0;
    std::mt19937 rng(static_cast<unsigned>(cfg.seed));
    auto check_roundtrip = [&](const SampleDomain& dom, auto fwd, auto inv) {
        for (double t : grid)
            for (int i = 0; i < 50; ++i) {
                Vec3d p = dom.sample(rng, t), q = inv(fwd(p));
                roundtrip = std::max(roundtrip, std::hypot(p.x - q.x, p.y - q.y) / t);
            }
    };
    if (kind == "translate") {
        auto arc = parse_arc_spec(arg);
        auto m = choose_cone(g.cone_opening(), arc, grid);
        check_translation_margin(m, arc, grid);
        auto dom = SampleDomain::cone(m);
        auto fwd = [&](const Vec3d& p) { return translate_along_arc(p, arc, m); };
        rep = verify_bilipschitz(fwd, dom, grid, lo);
        check_roundtrip(dom, fwd, [&](const Vec3d& p) { return translate_along_arc(p, arc, m, Direction::Inverse); });
    } else if (kind == "dilate") {
        auto f = parse_series(arg);
        check_dilation_factor(f);
        double sup = 0;
        for (double t : grid) sup = std::max(sup, f.eval(t));
        auto m = choose_cone(g.cone_opening(), 0, sup);
        auto dom = SampleDomain::cone(m);
        auto fwd = [&](const Vec3d& p) { return dilate_by_function(p, f, m); };
        rep = verify_bilipschitz(fwd, dom, grid, lo);
        check_roundtrip(dom, fwd, [&](const Vec3d& p) { return dilate_by_function(p, f, m, Direction::Inverse); });
    } else if (kind == "isotopy") {
        double M = arg.empty() ? 4 : std::stod(arg);
        if (g.component_count() != 4) fail(ErrorKind::ParseError, "isotopy needs four open chains f, a, b, g");
        const auto& a = g.component(1).vertices;
        auto rot = Rotation::from_angle(limit_direction(a.back() - a.front()).angle());
        auto view = [&](int c) { return synchronized_view(g.component(c).vertices, rot, g.grid_depth()); };
        auto fam = IsotopyFamilies::from_chains(view(0), view(1), view(2), view(3), M);
        SampleDomain dom;
        dom.sample = [fam](std::mt19937& r, double t) {
            std::uniform_real_distribution<double> U(0.02, 0.98);
            auto p = fam.point(U(r), U(r), t);
            return Vec3d{p.x, p.y, t};
        };
        dom.contains = [fam](const Vec3d& p) {
            double t = p.z;
            if (!(t > 0) || p.x <= fam.x0(t) || p.x >= fam.x1(t)) return false;
            return p.y > fam.g(t, p.x) && p.y < fam.f(t, p.x);
        };
        rep = verify_bilipschitz(
            [fam](const Vec3d& p) {
                auto q = rect_isotopy_at(fam, {p.x, p.y}, p.z, 1);
                return Vec3d{q.x, q.y, p.z};
            },
            dom, grid, lo);
        roundtrip = -1;
    } else {
        fail(ErrorKind::ParseError, "unknown map '" + kind + "' (translate, dilate, isotopy)");
    }
    if (cfg.json) {
        json rows = json::array();
        for (auto& r : rep.rows) rows.push_back({{"t", r.t}, {"min", r.min_ratio}, {"max", r.max_ratio}, {"n", r.samples}});
        json j{{"map", kind},   {"verdict", std::string(to_string(rep.verdict))}, {"samples", rep.samples},
               {"min", rep.global_min}, {"max", rep.global_max}, {"spread", rep.spread}, {"rows", rows}};
        if (roundtrip >= 0) j["roundtrip_error"] = roundtrip;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "map: " << kind << "\n" << rep.str();
        if (roundtrip >= 0) std::cout << "roundtrip error (relative to t): " << roundtrip << "\n";
    }
    return Ok;
}

int cmd_render(const Config& cfg, const PolygonalGerm& g, bool steps) {
    if (cfg.svg_dir.empty()) fail(ErrorKind::ParseError, "render needs --svg DIR");
    fs::create_directories(cfg.svg_dir);
    double t = snapshot_t(cfg, g);
    auto p = fs::path(cfg.svg_dir) / "link.svg";
    write_file(p, render_germ_svg(g, t, "plane link"));
    std::cout << p.string() << "\n";
    if (steps) {
        require_lne(g);
        for (size_t c = 0; c < g.component_count(); ++c) {
            auto h = single_component(g, int(c));
            auto r = classify_connected(h);
            for (auto& q : write_snapshots(cfg, cfg.svg_dir, suffix(g, int(c)), h, r.trace.moves))
                std::cout << q.string() << "\n";
        }
    }
    return Ok;
}

int cmd_fuzz(const Config& cfg, int count, bool open, int min_v, int max_v, const std::string& out_dir) {
    std::mt19937_64 rng(cfg.seed);
    FuzzOptions opt;
    opt.closed = !open;
    opt.min_vertices = min_v;
    opt.max_vertices = max_v;
    if (!out_dir.empty()) fs::create_directories(out_dir);
    for (int i = 0; i < count; ++i) {
        auto text = write_germ(random_lne_germ(rng, opt));
        if (out_dir.empty()) {
            std::cout << "# germ " << i << "\n" << text << "\n";
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "fuzz_%04d.germ", i);
            auto p = fs::path(out_dir) / buf;
            write_file(p, text);
            std::cout << p.string() << "\n";
        }
    }
    return Ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lipgerm: Lipschitz geometry of polygonal surface germs"};
    app.require_subcommand(1);
    app.fallthrough();
    Config cfg;
    double tmax = 0, svg_t = 0;
    app.add_option("--tmax", tmax, "largest t of the sampling grid")->check(CLI::PositiveNumber);
    app.add_option("--grid-depth", cfg.grid_depth, "number of halvings in the t grid")->capture_default_str();
    app.add_option("--truncation", cfg.truncation, "truncation order K of series without an O-term")
        ->capture_default_str();
    app.add_option("--svg", cfg.svg_dir, "directory for SVG snapshots");
    app.add_option("--svg-t", svg_t, "t at which snapshots are drawn")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    app.add_flag("--json", cfg.json, "machine-readable output");

    std::string in, in2, out, map_spec, fuzz_dir;
    bool steps = false, open = false;
    int points = 200, count = 10, min_v = 3, max_v = 10;

    auto* validate = app.add_subcommand("validate", "parse a germ file and check its validity");
    validate->add_option("file", in)->required();
    auto* invariants = app.add_subcommand("invariants", "edge exponents, tord table and LNE verdict");
    invariants->add_option("file", in)->required();
    auto* reduce = app.add_subcommand("reduce", "run the reduction pipeline and write a trace");
    reduce->add_option("file", in)->required();
    reduce->add_option("-o,--output", out, "trace file (stdout when absent)");
    auto* classify = app.add_subcommand("classify", "canonical form of every component");
    classify->add_option("file", in)->required();
    auto* compare = app.add_subcommand("compare", "decide ambient equivalence of two germs");
    compare->add_option("first", in)->required();
    compare->add_option("second", in2)->required();
    auto* tree = app.add_subcommand("tree", "canonical labelled tree of a germ with closed components");
    tree->add_option("file", in)->required();
    auto* verify = app.add_subcommand("verify-map", "sampled bi-Lipschitz report for a map");
    verify->add_option("file", in)->required();
    verify->add_option("--map", map_spec, "translate:x=..;y=.. | dilate:<series> | isotopy[:M]")->required();
    verify->add_option("--points", points, "samples per t")->capture_default_str();
    auto* render = app.add_subcommand("render", "SVG of the plane link (and reduction steps)");
    render->add_option("file", in)->required();
    render->add_flag("--steps", steps, "also draw one snapshot per reduction move");
    auto* fuzz = app.add_subcommand("fuzz", "random LNE germs");
    fuzz->add_option("--count", count)->capture_default_str();
    fuzz->add_flag("--open", open, "open chains instead of closed polygons");
    fuzz->add_option("--min-vertices", min_v)->capture_default_str();
    fuzz->add_option("--max-vertices", max_v)->capture_default_str();
    fuzz->add_option("--out", fuzz_dir, "write one file per germ into this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? Ok : InvalidInput;
    }
    if (tmax > 0) cfg.tmax = tmax;
    if (svg_t > 0) cfg.svg_t = svg_t;

    try {
        if (*validate) return cmd_validate(cfg, in);
        if (*fuzz) return cmd_fuzz(cfg, count, open, min_v, max_v, fuzz_dir);
        auto g = load(cfg, in);
        if (*invariants) return cmd_invariants(cfg, g);
        if (*reduce) return cmd_reduce(cfg, g, out);
        if (*classify) return cmd_classify(cfg, g);
        if (*compare) return cmd_compare(cfg, g, load(cfg, in2));
        if (*tree) return cmd_tree(cfg, g);
        if (*verify) return cmd_verify_map(cfg, g, map_spec, points);
        if (*render) return cmd_render(cfg, g, steps);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return CertificateFailure;
    }
    return Ok;
}
