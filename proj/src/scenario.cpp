#include "fracflow/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "fracflow/diffpoly.hpp"
#include "fracflow/errors.hpp"
#include "fracflow/geometry.hpp"
#include "fracflow/klein.hpp"
#include "fracflow/operators.hpp"
#include "fracflow/version.hpp"

namespace fracflow::cli {

using nlohmann::json;

namespace {

// ---- strict JSON helpers ----------------------------------------------

void require_object(const json& j, const std::string& where) {
    if (!j.is_object())
        throw config_error(where + " must be a JSON object");
}

void check_keys(const json& obj, const std::string& where,
                const std::vector<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) ==
            allowed.end())
            throw config_error("unknown key \"" + item.key() + "\" in " +
                               where);
    }
}

template <typename T>
T get_as(const json& obj, const std::string& where, const std::string& key,
         const T& fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required)
            throw config_error(where + " is missing required key \"" + key +
                               "\"");
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error("key \"" + key + "\" in " + where +
                           " has the wrong type");
    }
}

flow::Profile parse_profile(const json& j) {
    require_object(j, "profile");
    check_keys(j, "profile", schema_keys("profile"));
    flow::Profile p;
    p.name = get_as<std::string>(j, "profile", "name", p.name);
    p.k = get_as<double>(j, "profile", "k", p.k);
    p.center = get_as<double>(j, "profile", "center", p.center);
    p.width = get_as<double>(j, "profile", "width", p.width);
    p.amplitude = get_as<double>(j, "profile", "amplitude", p.amplitude);
    p.file = get_as<std::string>(j, "profile", "file", p.file);
    static const std::vector<std::string> names = {"zero", "soliton", "kink",
                                                   "gaussian", "file"};
    if (std::find(names.begin(), names.end(), p.name) == names.end())
        throw config_error("unknown profile name: " + p.name);
    if (p.name == "file" && p.file.empty())
        throw config_error("profile \"file\" needs a non-empty file path");
    if (p.width <= 0.0) throw config_error("profile width must be positive");
    return p;
}

FlowSpec parse_flow(const json& j) {
    require_object(j, "flow block");
    check_keys(j, "flow block", schema_keys("flow"));
    FlowSpec spec;
    flow::SolverConfig& c = spec.config;
    const std::string w = "flow block";
    c.order = frac::FractionalOrder(get_as<double>(j, w, "alpha", 1.0));
    c.flow_level = get_as<int>(j, w, "level", c.flow_level);
    c.dt = get_as<double>(j, w, "dt", 0.0, true);
    c.t_end = get_as<double>(j, w, "t_end", 0.0, true);
    c.node_count = get_as<int>(j, w, "node_count", 0, true);
    c.domain_length = get_as<double>(j, w, "domain_length", 0.0, true);
    c.cfl_const = get_as<double>(j, w, "cfl_const", c.cfl_const);
    c.component_count = get_as<int>(j, w, "component_count", c.component_count);
    c.monitor_set = get_as<std::vector<int>>(j, w, "monitor", {});
    // the rotation flow defaults to unit curvature, every other level to a
    // plain hierarchy flow without the neighbor admixture
    const double curv_default = c.flow_level == -1 ? 1.0 : 0.0;
    c.curvature_const = get_as<double>(j, w, "curvature_const", curv_default);
    spec.frames = get_as<int>(j, w, "frames", spec.frames);
    spec.trace_stride = get_as<int>(j, w, "trace_stride", spec.trace_stride);
    if (j.contains("profile")) spec.profile = parse_profile(j.at("profile"));
    if (spec.frames < 1) throw config_error("frames must be >= 1");
    if (spec.trace_stride < 0)
        throw config_error("trace_stride must be >= 0");
    c.validate();
    return spec;
}

HierarchySpec parse_hierarchy(const json& j) {
    require_object(j, "hierarchy block");
    check_keys(j, "hierarchy block", schema_keys("hierarchy"));
    HierarchySpec spec;
    spec.top_level = get_as<int>(j, "hierarchy block", "top_level",
                                 spec.top_level);
    spec.components = get_as<int>(j, "hierarchy block", "components",
                                  spec.components);
    if (spec.top_level < 0 || spec.top_level > 6)
        throw config_error("top_level must lie in 0..6");
    if (spec.components < 0 || spec.components > 8)
        throw config_error("components must lie in 0..8");
    return spec;
}

GeometrySpec parse_geometry(const json& j) {
    require_object(j, "geometry block");
    check_keys(j, "geometry block", schema_keys("geometry"));
    GeometrySpec spec;
    spec.alpha = get_as<double>(j, "geometry block", "alpha", spec.alpha);
    spec.builtin = get_as<std::string>(j, "geometry block", "builtin", "");
    spec.file = get_as<std::string>(j, "geometry block", "file", "");
    (void)frac::FractionalOrder(spec.alpha);
    if (spec.builtin.empty() == spec.file.empty())
        throw config_error(
            "geometry block needs exactly one of \"builtin\" and \"file\"");
    return spec;
}

KleinSpec parse_klein(const json& j) {
    require_object(j, "klein block");
    check_keys(j, "klein block", schema_keys("klein"));
    KleinSpec spec;
    const std::string w = "klein block";
    spec.n_min = get_as<int>(j, w, "n_min", spec.n_min);
    spec.n_max = get_as<int>(j, w, "n_max", spec.n_max);
    spec.trials = get_as<int>(j, w, "trials", spec.trials);
    spec.tolerance = get_as<double>(j, w, "tolerance", spec.tolerance);
    if (spec.n_min < 2 || spec.n_max < spec.n_min || spec.n_max > 32)
        throw config_error("klein dimensions must satisfy 2 <= n_min <= n_max <= 32");
    if (spec.trials < 1) throw config_error("trials must be >= 1");
    if (!(spec.tolerance > 0.0))
        throw config_error("tolerance must be positive");
    return spec;
}

std::string block_name(const std::string& kind) {
    if (kind == "klein-check") return "klein";
    return kind;
}

// ---- canonical serialization + hash ------------------------------------

json canonical_json(const ScenarioConfig& cfg) {
    json j;
    j["version"] = cfg.version;
    j["kind"] = cfg.kind;
    j["output_dir"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    if (cfg.kind == "flow") {
        const flow::SolverConfig& c = cfg.flow.config;
        j["flow"] = {{"alpha", c.order.value()},
                     {"level", c.flow_level},
                     {"curvature_const", c.curvature_const},
                     {"dt", c.dt},
                     {"t_end", c.t_end},
                     {"node_count", c.node_count},
                     {"domain_length", c.domain_length},
                     {"cfl_const", c.cfl_const},
                     {"component_count", c.component_count},
                     {"monitor", c.monitor_set},
                     {"frames", cfg.flow.frames},
                     {"trace_stride", cfg.flow.trace_stride},
                     {"profile",
                      {{"name", cfg.flow.profile.name},
                       {"k", cfg.flow.profile.k},
                       {"center", cfg.flow.profile.center},
                       {"width", cfg.flow.profile.width},
                       {"amplitude", cfg.flow.profile.amplitude},
                       {"file", cfg.flow.profile.file}}}};
    } else if (cfg.kind == "hierarchy") {
        j["hierarchy"] = {{"top_level", cfg.hierarchy.top_level},
                          {"components", cfg.hierarchy.components}};
    } else if (cfg.kind == "geometry") {
        j["geometry"] = {{"alpha", cfg.geometry.alpha},
                         {"builtin", cfg.geometry.builtin},
                         {"file", cfg.geometry.file}};
    } else if (cfg.kind == "klein-check") {
        j["klein"] = {{"n_min", cfg.klein.n_min},
                      {"n_max", cfg.klein.n_max},
                      {"trials", cfg.klein.trials},
                      {"tolerance", cfg.klein.tolerance}};
    }
    return j;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

// ---- artifact helpers ---------------------------------------------------

std::string num_text(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw io_error("cannot open for writing: " + path.string());
    os << body;
    if (!os) throw io_error("write failed: " + path.string());
}

std::filesystem::path prepare_output_dir(const ScenarioConfig& cfg) {
    std::string dir = cfg.output_dir;
    if (const char* env = std::getenv("FRACFLOW_OUT"); env && *env)
        dir = env;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw io_error("cannot create output directory " + dir + ": " +
                       ec.message());
    return dir;
}

void write_manifest(const std::filesystem::path& dir,
                    const ScenarioConfig& cfg,
                    std::vector<std::string>& artifacts) {
    artifacts.push_back("manifest.json");
    std::sort(artifacts.begin(), artifacts.end());
    json m;
    m["artifacts"] = artifacts;
    m["config_hash"] = config_hash(cfg);
    m["kind"] = cfg.kind;
    m["library_version"] = kVersion;
    m["seed"] = cfg.seed;
    write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

// ---- pipelines ----------------------------------------------------------

std::vector<std::string> run_flow(const ScenarioConfig& cfg,
                                  const std::filesystem::path& dir) {
    const FlowSpec& spec = cfg.flow;
    const flow::SolverConfig& c = spec.config;
    flow::FlowSolver solver(c);
    flow::FlowState state = solver.initial_state(spec.profile);

    std::ostringstream frames;
    std::ostringstream trace;
    trace << "tau";
    for (int level : c.monitor_set) trace << ",H" << level;
    trace << '\n';
    auto record_trace = [&] {
        const flow::TraceEntry e = solver.monitor(state);
        trace << num_text(e.tau);
        for (double x : e.values) trace << ',' << num_text(x);
        trace << '\n';
    };

    flow::write_frame_csv(frames, state, c, true);
    record_trace();
    const int last = c.t_end > 0.0 ? spec.frames - 1 : 0;
    for (int f = 1; f <= last; ++f) {
        const double target = c.t_end * f / last;
        if (spec.trace_stride > 0) {
            const double stride = spec.trace_stride * c.dt;
            double next = (std::floor(state.tau / stride) + 1.0) * stride;
            while (next < target - 0.5 * c.dt) {
                solver.advance_to(state, next);
                record_trace();
                next += stride;
            }
        }
        solver.advance_to(state, target);
        flow::write_frame_csv(frames, state, c, false);
        record_trace();
    }

    write_text_file(dir / "frames.csv", frames.str());
    write_text_file(dir / "trace.csv", trace.str());
    return {"frames.csv", "trace.csv"};
}

std::vector<std::string> run_hierarchy(const ScenarioConfig& cfg,
                                       const std::filesystem::path& dir) {
    write_text_file(dir / "hierarchy.txt",
                    hierarchy_text(cfg.hierarchy.top_level,
                                   cfg.hierarchy.components));
    return {"hierarchy.txt"};
}

std::vector<std::string> run_geometry(const ScenarioConfig& cfg,
                                      const std::filesystem::path& dir) {
    const GeometrySpec& spec = cfg.geometry;
    const geom::GeometryFixture fx =
        spec.builtin.empty() ? geom::load_fixture(spec.file, spec.alpha)
                             : geom::builtin_fixture(spec.builtin, spec.alpha);
    const geom::CurvatureBundle cb = geom::analyze(fx.chart, fx.nconn,
                                                   fx.metric);
    geom::save_report(fx.chart, cb, (dir / "report.tsv").string());
    return {"report.tsv"};
}

// pairing-identification residual: embedded vectors restrict the trace form
// to the dot product, the split is orthogonal, and decompose inverts the
// embeddings
double pairing_residual(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    klein::Vec a(n), b(n);
    for (int i = 0; i < n; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
    }
    klein::Mat s = klein::Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            s(i, j) = u(rng);
            s(j, i) = -s(i, j);
        }
    const klein::Mat ea = klein::embed_p(a);
    const klein::Mat eb = klein::embed_p(b);
    const klein::Mat corner = klein::so_corner(s);
    double r = std::abs(klein::ck_inner(ea, eb) - a.dot(b));
    r = std::max(r, std::abs(klein::ck_inner(ea, corner)));
    const klein::Decomposition dec = klein::decompose(ea + corner);
    r = std::max(r, (dec.tangential - a).cwiseAbs().maxCoeff());
    r = std::max(r, (dec.normal - s).cwiseAbs().maxCoeff());
    return r;
}

double bracket_residual(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int d = n - 1;
    klein::Vec v(d), e_perp(d), varpi(d);
    for (int i = 0; i < d; ++i) {
        v[i] = u(rng);
        e_perp[i] = u(rng);
        varpi[i] = u(rng);
    }
    const double e_par = u(rng);
    klein::Mat theta = klein::Mat::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            theta(i, j) = u(rng);
            theta(j, i) = -theta(i, j);
        }
    return klein::bracket_identity_residual(v, e_par, e_perp, varpi, theta);
}

std::vector<std::string> run_klein(const ScenarioConfig& cfg,
                                   const std::filesystem::path& dir) {
    const KleinSpec& spec = cfg.klein;
    std::mt19937_64 rng(cfg.seed);
    std::ostringstream csv;
    csv << "n,trial,bracket_residual,pairing_residual\n";
    double worst = 0.0;
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
        for (int t = 0; t < spec.trials; ++t) {
            const double rb = bracket_residual(rng, n);
            const double rp = pairing_residual(rng, n);
            worst = std::max(worst, std::max(rb, rp));
            csv << n << ',' << t << ',' << num_text(rb) << ','
                << num_text(rp) << '\n';
        }
    }
    write_text_file(dir / "residuals.csv", csv.str());
    if (worst > spec.tolerance)
        throw numeric_error("pair-algebra identity residual " +
                            num_text(worst) + " exceeds tolerance " +
                            num_text(spec.tolerance));
    return {"residuals.csv"};
}

}  // namespace

KleinResiduals klein_residuals(const KleinSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    KleinResiduals r;
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
        for (int t = 0; t < spec.trials; ++t) {
            r.bracket = std::max(r.bracket, bracket_residual(rng, n));
            r.pairing = std::max(r.pairing, pairing_residual(rng, n));
        }
    }
    return r;
}

namespace {

std::string rational_text(const dp::Rational& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

// renders a one-component specialization map (multisets of jet orders) in
// the same sign/coefficient style as the pairing form
std::string jet_product_text(
    const std::map<std::vector<int>, dp::Rational>& terms) {
    if (terms.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [key, coeff] : terms) {
        const bool neg = coeff < 0;
        const dp::Rational mag = neg ? dp::Rational(-coeff) : coeff;
        out += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
        first = false;
        if (mag != 1) out += rational_text(mag) + "*";
        for (std::size_t i = 0; i < key.size(); ++i) {
            if (i) out += "*";
            out += "v" + std::to_string(key[i]);
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> schema_keys(const std::string& block) {
    if (block.empty())
        return {"version", "kind", "output_dir", "seed",
                "flow",    "hierarchy", "geometry", "klein"};
    if (block == "flow")
        return {"alpha",         "level",           "curvature_const",
                "dt",            "t_end",           "node_count",
                "domain_length", "cfl_const",       "component_count",
                "monitor",       "frames",          "trace_stride",
                "profile"};
    if (block == "profile")
        return {"name", "k", "center", "width", "amplitude", "file"};
    if (block == "hierarchy") return {"top_level", "components"};
    if (block == "geometry") return {"alpha", "builtin", "file"};
    if (block == "klein") return {"n_min", "n_max", "trials", "tolerance"};
    throw config_error("unknown schema block: " + block);
}

ScenarioConfig parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("scenario is not valid JSON: ") +
                           e.what());
    }
    require_object(j, "scenario");

    ScenarioConfig cfg;
    cfg.kind = get_as<std::string>(j, "scenario", "kind", "", true);
    static const std::vector<std::string> kinds = {"geometry", "hierarchy",
                                                   "flow", "klein-check"};
    if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end())
        throw config_error("unknown scenario kind: " + cfg.kind);

    // only the block matching the kind is admissible, so a stray block for
    // another kind trips the unknown-key check
    check_keys(j, "scenario",
               {"version", "kind", "output_dir", "seed", block_name(cfg.kind)});

    cfg.version = get_as<int>(j, "scenario", "version", 0, true);
    if (cfg.version != 1)
        throw config_error("unsupported scenario version: " +
                           std::to_string(cfg.version));
    cfg.output_dir = get_as<std::string>(j, "scenario", "output_dir",
                                         cfg.output_dir);
    if (cfg.output_dir.empty())
        throw config_error("output_dir must not be empty");
    cfg.seed = get_as<std::uint64_t>(j, "scenario", "seed", cfg.seed);

    const std::string block = block_name(cfg.kind);
    if (!j.contains(block))
        throw config_error("scenario of kind \"" + cfg.kind +
                           "\" needs a \"" + block + "\" block");
    if (cfg.kind == "flow")
        cfg.flow = parse_flow(j.at(block));
    else if (cfg.kind == "hierarchy")
        cfg.hierarchy = parse_hierarchy(j.at(block));
    else if (cfg.kind == "geometry")
        cfg.geometry = parse_geometry(j.at(block));
    else
        cfg.klein = parse_klein(j.at(block));
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot read scenario file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_scenario(buf.str());
}

std::string config_hash(const ScenarioConfig& cfg) {
    return fnv1a_hex(canonical_json(cfg).dump());
}

std::vector<std::string> run_scenario(const ScenarioConfig& cfg) {
    const std::filesystem::path dir = prepare_output_dir(cfg);
    std::vector<std::string> artifacts;
    if (cfg.kind == "flow")
        artifacts = run_flow(cfg, dir);
    else if (cfg.kind == "hierarchy")
        artifacts = run_hierarchy(cfg, dir);
    else if (cfg.kind == "geometry")
        artifacts = run_geometry(cfg, dir);
    else if (cfg.kind == "klein-check")
        artifacts = run_klein(cfg, dir);
    else
        throw config_error("unknown scenario kind: " + cfg.kind);
    write_manifest(dir, cfg, artifacts);
    return artifacts;
}

int run_scenario_file(const std::string& path, std::ostream& err) {
    try {
        run_scenario(load_scenario(path));
        return 0;
    } catch (const config_error& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const numeric_error& e) {
        err << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const io_error& e) {
        err << "io error: " << e.what() << '\n';
        return 4;
    }
}

std::string hierarchy_text(int top_level, int components) {
    if (top_level < 0 || top_level > 6)
        throw config_error("top_level must lie in 0..6");
    const std::vector<dp::HierarchyLevel> levels =
        dp::generate_hierarchy(top_level);
    std::ostringstream os;
    for (int k = 0; k <= top_level; ++k) {
        const dp::HierarchyLevel& lv = levels[std::size_t(k)];
        os << "level " << k << '\n';
        if (components == 1) {
            os << "flow: " << jet_product_text(dp::specialize_scalar(lv.flow))
               << '\n';
            os << "covector: "
               << jet_product_text(dp::specialize_scalar(lv.covector)) << '\n';
            os << "hamiltonian: "
               << jet_product_text(dp::specialize_scalar(lv.hamiltonian))
               << '\n';
        } else {
            os << "flow: " << dp::to_text(lv.flow) << '\n';
            os << "covector: " << dp::to_text(lv.covector) << '\n';
            os << "hamiltonian: " << dp::to_text(lv.hamiltonian) << '\n';
        }
    }
    return os.str();
}

std::string default_share_dir() {
    if (const char* env = std::getenv("FRACFLOW_SHARE"); env && *env)
        return env;
#ifdef FRACFLOW_SHARE_DIR
    return FRACFLOW_SHARE_DIR;
#else
    return "share";
#endif
}

}  // namespace fracflow::cli
