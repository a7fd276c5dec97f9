// Command-line front end. One scenario per invocation; every pipeline is
// also reachable without a scenario file through the convenience
// subcommands, which assemble the same config structs in memory.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "fracflow/errors.hpp"
#include "fracflow/scenario.hpp"

namespace {

int dispatch(const std::function<int()>& body) {
    try {
        return body();
    } catch (const fracflow::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const fracflow::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const fracflow::io_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

bool is_builtin_fixture(const std::string& name) {
    return name == "flat" || name == "sphere" || name == "twisted" ||
           name == "vcurved";
}

}  // namespace

int main(int argc, char** argv) {
    namespace cli = fracflow::cli;

    CLI::App app{"fracflow: fractional curve-flow and frame-geometry toolkit"};
    app.require_subcommand(1);

    std::string scenario_path;
    CLI::App* run = app.add_subcommand(
        "run", "execute a scenario file and write its artifacts");
    run->add_option("scenario", scenario_path, "scenario JSON file")
        ->required();

    std::string verify_kind = "all";
    std::string share_dir = cli::default_share_dir();
    CLI::App* verify = app.add_subcommand(
        "verify", "rerun the printed-form fidelity suite");
    verify->add_option("kind", verify_kind,
                       "all | hierarchy | geometry | klein");
    verify->add_option("--golden-dir", share_dir,
                       "share directory holding golden/ (default: "
                       "FRACFLOW_SHARE or the built-in path)");

    cli::ScenarioConfig hier_cfg;
    hier_cfg.kind = "hierarchy";
    std::string hier_out;
    CLI::App* hier = app.add_subcommand(
        "hierarchy", "print flow, covector and Hamiltonian text per level");
    hier->add_option("--levels", hier_cfg.hierarchy.top_level,
                     "top level generated (0..6)");
    hier->add_option("--components", hier_cfg.hierarchy.components,
                     "1 renders the one-component specialization");
    hier->add_option("--output", hier_out, "write to a file instead of stdout");

    cli::ScenarioConfig flow_cfg;
    flow_cfg.kind = "flow";
    double flow_alpha = 1.0;
    CLI::App* flow = app.add_subcommand("flow", "run a curve-flow integration");
    flow->add_option("--profile", flow_cfg.flow.profile.name,
                     "zero | soliton | kink | gaussian | file");
    flow->add_option("--alpha", flow_alpha, "derivative order in (0, 1]");
    flow->add_option("--level", flow_cfg.flow.config.flow_level,
                     "flow level (-1..2)");
    flow->add_option("--curvature", flow_cfg.flow.config.curvature_const,
                     "constant-curvature admixture");
    flow->add_option("--dt", flow_cfg.flow.config.dt, "time step")->required();
    flow->add_option("--t-end", flow_cfg.flow.config.t_end, "final time")
        ->required();
    flow->add_option("--nodes", flow_cfg.flow.config.node_count, "grid nodes")
        ->required();
    flow->add_option("--length", flow_cfg.flow.config.domain_length,
                     "domain length")
        ->required();
    flow->add_option("--cfl", flow_cfg.flow.config.cfl_const,
                     "admissibility constant for dt <= cfl * h^3");
    flow->add_option("--components", flow_cfg.flow.config.component_count,
                     "curve components");
    flow->add_option("--monitor", flow_cfg.flow.config.monitor_set,
                     "Hamiltonian levels traced to trace.csv");
    flow->add_option("--frames", flow_cfg.flow.frames,
                     "evenly spaced frames written to frames.csv");
    flow->add_option("--trace-stride", flow_cfg.flow.trace_stride,
                     "extra trace rows every this many steps");
    flow->add_option("--k", flow_cfg.flow.profile.k,
                     "profile steepness");
    flow->add_option("--center", flow_cfg.flow.profile.center,
                     "profile center; negative = domain midpoint");
    flow->add_option("--width", flow_cfg.flow.profile.width,
                     "gaussian width");
    flow->add_option("--amplitude", flow_cfg.flow.profile.amplitude,
                     "gaussian amplitude");
    flow->add_option("--input", flow_cfg.flow.profile.file,
                     "initial-data table for --profile file");
    flow->add_option("--output-dir", flow_cfg.output_dir,
                     "artifact directory");
    flow->add_option("--seed", flow_cfg.seed, "recorded in the manifest");

    cli::ScenarioConfig geo_cfg;
    geo_cfg.kind = "geometry";
    std::string fixture;
    CLI::App* geo = app.add_subcommand(
        "geometry", "analyze a frame-geometry fixture and write report.tsv");
    geo->add_option("--fixture", fixture,
                    "builtin name (flat | sphere | twisted | vcurved) or a "
                    "fixture file path")
        ->required();
    geo->add_option("--alpha", geo_cfg.geometry.alpha,
                    "derivative order in (0, 1]");
    geo->add_option("--output-dir", geo_cfg.output_dir, "artifact directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (run->parsed())
        return cli::run_scenario_file(scenario_path, std::cerr);

    if (verify->parsed())
        return dispatch([&] {
            return cli::verify_report(verify_kind, share_dir, std::cout);
        });

    if (hier->parsed())
        return dispatch([&] {
            const std::string text = cli::hierarchy_text(
                hier_cfg.hierarchy.top_level, hier_cfg.hierarchy.components);
            if (hier_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream os(hier_out, std::ios::binary);
                if (!os)
                    throw fracflow::io_error("cannot open for writing: " +
                                             hier_out);
                os << text;
            }
            return 0;
        });

    if (flow->parsed())
        return dispatch([&] {
            flow_cfg.flow.config.order = fracflow::frac::FractionalOrder(flow_alpha);
            if (flow->count("--curvature") == 0)
                flow_cfg.flow.config.curvature_const =
                    flow_cfg.flow.config.flow_level == -1 ? 1.0 : 0.0;
            cli::run_scenario(flow_cfg);
            return 0;
        });

    return dispatch([&] {
        if (is_builtin_fixture(fixture))
            geo_cfg.geometry.builtin = fixture;
        else
            geo_cfg.geometry.file = fixture;
        cli::run_scenario(geo_cfg);
        return 0;
    });
}
