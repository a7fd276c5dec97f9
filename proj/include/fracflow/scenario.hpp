#pragma once
// Declarative scenario front end shared by the CLI and the tests: versioned
// JSON configs with strict key checking, one pipeline per scenario kind,
// deterministic artifacts plus a manifest carrying an FNV-1a hash of the
// effective config. Exit-code mapping: 0 ok, 2 schema violation, 3 numeric
// failure, 4 I/O failure.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fracflow/solver.hpp"

namespace fracflow::cli {

struct HierarchySpec {
    int top_level = 2;
    // 1 renders the one-component specialization (plain jet powers);
    // any other value keeps the component-generic pairing form
    int components = 0;
};

struct GeometrySpec {
    double alpha = 1.0;
    std::string builtin;  // flat | sphere | twisted | vcurved
    std::string file;     // fixture table on disk; exactly one of the two
};

struct KleinSpec {
    int n_min = 2;  // smallest sector dimension exercised
    int n_max = 5;
    int trials = 64;          // random draws per dimension
    double tolerance = 1e-12;  // max admissible identity residual
};

struct FlowSpec {
    flow::SolverConfig config;
    flow::Profile profile;
    int frames = 2;       // evenly spaced frames in frames.csv, >= 1
    int trace_stride = 0;  // extra trace rows every this many steps; 0 = off
};

struct ScenarioConfig {
    int version = 1;
    std::string kind;  // geometry | hierarchy | flow | klein-check
    std::string output_dir = "out";
    std::uint64_t seed = 1;  // consumed by the randomized suites only
    HierarchySpec hierarchy;
    GeometrySpec geometry;
    KleinSpec klein;
    FlowSpec flow;
};

// strict parse + full validation (unknown keys anywhere are fatal, solver
// cross-field constraints re-checked); throws config_error
ScenarioConfig parse_scenario(const std::string& text);
// reads the file (io_error when unreadable) and parses it
ScenarioConfig load_scenario(const std::string& path);

// 16 hex digits of FNV-1a over the canonical re-serialization, so two files
// with the same effective config hash identically regardless of formatting
std::string config_hash(const ScenarioConfig& cfg);

// executes the pipeline for cfg.kind and writes its artifacts plus
// manifest.json into the output directory (created if missing; the
// FRACFLOW_OUT environment variable overrides cfg.output_dir). Returns the
// artifact file names. Throws config/numeric/io errors.
std::vector<std::string> run_scenario(const ScenarioConfig& cfg);

// load + run with the CLI exit-code mapping applied; diagnostics to err
int run_scenario_file(const std::string& path, std::ostream& err);

// canonical text of hierarchy levels 0..top_level (flow, covector,
// Hamiltonian per level); the golden files store exactly this
std::string hierarchy_text(int top_level, int components);

// accepted keys per block name ("", "flow", "profile", "hierarchy",
// "geometry", "klein"); the schema-coverage test enumerates these
std::vector<std::string> schema_keys(const std::string& block);

// share directory holding golden/ and fixtures/: FRACFLOW_SHARE when set,
// else the source-tree path baked in at build time
std::string default_share_dir();

// worst identity residuals over the seeded random draws described by spec;
// shared by the klein-check pipeline and the verify suite
struct KleinResiduals {
    double bracket = 0.0;  // frame/connection commutator identities
    double pairing = 0.0;  // trace-form vs dot product, split orthogonality
};
KleinResiduals klein_residuals(const KleinSpec& spec, std::uint64_t seed);

struct VerifyItem {
    std::string label;  // check id, part of the CLI output contract
    std::string kind;   // hierarchy | geometry | klein
    bool passed = false;
    std::string detail;  // residual summary, or a diff excerpt on mismatch
};

// runs the printed-form fidelity suite against the golden files under
// share_dir; kind filters to all | hierarchy | geometry | klein
std::vector<VerifyItem> verify_suite(const std::string& kind,
                                     const std::string& share_dir);

// prints the table to os; returns 0 when every item passed, 1 otherwise
int verify_report(const std::string& kind, const std::string& share_dir,
                  std::ostream& os);

}  // namespace fracflow::cli
