// Printed-form fidelity suite behind `verify`: regenerates the hierarchy
// text and diffs it against the shipped golden files, reruns the randomized
// pair-algebra identities, and checks the pure torsion blocks of the
// canonical connection on every builtin fixture.

#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fracflow/errors.hpp"
#include "fracflow/geometry.hpp"
#include "fracflow/scenario.hpp"

namespace fracflow::cli {

namespace {

constexpr int kGoldenTop = 4;          // levels stored in the golden files
constexpr double kKleinTol = 1e-12;
constexpr double kTorsionTol = 1e-8;
constexpr std::uint64_t kVerifySeed = 20110615;

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw io_error("cannot read golden file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

// the v-sector text is the h-sector text with the variable letter renamed
std::string rename_variable(const std::string& text) {
    std::string out = text;
    for (std::size_t i = 0; i + 1 < out.size(); ++i)
        if (out[i] == 'v' && std::isdigit(static_cast<unsigned char>(out[i + 1])))
            out[i] = 'w';
    return out;
}

struct GoldenLevels {
    std::vector<std::string> flow;
    std::vector<std::string> covector;
    std::vector<std::string> hamiltonian;
    std::string error;  // nonempty when the file does not parse
};

GoldenLevels parse_levels(const std::string& text) {
    GoldenLevels g;
    const std::vector<std::string> lines = split_lines(text);
    std::size_t i = 0;
    for (int k = 0; k <= kGoldenTop; ++k) {
        const std::string head = "level " + std::to_string(k);
        auto take = [&](const std::string& prefix,
                        std::vector<std::string>& into) {
            if (g.error.empty()) {
                if (i >= lines.size() || lines[i].rfind(prefix, 0) != 0) {
                    g.error = "malformed golden file near line " +
                              std::to_string(i + 1) + ": expected \"" +
                              prefix + "...\"";
                } else {
                    into.push_back(lines[i].substr(prefix.size()));
                    ++i;
                }
            }
        };
        if (g.error.empty()) {
            if (i >= lines.size() || lines[i] != head) {
                g.error = "malformed golden file near line " +
                          std::to_string(i + 1) + ": expected \"" + head +
                          "\"";
            } else {
                ++i;
            }
        }
        take("flow: ", g.flow);
        take("covector: ", g.covector);
        take("hamiltonian: ", g.hamiltonian);
    }
    if (g.error.empty() && i != lines.size())
        g.error = "malformed golden file: trailing content at line " +
                  std::to_string(i + 1);
    return g;
}

VerifyItem compare_lines(const std::string& label, const GoldenLevels& golden,
                         const GoldenLevels& computed,
                         const std::vector<std::string>& sections) {
    VerifyItem item{label, "hierarchy", true, ""};
    if (!golden.error.empty()) {
        item.passed = false;
        item.detail = golden.error;
        return item;
    }
    auto pick = [](const GoldenLevels& g, const std::string& s) {
        return s == "flow" ? &g.flow
                           : s == "covector" ? &g.covector : &g.hamiltonian;
    };
    for (const std::string& section : sections) {
        const std::vector<std::string>* want = pick(computed, section);
        const std::vector<std::string>* have = pick(golden, section);
        for (int k = 0; k <= kGoldenTop; ++k) {
            const std::string& w = (*want)[std::size_t(k)];
            const std::string& h = (*have)[std::size_t(k)];
            if (w != h) {
                item.passed = false;
                item.detail = "level " + std::to_string(k) + " " + section +
                              " differs\n    computed: " + w +
                              "\n    golden:   " + h;
                return item;
            }
        }
    }
    return item;
}

std::string residual_text(double x) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << x;
    return os.str();
}

// max |T| over the pure blocks (all indices horizontal, or all vertical) of
// the canonical connection's torsion, NaN margins excluded
double pure_torsion_max(const geom::GeometryFixture& fx) {
    const geom::DConnection conn =
        geom::canonical_dconnection(fx.chart, fx.nconn, fx.metric);
    const std::vector<geom::GridField> tor =
        geom::torsion(fx.chart, fx.nconn, conn);
    const int n = fx.chart.n;
    const int d = fx.chart.dim();
    double worst = 0.0;
    auto scan = [&](int lo, int hi) {
        for (int t = lo; t < hi; ++t)
            for (int b = lo; b < hi; ++b)
                for (int g = lo; g < hi; ++g) {
                    const geom::GridField& f =
                        tor[std::size_t((t * d + b) * d + g)];
                    for (double x : f.raw())
                        if (!std::isnan(x))
                            worst = std::max(worst, std::abs(x));
                }
    };
    scan(0, n);
    scan(n, d);
    return worst;
}

}  // namespace

std::vector<VerifyItem> verify_suite(const std::string& kind,
                                     const std::string& share_dir) {
    if (kind != "all" && kind != "hierarchy" && kind != "geometry" &&
        kind != "klein")
        throw config_error("unknown verify kind: " + kind);

    std::vector<VerifyItem> items;

    if (kind == "all" || kind == "hierarchy") {
        const std::string text = hierarchy_text(kGoldenTop, 0);
        const GoldenLevels computed_h = parse_levels(text);
        const GoldenLevels computed_v = parse_levels(rename_variable(text));
        const GoldenLevels golden_h =
            parse_levels(read_file(share_dir + "/golden/hierarchy_h.txt"));
        const GoldenLevels golden_v =
            parse_levels(read_file(share_dir + "/golden/hierarchy_v.txt"));
        items.push_back(
            compare_lines("mkdv1a", golden_h, computed_h, {"flow"}));
        items.push_back(
            compare_lines("mkdv2a", golden_v, computed_v, {"flow"}));
        items.push_back(compare_lines("hhh", golden_h, computed_h,
                                      {"covector", "hamiltonian"}));
        items.push_back(compare_lines("hhv", golden_v, computed_v,
                                      {"covector", "hamiltonian"}));
    }

    if (kind == "all" || kind == "klein") {
        KleinSpec spec;
        spec.trials = 48;
        const KleinResiduals r = klein_residuals(spec, kVerifySeed);
        items.push_back({"aux41", "klein", r.bracket <= kKleinTol,
                         "max residual " + residual_text(r.bracket)});
        items.push_back({"aux41a", "klein", r.pairing <= kKleinTol,
                         "max residual " + residual_text(r.pairing)});
    }

    if (kind == "all" || kind == "geometry") {
        double worst = 0.0;
        std::string worst_name = "flat";
        for (const char* name : {"flat", "sphere", "twisted", "vcurved"}) {
            const double t =
                pure_torsion_max(geom::builtin_fixture(name, 1.0));
            if (t > worst) {
                worst = t;
                worst_name = name;
            }
        }
        items.push_back({"footnote-torsion", "geometry", worst <= kTorsionTol,
                         "max pure-block torsion " + residual_text(worst) +
                             " (" + worst_name + ")"});
    }

    return items;
}

int verify_report(const std::string& kind, const std::string& share_dir,
                  std::ostream& os) {
    const std::vector<VerifyItem> items = verify_suite(kind, share_dir);
    os << std::left << std::setw(18) << "check" << std::setw(11) << "kind"
       << "result\n";
    int passed = 0;
    for (const VerifyItem& item : items) {
        os << std::left << std::setw(18) << item.label << std::setw(11)
           << item.kind << (item.passed ? "pass" : "FAIL");
        if (item.passed) {
            if (!item.detail.empty() &&
                item.detail.find('\n') == std::string::npos)
                os << "  (" << item.detail << ")";
            ++passed;
        }
        os << '\n';
        if (!item.passed) os << "  " << item.detail << '\n';
    }
    os << passed << " of " << items.size() << " checks passed\n";
    return passed == static_cast<int>(items.size()) ? 0 : 1;
}

}  // namespace fracflow::cli
