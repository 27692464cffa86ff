#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cyclestab/analysis.hpp"
#include "cyclestab/control.hpp"
#include "cyclestab/errors.hpp"
#include "cyclestab/io.hpp"

namespace py = pybind11;
using namespace cyclestab;

namespace {

using Strings = std::vector<std::string>;

std::vector<BigDec> decimals(const Strings& xs) {
    std::vector<BigDec> out;
    for (const auto& x : xs) out.push_back(BigDec::from_string(x));
    return out;
}

Strings strings(const std::vector<BigDec>& xs) {
    Strings out;
    for (const auto& x : xs) out.push_back(x.to_string());
    return out;
}

int resolve(int precision) {
    if (precision == 0) return precision_from_environment();
    if (precision < kMinimumPrecision)
        throw ValidationError("precision must be at least " + std::to_string(kMinimumPrecision));
    return precision;
}

// Result JSON of every search in a manifest text, run at the manifest precision.
Strings search_json(const std::string& manifest) {
    RunManifest m = parse_manifest(manifest, ".");
    Strings out;
    py::gil_scoped_release nogil;
    PrecisionGuard g(m.precision);
    for (const auto& e : m.searches) out.push_back(search_report_to_json(execute_search(e)));
    return out;
}

int run_manifest_file(const std::string& path, const std::string& output_dir, int precision) {
    RunOverrides ov;
    if (!output_dir.empty()) ov.output_dir = output_dir;
    if (precision) ov.precision = precision;
    RunManifest m = load_manifest(path, ov);
    py::gil_scoped_release nogil;
    return run_manifest(m).exit_code;
}

Strings step_state(const std::string& map, const Strings& state, long k, int precision) {
    PrecisionGuard g(resolve(precision));
    return strings(iterate(catalog().find(map), decimals(state), k));
}

std::string analyze(const std::string& map, int period, const std::vector<Strings>& points, const Strings& theta,
                    int precision) {
    PrecisionGuard g(resolve(precision));
    std::vector<State> cycle;
    for (const auto& p : points) cycle.push_back(decimals(p));
    return stability_report_to_json(stability_verdict(catalog().find(map), cycle, ControlPolynomial(decimals(theta)), period));
}

py::dict lemma1(int trials, std::uint64_t seed, int precision) {
    PrecisionGuard g(resolve(precision));
    Lemma1Summary s = verify_lemma1(trials, seed);
    py::dict d;
    d["trials"] = s.trials.size();
    d["max_residual"] = s.max_residual.to_string();
    d["tolerance"] = s.tolerance.to_string();
    d["passed"] = s.passed;
    return d;
}

Strings exact_multipliers(const std::vector<std::pair<std::string, std::string>>& mus, int precision) {
    PrecisionGuard g(resolve(precision));
    std::vector<ComplexPair> z;
    for (const auto& [re, im] : mus) z.emplace_back(BigDec::from_string(re), BigDec::from_string(im));
    return strings(from_exact_multipliers(z).coefficients());
}

std::pair<Strings, std::string> chebyshev(int n, bool one_sided, int precision) {
    PrecisionGuard g(resolve(precision));
    ChebyshevControl c = one_sided ? chebyshev_one_sided(n) : chebyshev_symmetric(n);
    return {strings(c.theta.coefficients()), c.mu_star_bound.to_string()};
}

py::list list_maps() {
    py::list out;
    for (const auto& m : catalog().maps()) {
        py::dict d;
        d["name"] = m.name();
        d["dimension"] = m.dimension();
        py::dict params;
        for (std::size_t i = 0; i < m.parameter_names().size(); ++i)
            params[py::str(m.parameter_names()[i])] = m.parameter_values()[i].to_string();
        d["parameters"] = params;
        py::list presets;
        for (const auto& p : m.presets()) {
            py::dict q;
            q["period"] = p.period;
            q["theta"] = p.theta.to_string();
            q["grid_size"] = p.grid_size;
            q["tested"] = p.tested;
            presets.append(q);
        }
        d["presets"] = presets;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Predictive control of unstable cycles in arbitrary-precision decimal arithmetic";

    // later registrations are tried first, so the base class goes first
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.attr("DEFAULT_PRECISION") = kDefaultPrecision;
    m.attr("MINIMUM_PRECISION") = kMinimumPrecision;

    m.def("list_maps", &list_maps, "Catalog maps with parameters and reference presets");
    m.def("iterate", &step_state, py::arg("map"), py::arg("state"), py::arg("k") = 1, py::arg("precision") = 0,
          "k-th iterate of a state given as decimal strings");
    m.def("search_json", &search_json, py::arg("manifest"), "Result JSON for every search of a manifest text");
    m.def("run_manifest", &run_manifest_file, py::arg("path"), py::arg("output_dir") = "", py::arg("precision") = 0,
          "Run a manifest file and write its result files; returns the exit code");
    m.def("analyze", &analyze, py::arg("map"), py::arg("period"), py::arg("points"), py::arg("theta"),
          py::arg("precision") = 0, "Stability report JSON of a cycle under a control polynomial");
    m.def("verify_lemma1", &lemma1, py::arg("trials") = 50, py::arg("seed") = 1, py::arg("precision") = 50);
    m.def("from_exact_multipliers", &exact_multipliers, py::arg("multipliers"), py::arg("precision") = 0);
    m.def("chebyshev", &chebyshev, py::arg("n"), py::arg("one_sided") = false, py::arg("precision") = 0,
          "Chebyshev control coefficients and the admissible multiplier bound");
}
