#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stagebound/bounds.hpp"
#include "stagebound/corpus.hpp"
#include "stagebound/export.hpp"
#include "stagebound/stagegraph.hpp"
#include "stagebound/verify.hpp"

namespace py = pybind11;
using namespace stagebound;

namespace {

Protocol resolve(const std::string& source) {
    if (auto* e = corpus::find(source)) return e->build();
    return load_protocol_text(source);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stage-graph analysis of population protocols";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);

    m.def("corpus_names", [] {
        std::vector<std::string> names;
        for (auto& e : corpus::entries()) names.push_back(e.name);
        return names;
    });
    m.def("protocol_text", [](const std::string& source) { return protocol_to_text(resolve(source)); },
          py::arg("source"));

    m.def(
        "analyze",
        [](const std::string& source, int max_stages, double timeout) {
            Protocol p = resolve(source);
            StageGraph g;
            {
                py::gil_scoped_release release;
                g = build_stage_graph(p, Limits{max_stages, timeout});
            }
            auto r = aggregate(p, g);
            return py::make_tuple(report_json(r), stage_graph_json(p, g), g.complete());
        },
        py::arg("source"), py::arg("max_stages") = 100000, py::arg("timeout") = 1000.0);

    m.def(
        "simulate",
        [](const std::string& source, const std::string& config, uint64_t trials, uint64_t seed) {
            Protocol p = resolve(source);
            SimOptions opt;
            opt.trials = trials;
            opt.seed = seed;
            SimResult r;
            {
                py::gil_scoped_release release;
                r = simulate(p, parse_config_spec(p, config), opt);
            }
            py::dict d;
            d["steps"] = r.steps;
            d["outputs"] = r.outputs;
            d["mean"] = r.mean ? py::cast(*r.mean) : py::none();
            return d;
        },
        py::arg("source"), py::arg("config"), py::arg("trials") = 1000, py::arg("seed") = 0);

    m.def(
        "expected_steps",
        [](const std::string& source, const std::string& config) {
            Protocol p = resolve(source);
            auto g = explore(p, parse_config_spec(p, config));
            auto e = expected_steps_exact(g, stable_set(p, g));
            return py::make_tuple(e.get_num().get_str(), e.get_den().get_str());
        },
        py::arg("source"), py::arg("config"));

    m.def(
        "check",
        [](const std::string& source, int max_n) {
            Protocol p = resolve(source);
            CheckReport rep;
            {
                py::gil_scoped_release release;
                rep = check_stage_graph(p, build_stage_graph(p), max_n);
            }
            py::list out;
            for (auto& v : rep.violations)
                out.append(py::make_tuple(v.size, v.config, v.stage, std::string(1, v.condition), v.detail));
            return out;
        },
        py::arg("source"), py::arg("max_n") = 6);
}
