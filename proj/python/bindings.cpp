// Python bindings. Exact values cross the boundary as strings ("p/q" for
// rationals, decimal for big integers); structured reports cross as JSON
// strings so nothing is ever rounded.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "keanemix/mixing.hpp"
#include "keanemix/serialize.hpp"

namespace py = pybind11;
using namespace keanemix;

namespace {

StageParams params_from(const std::vector<std::pair<std::string, std::string>>& stages) {
    StageParams p;
    for (const auto& [m, n] : stages) p.stages.emplace_back(int_parse(m), int_parse(n));
    return p;
}

std::vector<std::pair<std::string, std::string>> stages_out(const StageParams& p) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [m, n] : p.stages) out.emplace_back(int_str(m), int_str(n));
    return out;
}

IntervalSet set_from(const std::vector<std::pair<std::string, std::string>>& pieces) {
    std::vector<Interval> v;
    for (const auto& [lo, hi] : pieces) v.push_back({rat_parse(lo), rat_parse(hi)});
    return IntervalSet(std::move(v));
}

} // namespace

PYBIND11_MODULE(keanemix, m) {
    m.doc() = "exact interval-exchange construction and mixing verification";

    py::register_exception<DomainError>(m, "DomainError");
    py::register_exception<BudgetError>(m, "BudgetError");

    py::class_<Iet>(m, "Iet")
        .def(py::init([](const std::vector<std::string>& lengths, const std::vector<int>& word) {
                 std::vector<Rational> lens;
                 for (const auto& s : lengths) lens.push_back(rat_parse(s));
                 return Iet(std::move(lens), Permutation(word));
             }),
             py::arg("lengths"), py::arg("word"))
        .def_property_readonly("lengths",
                               [](const Iet& t) {
                                   std::vector<std::string> out;
                                   for (const auto& l : t.lengths()) out.push_back(rat_str(l));
                                   return out;
                               })
        .def_property_readonly("word",
                               [](const Iet& t) {
                                   std::vector<int> out;
                                   for (int s = 1; s <= t.size(); ++s)
                                       out.push_back(t.permutation().placed(s));
                                   return out;
                               })
        .def_property_readonly("total", [](const Iet& t) { return rat_str(t.total()); })
        .def("apply", [](const Iet& t, const std::string& x) { return rat_str(t.apply(rat_parse(x))); })
        .def("apply_inverse",
             [](const Iet& t, const std::string& x) { return rat_str(t.apply_inverse(rat_parse(x))); })
        .def("__repr__", [](const Iet& t) {
            return "Iet(" + std::to_string(t.size()) + " intervals, " + t.permutation().to_string() +
                   ")";
        });

    m.def("search_stages",
          [](int count) { return stages_out(search_stages(count)); }, py::arg("count"),
          "search admissible (m_k, n_k) driving parameters; returns decimal-string pairs");

    m.def("return_table_json",
          [](const std::vector<std::pair<std::string, std::string>>& stages, int depth) {
              return to_json(return_table(params_from(stages), depth)).dump();
          },
          py::arg("stages"), py::arg("depth"),
          "first-return time table b/c/d as a JSON string of exact decimal values");

    m.def("check_conditions",
          [](const std::vector<std::pair<std::string, std::string>>& stages, int depth) {
              ConditionReport r = check_conditions(params_from(stages), depth);
              py::dict out;
              out["all_ok"] = r.all_ok;
              out["units_ratio"] = rat_str(r.units_ratio);
              out["any_probable_prime"] = r.any_probable_prime;
              return out;
          },
          py::arg("stages"), py::arg("depth"));

    m.def("build_iet",
          [](const std::vector<std::pair<std::string, std::string>>& stages, int depth) {
              return build_iet(params_from(stages), depth);
          },
          py::arg("stages"), py::arg("depth"));

    m.def("matrix_json", [](const std::string& mm, const std::string& nn) {
        return to_json(matrix_A(int_parse(mm), int_parse(nn))).dump();
    });

    m.def("mixing_window",
          [](const Iet& T, const std::vector<std::pair<std::string, std::string>>& J1,
             const std::vector<std::pair<std::string, std::string>>& J2, long long n_lo,
             long long n_hi) {
              MixingWindowResult w = mixing_window_check(T, set_from(J1), set_from(J2), n_lo, n_hi);
              py::dict out;
              out["miss_count"] = w.miss_count;
              out["ns"] = w.ns;
              out["hits"] = std::vector<bool>(w.hits.begin(), w.hits.end());
              out["peak_pieces"] = w.peak_pieces;
              return out;
          },
          py::arg("iet"), py::arg("J1"), py::arg("J2"), py::arg("n_lo"), py::arg("n_hi"),
          "ground truth for T^n(J1) meeting J2 over an exhaustive window of n");

    m.def("first_window_json",
          [](const std::vector<std::pair<std::string, std::string>>& stages, int k, int depth,
             std::optional<long long> n_hi) {
              Lemma2Options opt;
              opt.spot_checks = 5;
              if (n_hi) opt.n_hi_override = *n_hi;
              return to_json(lemma2_check(params_from(stages), k, depth, opt)).dump();
          },
          py::arg("stages"), py::arg("k"), py::arg("depth"), py::arg("n_hi") = std::nullopt);

    m.def("obstruction_json",
          [](const std::vector<std::pair<std::string, std::string>>& stages, int depth) {
              return to_json(keane_obstruction_check(params_from(stages), depth)).dump();
          },
          py::arg("stages"), py::arg("depth"),
          "return-time obstruction report for the constructed map, exact");
}
