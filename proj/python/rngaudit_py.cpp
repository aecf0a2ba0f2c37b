#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "rngaudit/bitstream.hpp"
#include "rngaudit/errors.hpp"
#include "rngaudit/harness.hpp"
#include "rngaudit/level1.hpp"
#include "rngaudit/nist.hpp"
#include "rngaudit/numerics.hpp"
#include "rngaudit/tu01.hpp"

namespace py = pybind11;
using namespace rngaudit;

namespace {

Variant variant_of(const std::string& text) {
  try {
    return parse_variant(text);
  } catch (const std::exception& e) {
    throw py::value_error(e.what());
  }
}

TestDescriptor make_descriptor(const std::string& test, std::int64_t n,
                               const std::string& variant,
                               std::optional<std::int64_t> j_min) {
  TestDescriptor d;
  d.id = parse_test_id(test);
  d.n = n;
  d.variant = variant_of(variant);
  d.params.j_min = j_min;
  return d.resolved();
}

py::dict report_dict(const HarnessReport& r) {
  py::dict d;
  d["test"] = std::string(to_string(r.test.id));
  d["variant"] = std::string(to_string(r.test.variant));
  d["index"] = r.index;
  d["label"] = r.label;
  d["n"] = r.test.n;
  d["N"] = r.N;
  d["Nprime"] = r.Nprime;
  d["T"] = r.T;
  d["categories"] = r.categories;
  d["category_probs"] = r.category_probs;
  d["Y"] = r.Y;
  d["h"] = r.h;
  d["df"] = r.df;
  d["pvalue3"] = r.pvalue3;
  d["log10_pvalue3"] = r.log10_pvalue3;
  d["discard_count"] = r.discard_count;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Three-level randomness test audit";
  m.attr("__version__") = RNGAUDIT_VERSION;

  py::register_exception<InsufficientInput>(m, "InsufficientInput", PyExc_RuntimeError);
  py::register_exception<InapplicableTest>(m, "InapplicableTest", PyExc_RuntimeError);

  py::class_<BitSource>(m, "BitSource")
      .def(py::init([](const std::string& generator, const std::string& seed,
                       std::uint64_t stream) {
             return BitSource::make(GeneratorSpec::parse(generator, parse_hex(seed)),
                                    stream);
           }),
           py::arg("generator") = "mt19937", py::arg("seed") = "5eed",
           py::arg("stream") = 0)
      .def("take_bits", &BitSource::take_bits, py::arg("n"))
      .def("take_word", &BitSource::take_word)
      .def("uniform01", &BitSource::uniform01)
      .def_property_readonly("bits_consumed", &BitSource::bits_consumed);

  m.def("erfc", &rngaudit::erfc, py::arg("x"));
  m.def("igamc", &igamc, py::arg("a"), py::arg("x"));
  m.def("chi2_sf", &chi2_sf, py::arg("df"), py::arg("x"));
  m.def(
      "binom_pmf",
      [](std::int64_t n, double p, std::int64_t j) { return binom_logpmf(n, p, j).prob(); },
      py::arg("n"), py::arg("p"), py::arg("j"));
  m.def("excursion_pi", &nist::excursion_pi, py::arg("x"), py::arg("k"));
  m.def("savir2_cell_probs", &tu01::savir2_cell_probs, py::arg("m"), py::arg("t"));

  m.def(
      "build_categories",
      [](std::int64_t N, double alpha, std::int64_t Nprime, double min_expect) {
        const Categorization cat = build_categories(N, alpha, Nprime, min_expect);
        std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
        for (std::size_t i = 0; i < cat.size(); ++i) ranges.emplace_back(cat.first[i], cat.last[i]);
        return py::make_tuple(ranges, cat.probs);
      },
      py::arg("N"), py::arg("alpha") = 0.01, py::arg("Nprime") = 1000,
      py::arg("min_expect") = 5.0,
      "Returns ([(first, last), ...], probs).");

  m.def("test_ids", [] {
    std::vector<std::string> out;
    for (int i = 0; i <= static_cast<int>(TestId::kIdentity); ++i) {
      out.emplace_back(to_string(static_cast<TestId>(i)));
    }
    return out;
  });

  m.def(
      "run_test",
      [](const std::string& test, const std::vector<std::uint8_t>& bits,
         const std::string& variant) {
        const TestDescriptor d =
            make_descriptor(test, static_cast<std::int64_t>(bits.size()), variant, std::nullopt);
        if (!is_block_test(d.id)) throw py::value_error(test + " does not take a bit block");
        return run_standard_test(d, bits).pvalues;
      },
      py::arg("test"), py::arg("bits"), py::arg("variant") = "original",
      "Level-1 p-values of a NIST test on an explicit bit block.");

  m.def(
      "sample_corr_test",
      [](const std::vector<double>& reals, int lag, const std::string& variant) {
        return tu01::sample_corr_test(reals, lag, variant_of(variant));
      },
      py::arg("reals"), py::arg("lag") = 1, py::arg("variant") = "modified");

  m.def(
      "run_three_level",
      [](const std::string& test, std::int64_t n, const std::string& variant,
         std::int64_t N, std::int64_t Nprime, const std::string& generator,
         const std::string& seed, double alpha, int threads,
         std::optional<std::int64_t> j_min) {
        const TestDescriptor d = make_descriptor(test, n, variant, j_min);
        HarnessConfig c;
        c.generator = GeneratorSpec::parse(generator, parse_hex(seed));
        c.N = N;
        c.Nprime = Nprime;
        c.alpha = alpha;
        c.threads = threads;
        std::vector<HarnessReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_three_level(d, c);
        }
        py::list out;
        for (const HarnessReport& r : reports) out.append(report_dict(r));
        return out;
      },
      py::arg("test"), py::arg("n") = 1'000'000, py::arg("variant") = "original",
      py::arg("N") = 100, py::arg("Nprime") = 100, py::arg("generator") = "mt19937",
      py::arg("seed") = "5eed", py::arg("alpha") = 0.01, py::arg("threads") = 1,
      py::arg("j_min") = std::nullopt,
      "Three-level run; one dict per p-value index of the test.");
}
