#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lotsub/baselines.hpp"
#include "lotsub/deform.hpp"
#include "lotsub/io.hpp"
#include "lotsub/ot.hpp"
#include "lotsub/subspace.hpp"

namespace py = pybind11;
using namespace lotsub;

namespace {

LabeledDataset to_dataset(const std::vector<RowMatrix>& points, const std::vector<int>& labels) {
  if (points.size() != labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "points and labels differ in length");
  }
  LabeledDataset ds;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ds.samples.push_back({PointSet(points[i]), labels[i]});
    ds.num_classes = std::max(ds.num_classes, labels[i] + 1);
  }
  return ds;
}

py::tuple from_dataset(const LabeledDataset& ds) {
  std::vector<RowMatrix> points;
  std::vector<int> labels;
  for (const auto& s : ds.samples) {
    points.push_back(s.points.points());
    labels.push_back(s.label);
  }
  return py::make_tuple(points, labels);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linear optimal transport embeddings and nearest-subspace classification of point sets";

  py::register_exception<Error>(m, "LotsubError", PyExc_ValueError);

  m.def("cost_matrix", [](const RowMatrix& s, const RowMatrix& r) { return cost_matrix(PointSet(s), PointSet(r)).entries; },
        py::arg("source"), py::arg("reference"));
  m.def(
      "solve_lap",
      [](const RowMatrix& cost) {
        const Assignment a = solve_lap(CostMatrix{cost});
        return py::make_tuple(a.perm, a.total_cost);
      },
      py::arg("cost"), "Optimal assignment (perm[j] = source index matched to reference j, mean cost).");
  m.def("wasserstein2", [](const RowMatrix& s, const RowMatrix& r) { return wasserstein2(PointSet(s), PointSet(r)); },
        py::arg("source"), py::arg("reference"), "Squared 2-Wasserstein distance between uniform point sets.");

  py::class_<LotEmbedding>(m, "LotEmbedding")
      .def_readonly("matrix", &LotEmbedding::matrix)
      .def_readonly("reference_id", &LotEmbedding::reference_id)
      .def("flat", &LotEmbedding::flat);
  m.def("lot_transform", [](const RowMatrix& s, const RowMatrix& r) { return lot_transform(PointSet(s), PointSet(r)); },
        py::arg("source"), py::arg("reference"));
  m.def("lot_distance", &lot_distance, py::arg("a"), py::arg("b"));

  m.def("gem_embed", [](const RowMatrix& p, double power) { return gem_embed(PointSet(p), power).vector; },
        py::arg("points"), py::arg("power") = 1.0);
  m.def("cov_embed", [](const RowMatrix& p) { return cov_embed(PointSet(p)).vector; }, py::arg("points"));
  m.def("fsort_embed", [](const RowMatrix& p, std::size_t k) { return fsort_embed(PointSet(p), k).vector; },
        py::arg("points"), py::arg("k") = 16);

  m.def("builtin_templates", [](int k, std::size_t n, std::uint64_t seed) {
        std::vector<RowMatrix> out;
        for (const auto& t : builtin_templates(k, n, seed)) out.push_back(t.points());
        return out;
      },
      py::arg("classes"), py::arg("points"), py::arg("seed") = 0);
  m.def(
      "synth_dataset",
      [](int classes, std::size_t points, int n_train, int n_test, std::uint64_t seed, double translate_max,
         double scale_max, double shear_max, double jitter_std) {
        SynthSpec spec;
        spec.templates = builtin_templates(classes, points, seed);
        spec.n_train = n_train;
        spec.n_test = n_test;
        spec.config_train = DeformationConfig{translate_max, scale_max, shear_max, jitter_std};
        spec.config_test = spec.config_train;
        spec.seed = seed;
        const SplitDatasets d = synth_dataset(spec);
        return py::make_tuple(from_dataset(d.train), from_dataset(d.test));
      },
      py::arg("classes") = 10, py::arg("points") = 256, py::arg("n_train") = 2, py::arg("n_test") = 25,
      py::arg("seed") = 0, py::arg("translate_max") = 1.0, py::arg("scale_max") = 2.0, py::arg("shear_max") = 0.25,
      py::arg("jitter_std") = 0.0,
      "Returns ((train_points, train_labels), (test_points, test_labels)).");

  py::class_<LotNsModel>(m, "Model")
      .def_readonly("num_points", &LotNsModel::num_points)
      .def_readonly("dim", &LotNsModel::dim)
      .def_readonly("variance_fraction", &LotNsModel::variance_fraction)
      .def_property_readonly("num_classes", &LotNsModel::num_classes)
      .def_property_readonly("flags", [](const LotNsModel& mdl) { return mdl.flags.str(); })
      .def_property_readonly("basis_sizes",
                             [](const LotNsModel& mdl) {
                               std::vector<Eigen::Index> sizes;
                               for (const auto& c : mdl.classes) sizes.push_back(c.basis.cols());
                               return sizes;
                             })
      .def("basis", [](const LotNsModel& mdl, int k) { return mdl.classes.at(static_cast<std::size_t>(k)).basis; })
      .def("reference",
           [](const LotNsModel& mdl, int k) { return mdl.classes.at(static_cast<std::size_t>(k)).reference.points(); })
      .def(
          "predict",
          [](const LotNsModel& mdl, const RowMatrix& p) {
            const Prediction pr = predict(PointSet(p), mdl);
            return py::make_tuple(pr.label, pr.scores);
          },
          py::arg("points"), "Returns (label, squared residual per class).")
      .def("save", [](const LotNsModel& mdl, const std::filesystem::path& path) { save_model(mdl, path); })
      .def_static("load", &load_model, py::arg("path"))
      .def("serialize", &serialize_model)
      .def_static("deserialize", &deserialize_model, py::arg("text"));

  m.def(
      "train",
      [](const std::vector<RowMatrix>& points, const std::vector<int>& labels, const std::string& flags,
         double variance, double reference_jitter, std::uint64_t seed) {
        TrainConfig cfg;
        cfg.flags = InvarianceFlags::parse(flags);
        cfg.variance_fraction = variance;
        cfg.reference_jitter = reference_jitter;
        cfg.seed = seed;
        return train(to_dataset(points, labels), cfg);
      },
      py::arg("points"), py::arg("labels"), py::arg("flags") = "T,D,S", py::arg("variance") = 0.99,
      py::arg("reference_jitter") = 0.1, py::arg("seed") = 0);
}
