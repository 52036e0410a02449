#include "mcseg/cli.hpp"
#include "mcseg/config.hpp"
#include "mcseg/error.hpp"
#include "mcseg/eval.hpp"
#include "mcseg/graph.hpp"
#include "mcseg/io.hpp"
#include "mcseg/labels.hpp"
#include "mcseg/losses.hpp"
#include "mcseg/multicut.hpp"
#include "mcseg/pipeline.hpp"
#include "mcseg/preprocess.hpp"
#include "mcseg/synthetic.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <numeric>
#include <sstream>
#include <tuple>

namespace py = pybind11;
using namespace mcseg;

namespace {

Config make_config(const std::map<std::string, std::string>& overrides) {
  Config config;
  for (const auto& [key, value] : overrides) config.set(key, value);
  return config;
}

PointCloud make_cloud(const Points& positions, const std::optional<Points>& colors) {
  PointCloud cloud{positions, colors ? *colors : Points::Constant(positions.rows(), 3, 0.5)};
  return cloud;
}

WeightedGraph make_graph(std::size_t n, const std::vector<std::tuple<Index, Index, double>>& edges) {
  WeightedGraph g;
  g.vertex_count = n;
  for (const auto& [u, v, w] : edges) g.edges.push_back({std::min(u, v), std::max(u, v), w});
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  return g;
}

std::vector<std::tuple<Index, Index, double>> edge_tuples(const WeightedGraph& g) {
  std::vector<std::tuple<Index, Index, double>> out;
  out.reserve(g.edges.size());
  for (const Edge& e : g.edges) out.emplace_back(e.u, e.v, e.weight);
  return out;
}

py::dict loss_dict(const losses::LossValue& v) {
  py::dict d;
  d["value"] = v.value;
  d["grad"] = v.grad;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Label-free point-cloud instance segmentation";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<SizeError>(m, "SizeError", base.ptr());
  py::register_exception<DefinednessError>(m, "DefinednessError", base.ptr());

  // io
  m.def("read_ply", [](const std::filesystem::path& path) {
    auto cloud = io::read_ply(path);
    return py::make_tuple(cloud.positions, cloud.colors);
  }, py::arg("path"), "Returns (positions, colors) as N x 3 arrays; colors in [0,1].");
  m.def("write_ply", [](const std::filesystem::path& path, const Points& positions,
                        const std::optional<Points>& colors, const std::optional<LabelMap>& labels) {
    io::write_ply(make_cloud(positions, colors), labels, path);
  }, py::arg("path"), py::arg("positions"), py::arg("colors") = py::none(),
     py::arg("labels") = py::none());
  m.def("read_labels", &io::read_labels, py::arg("path"));
  m.def("write_labels", &io::write_labels, py::arg("labels"), py::arg("path"));
  m.def("read_features", &io::read_features, py::arg("path"));
  m.def("write_features", &io::write_features, py::arg("features"), py::arg("path"));

  // preprocess
  m.def("segment_planes", [](const Points& positions, double dist_thresh, double min_inlier_frac,
                             int max_planes, int iters, std::uint64_t seed) {
    const auto planes = preprocess::segment_planes(
        positions, {dist_thresh, min_inlier_frac, max_planes, iters, seed});
    py::list out;
    for (const auto& p : planes) {
      py::dict d;
      d["normal"] = Eigen::Vector3d(p.normal);
      d["offset"] = p.offset;
      d["inliers"] = p.inliers;
      out.append(d);
    }
    return out;
  }, py::arg("positions"), py::arg("dist_thresh") = 0.025, py::arg("min_inlier_frac") = 0.05,
     py::arg("max_planes") = 8, py::arg("iters") = 1000, py::arg("seed") = 0);
  m.def("farthest_point_sample", &preprocess::farthest_point_sample, py::arg("positions"),
        py::arg("subset"), py::arg("target_count"), py::arg("start"));
  m.def("estimate_normals", [](const Points& positions, const IndexList& subset, std::size_t k) {
    auto n = preprocess::estimate_normals(positions, subset, k);
    return py::make_tuple(n.normals, n.degenerate);
  }, py::arg("positions"), py::arg("subset"), py::arg("k") = 16);

  // graph / affinity
  m.def("knn_graph", [](const Points& positions, std::size_t k) {
    return edge_tuples(affinity::build_knn_graph(positions, k));
  }, py::arg("positions"), py::arg("k") = 4, "Undirected kNN edges as (u, v, 0.0) with u < v.");
  m.def("normalize_channel", [](const std::vector<double>& v) {
    return affinity::normalize_channel(v);
  }, py::arg("values"));
  m.def("affinity_graph", [](const Points& positions, const std::optional<Points>& colors,
                             const std::map<std::string, std::string>& config) {
    const auto cloud = make_cloud(positions, colors);
    IndexList all(cloud.size());
    std::iota(all.begin(), all.end(), Index{0});
    return edge_tuples(pipeline::affinity_graph(cloud, nullptr, all, make_config(config)));
  }, py::arg("positions"), py::arg("colors") = py::none(),
     py::arg("config") = std::map<std::string, std::string>{});

  // multicut
  m.def("solve_gaec", [](std::size_t n, const std::vector<std::tuple<Index, Index, double>>& edges) {
    return multicut::solve_gaec(make_graph(n, edges)).cluster_of;
  }, py::arg("vertex_count"), py::arg("edges"));
  m.def("exact_solve", [](std::size_t n, const std::vector<std::tuple<Index, Index, double>>& edges) {
    return multicut::exact_solve(make_graph(n, edges)).cluster_of;
  }, py::arg("vertex_count"), py::arg("edges"));
  m.def("objective", [](std::size_t n, const std::vector<std::tuple<Index, Index, double>>& edges,
                        const std::vector<Index>& cluster_of) {
    return multicut::objective(make_graph(n, edges), multicut::canonicalize(cluster_of));
  }, py::arg("vertex_count"), py::arg("edges"), py::arg("cluster_of"));

  // labels
  m.def("upsample_majority", &labels::upsample_majority, py::arg("query_positions"),
        py::arg("sampled_positions"), py::arg("sampled_labels"), py::arg("k") = 4);
  m.def("canonicalize_labels", &labels::canonicalize, py::arg("labels"));

  // pipeline
  m.def("segment", [](const Points& positions, const std::optional<Points>& colors,
                      std::optional<double> sigma, const std::map<std::string, std::string>& config) {
    const auto cloud = make_cloud(positions, colors);
    const Config cfg = make_config(config);
    const auto scene = pipeline::prepare(cloud, nullptr, cfg);
    return pipeline::segment(cloud, scene, sigma.value_or(cfg.sigma_low), cfg);
  }, py::arg("positions"), py::arg("colors") = py::none(), py::arg("sigma") = py::none(),
     py::arg("config") = std::map<std::string, std::string>{});
  m.def("pseudo_labels", [](const Points& positions, const std::optional<Points>& colors,
                            const std::map<std::string, std::string>& config) {
    const auto cloud = make_cloud(positions, colors);
    const Config cfg = make_config(config);
    const auto scene = pipeline::prepare(cloud, nullptr, cfg);
    return py::make_tuple(pipeline::segment(cloud, scene, cfg.sigma_low, cfg),
                          pipeline::segment(cloud, scene, cfg.sigma_high, cfg));
  }, py::arg("positions"), py::arg("colors") = py::none(),
     py::arg("config") = std::map<std::string, std::string>{});
  m.def("refine", [](const Points& positions, const std::optional<Points>& colors,
                     const LabelMap& base_labels, const LabelMap& under_labels,
                     const std::map<std::string, std::string>& config) {
    const auto cloud = make_cloud(positions, colors);
    const Config cfg = make_config(config);
    const auto graph = pipeline::consolidation_graph(cloud, nullptr, base_labels, cfg);
    return labels::consolidate(base_labels, under_labels, graph, cfg.consolidate_params());
  }, py::arg("positions"), py::arg("colors"), py::arg("base"), py::arg("under"),
     py::arg("config") = std::map<std::string, std::string>{});

  // losses
  m.def("dice_loss", [](const std::vector<double>& p, const std::vector<double>& t) {
    return loss_dict(losses::dice_loss(p, t));
  }, py::arg("pred"), py::arg("target"));
  m.def("bce_loss", [](const std::vector<double>& p, const std::vector<double>& t) {
    return loss_dict(losses::bce_loss(p, t));
  }, py::arg("pred"), py::arg("target"));
  m.def("center_loss", [](const Points& x, const std::vector<double>& p, const std::vector<double>& t) {
    return loss_dict(losses::center_loss(x, p, t));
  }, py::arg("positions"), py::arg("pred"), py::arg("target"));
  m.def("box_loss", [](const Points& x, const std::vector<double>& p, const std::vector<double>& t,
                       double beta) {
    return loss_dict(losses::box_loss(x, p, t, beta));
  }, py::arg("positions"), py::arg("pred"), py::arg("target"), py::arg("beta") = losses::kDefaultBeta);

  // eval
  m.def("evaluate", [](const LabelMap& pred, const LabelMap& gt) {
    if (pred.size() != gt.size()) throw DataError("prediction and ground truth lengths differ");
    const auto r = eval::evaluate(eval::predictions_from_labels(pred), labels::labels_to_masks(gt));
    py::dict d;
    d["ap"] = r.ap;
    d["ap50"] = r.ap50;
    d["ap25"] = r.ap25;
    py::dict per;
    for (std::size_t i = 0; i < eval::kThresholdCount; ++i) per[py::float_(eval::threshold(i))] = r.per_threshold[i];
    d["per_threshold"] = per;
    return d;
  }, py::arg("pred"), py::arg("gt"));

  // synthetic scenes
  m.def("planted_blobs", [](std::uint64_t seed, int blobs, int points_per_blob, bool split) {
    synthetic::BlobSceneParams p;
    p.seed = seed;
    p.blobs = blobs;
    p.points_per_blob = points_per_blob;
    p.split_blobs = split;
    auto s = synthetic::planted_blobs(p);
    return py::make_tuple(s.cloud.positions, s.cloud.colors, s.ground_truth);
  }, py::arg("seed") = 0, py::arg("blobs") = 5, py::arg("points_per_blob") = 200,
     py::arg("split") = false);

  m.def("config_defaults", [] {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : Config{}.entries()) out[k] = v;
    return out;
  });

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    std::vector<std::string> argv{"mcseg"};
    argv.insert(argv.end(), args.begin(), args.end());
    const int code = cli::run(argv, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
