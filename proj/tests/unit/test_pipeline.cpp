#include "mcseg/config.hpp"
#include "mcseg/error.hpp"
#include "mcseg/manifest.hpp"
#include "mcseg/pipeline.hpp"
#include "mcseg/synthetic.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <fstream>
#include <set>

using namespace mcseg;

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const Config c;
    CHECK(c.sigma_low == 0.9);
    CHECK(c.sigma_high == 1.2);
    CHECK(c.graph_k1 == 4);
    CHECK(c.labels_k2 == 4);
    CHECK(c.fps_ratio == 0.5);
    CHECK(c.normals_k == 16);
    CHECK(c.affinity_weights(false).emb == 0.0);
    CHECK(c.affinity_weights(true).emb == 1.0);
    CHECK(c.affinity_weights(true).norm == 1.0);
  }

  TEST_CASE("text overrides, comments and errors") {
    Config c;
    c.merge_text("# comment\n graph.k1 = 6  \nsigma.low=0.85 # trailing\n\naffinity.alpha_emb = 0\n");
    CHECK(c.graph_k1 == 6);
    CHECK(c.sigma_low == 0.85);
    CHECK(c.affinity_weights(true).emb == 0.0);
    CHECK_THROWS_AS(c.merge_text("nonsense"), ConfigError);
    CHECK_THROWS_AS(c.merge_text("graph.k9 = 1"), ConfigError);
    CHECK_THROWS_AS(c.set("fps.ratio", "0"), ConfigError);
    CHECK_THROWS_AS(c.set("fps.ratio", "1.5"), ConfigError);
    CHECK_THROWS_AS(c.set("graph.k1", "0"), ConfigError);
    CHECK_THROWS_AS(c.set("graph.k1", "four"), ConfigError);
    CHECK_THROWS_AS(c.set("sigma.low", "inf"), ConfigError);
    CHECK_NOTHROW(c.set("consolidate.cover_frac", "1.01"));
    try {
      c.merge_text("seed = 1\nnormals.k = 2\n", "cfg.txt");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("cfg.txt:2") != std::string::npos);
    }
  }

  TEST_CASE("text form round trips every key") {
    Config a;
    a.set("plane.iters", "77");
    a.set("affinity.alpha_emb", "0.125");
    a.set("loss.beta", "12.5");
    a.set("seed", "18446744073709551615");
    Config b;
    b.merge_text(a.to_text());
    CHECK(b.entries() == a.entries());
    std::set<std::string> keys;
    for (const auto& [k, v] : a.entries()) keys.insert(k);
    CHECK(keys.size() == Config::keys().size());
  }
}

TEST_SUITE("manifest") {
  TEST_CASE("json round trip and digests") {
    const auto dir = testing::scratch_dir("manifest");
    std::ofstream(dir / "in.txt") << "abc";
    CHECK(file_sha256(dir / "in.txt") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    Manifest m;
    m.command = "segment";
    m.inputs["input"] = (dir / "in.txt").string();
    m.digests["input"] = file_sha256(dir / "in.txt");
    m.outputs["labels"] = "out.labels";
    m.parameters["sigma"] = 0.9;
    m.config.set("graph.k1", "5");
    m.save(dir / "m.json");
    const auto back = Manifest::load(dir / "m.json");
    CHECK(back.command == m.command);
    CHECK(back.inputs == m.inputs);
    CHECK(back.digests == m.digests);
    CHECK(back.outputs == m.outputs);
    CHECK(back.parameters == m.parameters);
    CHECK(back.config.entries() == m.config.entries());
    CHECK(back.to_json() == m.to_json());
    CHECK_THROWS_AS(Manifest::from_json("{not json"), FormatError);
  }
}

TEST_SUITE("synthetic") {
  TEST_CASE("planted blobs match their construction") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      synthetic::BlobSceneParams p;
      p.seed = seed;
      const auto s = synthetic::planted_blobs(p);
      REQUIRE(s.cloud.size() == 7000);
      CHECK_NOTHROW(check_cloud(s.cloud));
      std::vector<Eigen::Vector3d> centers(5, Eigen::Vector3d::Zero());
      std::vector<int> counts(6, 0);
      for (std::size_t i = 0; i < s.cloud.size(); ++i) {
        const Label l = s.ground_truth[i];
        ++counts[l];
        if (l == 0) {
          CHECK(s.cloud.positions(i, 2) == 0.0);
        } else {
          centers[l - 1] += s.cloud.positions.row(i).transpose();
        }
      }
      CHECK(counts == std::vector<int>{6000, 200, 200, 200, 200, 200});
      for (auto& c : centers) c /= 200.0;
      for (int a = 0; a < 5; ++a) {
        for (int b = a + 1; b < 5; ++b) CHECK((centers[a] - centers[b]).norm() > 0.9);
      }
      const auto again = synthetic::planted_blobs(p);
      CHECK(again.cloud.positions == s.cloud.positions);
      CHECK(again.ground_truth == s.ground_truth);
    }
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("planted scene: ground removed, blobs never share an instance") {
    synthetic::BlobSceneParams p;
    p.seed = 1;
    const auto s = synthetic::planted_blobs(p);
    const Config c;
    const auto scene = pipeline::prepare(s.cloud, nullptr, c);
    CHECK(scene.split.bg.size() == 6000);
    CHECK(scene.sampled.size() == 500);
    for (const Edge& e : scene.graph.edges) {
      CHECK(s.ground_truth[scene.sampled[e.u]] == s.ground_truth[scene.sampled[e.v]]);
    }

    const auto labels = pipeline::segment(s.cloud, scene, c.sigma_low, c);
    std::map<Label, std::set<Label>> gt_of;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      CHECK((labels[i] == 0) == (s.ground_truth[i] == 0));
      if (labels[i]) gt_of[labels[i]].insert(s.ground_truth[i]);
    }
    for (const auto& [l, g] : gt_of) CHECK(g.size() == 1);
    CHECK(pipeline::instance_count(labels) >= 5);
  }

  TEST_CASE("empty foreground gives all background and a warning") {
    Points flat(400, 3);
    for (int i = 0; i < 400; ++i) flat.row(i) << (i % 20) * 0.1, (i / 20) * 0.1, 0.0;
    const PointCloud cloud{flat, Points::Constant(400, 3, 0.5)};
    std::vector<std::string> warnings;
    pipeline::Hooks hooks;
    hooks.on_warning = [&](std::string_view w) { warnings.emplace_back(w); };
    const Config c;
    const auto scene = pipeline::prepare(cloud, nullptr, c, hooks);
    CHECK(pipeline::segment(cloud, scene, 0.9, c) == LabelMap(400, 0));
    CHECK_FALSE(warnings.empty());
  }

  TEST_CASE("embedding weight without features is a configuration error") {
    const PointCloud cloud{testing::random_cloud(50, 1), Points::Constant(50, 3, 0.5)};
    Config c;
    c.set("affinity.alpha_emb", "1");
    CHECK_THROWS_AS(pipeline::prepare(cloud, nullptr, c), ConfigError);
    FeatureMatrix f = FeatureMatrix::Ones(50, 4);
    CHECK_NOTHROW(pipeline::prepare(cloud, &f, c));
    FeatureMatrix wrong = FeatureMatrix::Ones(49, 4);
    CHECK_THROWS_AS(pipeline::prepare(cloud, &wrong, c), DataError);
  }

  TEST_CASE("equal sigmas give identical labels; higher sigma never adds instances here") {
    synthetic::BlobSceneParams p;
    p.split_blobs = true;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      p.seed = seed;
      const auto s = synthetic::planted_blobs(p);
      const Config c;
      const auto scene = pipeline::prepare(s.cloud, nullptr, c);
      CHECK(pipeline::segment(s.cloud, scene, 1.0, c) == pipeline::segment(s.cloud, scene, 1.0, c));
      CHECK(pipeline::instance_count(pipeline::segment(s.cloud, scene, c.sigma_low, c)) >=
            pipeline::instance_count(pipeline::segment(s.cloud, scene, c.sigma_high, c)));
    }
  }

  TEST_CASE("consolidation graph uses cloud indices of labeled points") {
    synthetic::BlobSceneParams p;
    p.seed = 2;
    const auto s = synthetic::planted_blobs(p);
    const auto g = pipeline::consolidation_graph(s.cloud, nullptr, s.ground_truth, Config{});
    CHECK(g.vertex_count == s.cloud.size());
    CHECK_NOTHROW(check_graph(g));
    for (const Edge& e : g.edges) {
      CHECK(s.ground_truth[e.u] != 0);
      CHECK(s.ground_truth[e.v] != 0);
    }
    CHECK_THROWS_AS(pipeline::consolidation_graph(s.cloud, nullptr, LabelMap(3, 1), Config{}), DataError);
  }
}
