#include "doctest.h"

#include <json.hpp>
#include <sstream>

#include "dhash/cli.hpp"
#include "dhash/io.hpp"
#include "support.hpp"

using namespace dhash;
using dhash::testing::TempDir;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("missing data file") {
  TempDir dir("cli-missing");
  const Outcome o = run_cli({"train", "--data", (dir / "nope.csv").string(), "--out",
                             (dir / "m.dhnn").string()});
  CHECK(o.status != 0);
  CHECK(o.err.find("dhash:") != std::string::npos);
  CHECK(o.err.find("nope.csv") != std::string::npos);
}

TEST_CASE("train then encode reproduces the training codes") {
  TempDir dir("cli-train");
  const auto data = testing::gaussian_clusters(8, 60, 3, 3.0, 1);
  testing::write_csv(dir / "x.csv", data.x);
  const Outcome t = run_cli({"train", "--data", (dir / "x.csv").string(), "--bits", "4",
                             "--layers", "6,4", "--max-iter", "2", "--out",
                             (dir / "m.dhnn").string(), "--report", (dir / "r.json").string()});
  REQUIRE_MESSAGE(t.status == 0, t.err);
  const auto report = read_json(dir / "r.json");
  CHECK(report["config"]["layer_sizes"] == nlohmann::json({8, 6, 4, 8}));
  CHECK(report["loss_trace"].size() == 3);
  CHECK(report["codes"]["count"] == 60);
  CHECK(report.contains("timings"));

  const Outcome e = run_cli({"encode", "--model", (dir / "m.dhnn").string(), "--data",
                             (dir / "x.csv").string(), "--out", (dir / "again.codes").string(),
                             "--report", (dir / "e.json").string()});
  REQUIRE_MESSAGE(e.status == 0, e.err);
  CHECK(read_file(dir / "again.codes") == read_file(dir / "m.dhnn.codes"));
  CHECK(read_json(dir / "e.json")["codes"]["fnv1a64"] == report["codes"]["fnv1a64"]);
}

TEST_CASE("supervised training from a labelled CSV") {
  TempDir dir("cli-sup");
  const auto data = testing::gaussian_clusters(8, 60, 2, 3.0, 2);
  testing::write_csv(dir / "x.csv", data.x, &data.labels);
  const Outcome t = run_cli({"train", "--mode", "sup", "--data", (dir / "x.csv").string(),
                             "--label-column", "--bits", "4", "--layers", "6,4", "--ns", "20",
                             "--max-iter", "2", "--out", (dir / "m.dhnn").string(), "--report",
                             (dir / "r.json").string(), "--no-timings"});
  REQUIRE_MESSAGE(t.status == 0, t.err);
  const auto report = read_json(dir / "r.json");
  CHECK(report["training_samples"] == 40);
  CHECK_FALSE(report.contains("timings"));
  CHECK(load_model(dir / "m.dhnn").mode == Mode::supervised);
  CHECK(load_codes(dir / "m.dhnn.codes").count() == 60);
}

TEST_CASE("supervised training without labels fails") {
  TempDir dir("cli-nolabels");
  const auto data = testing::gaussian_clusters(8, 30, 2, 3.0, 3);
  testing::write_csv(dir / "x.csv", data.x);
  const Outcome t = run_cli({"train", "--mode", "sup", "--data", (dir / "x.csv").string(),
                             "--bits", "4", "--out", (dir / "m.dhnn").string()});
  CHECK(t.status != 0);
  CHECK(t.err.find("labels") != std::string::npos);
}

TEST_CASE("config file values yield to flags") {
  TempDir dir("cli-config");
  const auto data = testing::gaussian_clusters(8, 50, 3, 3.0, 4);
  testing::write_csv(dir / "x.csv", data.x);
  testing::write_text(dir / "c.cfg",
                      "# small run\nbits = 2\nlayers = 6,2\nmax-iter = 1\nlambda2 = 0.5\nno-timings = true\n");
  const Outcome t = run_cli({"train", "--config", (dir / "c.cfg").string(), "--data",
                             (dir / "x.csv").string(), "--bits", "4", "--layers", "5,4", "--out",
                             (dir / "m.dhnn").string(), "--report", (dir / "r.json").string()});
  REQUIRE_MESSAGE(t.status == 0, t.err);
  const auto cfg = read_json(dir / "r.json")["config"];
  CHECK(cfg["bits"] == 4);
  CHECK(cfg["max_iter"] == 1);
  CHECK(cfg["lambda2"] == 0.5);
  CHECK(cfg["layer_sizes"] == nlohmann::json({8, 5, 4, 8}));
  CHECK_FALSE(read_json(dir / "r.json").contains("timings"));
}

TEST_CASE("config errors name the field") {
  TempDir dir("cli-badcfg");
  const auto data = testing::gaussian_clusters(8, 30, 3, 3.0, 5);
  testing::write_csv(dir / "x.csv", data.x);
  testing::write_text(dir / "c.cfg", "bitz = 4\n");
  Outcome t = run_cli({"train", "--config", (dir / "c.cfg").string(), "--data",
                       (dir / "x.csv").string(), "--out", (dir / "m.dhnn").string()});
  CHECK(t.status != 0);
  CHECK(t.err.find("bitz") != std::string::npos);
  t = run_cli({"train", "--data", (dir / "x.csv").string(), "--bits", "4", "--layers", "6,4",
               "--max-iter", "0", "--out", (dir / "m.dhnn").string()});
  CHECK(t.status != 0);
  CHECK(t.err.find("max_iter") != std::string::npos);
  t = run_cli({"train", "--data", (dir / "x.csv").string(), "--bits", "4", "--layers", "6,3",
               "--out", (dir / "m.dhnn").string()});
  CHECK(t.status != 0);
  CHECK(t.err.find("layers") != std::string::npos);
}

TEST_CASE("encode handles empty and mismatched input") {
  TempDir dir("cli-encode");
  const Model m{Mode::unsupervised,
                random_network({3, 2, 3}, {Activation::sigmoid, Activation::linear}, 1.0, 1)};
  save_model(m, dir / "m.dhnn");
  testing::write_text(dir / "empty.csv", "");
  Outcome o = run_cli({"encode", "--model", (dir / "m.dhnn").string(), "--data",
                       (dir / "empty.csv").string(), "--out", (dir / "e.codes").string()});
  REQUIRE_MESSAGE(o.status == 0, o.err);
  const BinaryCodes c = load_codes(dir / "e.codes");
  CHECK(c.count() == 0);
  CHECK(c.bits() == 2);

  testing::write_text(dir / "wide.csv", "1,2,3,4\n");
  o = run_cli({"encode", "--model", (dir / "m.dhnn").string(), "--data",
               (dir / "wide.csv").string(), "--out", (dir / "w.codes").string()});
  CHECK(o.status != 0);
  CHECK(o.err.find("dimension") != std::string::npos);
}

TEST_CASE("eval prints the 5/6 fixture") {
  TempDir dir("cli-eval");
  Matrix db(3, 3);
  db << 1, -1, -1, 1, 1, -1, 1, 1, 1;
  save_codes(BinaryCodes::from_signs(db), dir / "db.codes");
  save_codes(BinaryCodes::from_signs(Matrix::Ones(3, 1)), dir / "q.codes");
  save_ground_truth({{0, 2}}, dir / "gt.bin");
  const Outcome o = run_cli({"eval", "--db-codes", (dir / "db.codes").string(), "--query-codes",
                             (dir / "q.codes").string(), "--gt", (dir / "gt.bin").string(),
                             "--radius", "1", "--report", (dir / "e.json").string()});
  REQUIRE_MESSAGE(o.status == 0, o.err);
  CHECK(o.out.find("mAP: 0.8333") != std::string::npos);
  CHECK(o.out.find("precision@r=1: 0.5000") != std::string::npos);
  const auto j = read_json(dir / "e.json");
  CHECK(j["mAP"].get<double>() == doctest::Approx(5.0 / 6.0));
  CHECK(j["radii"] == nlohmann::json({1}));
}

TEST_CASE("eval of distinct codes against themselves") {
  TempDir dir("cli-self");
  BinaryCodes c(5, 9);
  GroundTruth self(9);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 5; ++j) c.set_bit(j, i, ((i * 3) >> j) & 1);
    self[i] = {i};
  }
  save_codes(c, dir / "c.codes");
  save_ground_truth(self, dir / "gt.bin");
  const Outcome o = run_cli({"eval", "--db-codes", (dir / "c.codes").string(), "--query-codes",
                             (dir / "c.codes").string(), "--gt", (dir / "gt.bin").string()});
  REQUIRE_MESSAGE(o.status == 0, o.err);
  CHECK(o.out.find("mAP: 1.0000") != std::string::npos);
  CHECK(o.out.find("precision@r=3") != std::string::npos);
}

TEST_CASE("eval rejects mismatched codes and oversized radii") {
  TempDir dir("cli-evalerr");
  save_codes(BinaryCodes(4, 2), dir / "a.codes");
  save_codes(BinaryCodes(5, 1), dir / "b.codes");
  save_ground_truth({{0}}, dir / "gt.bin");
  Outcome o = run_cli({"eval", "--db-codes", (dir / "a.codes").string(), "--query-codes",
                       (dir / "b.codes").string(), "--gt", (dir / "gt.bin").string()});
  CHECK(o.status != 0);
  save_codes(BinaryCodes(4, 1), dir / "q.codes");
  o = run_cli({"eval", "--db-codes", (dir / "a.codes").string(), "--query-codes",
               (dir / "q.codes").string(), "--gt", (dir / "gt.bin").string(), "--radius", "5"});
  CHECK(o.status != 0);
  CHECK(o.err.find("radius") != std::string::npos);
}

TEST_CASE("ground-truth subcommand") {
  TempDir dir("cli-gt");
  Matrix db(1, 3);
  db << 0, 1, 10;
  Matrix q(1, 1);
  q << 0.4;
  testing::write_csv(dir / "db.csv", db);
  testing::write_csv(dir / "q.csv", q);
  Outcome o = run_cli({"gt", "--data", (dir / "db.csv").string(), "--queries",
                       (dir / "q.csv").string(), "--gt-k", "2", "--out", (dir / "gt.bin").string()});
  REQUIRE_MESSAGE(o.status == 0, o.err);
  CHECK(load_ground_truth(dir / "gt.bin") == GroundTruth{{0, 1}});

  save_idx_labels({0, 1, 0, 2}, dir / "db.lbl");
  save_idx_labels({0, 2}, dir / "q.lbl");
  o = run_cli({"gt", "--labels", (dir / "db.lbl").string(), "--query-labels",
               (dir / "q.lbl").string(), "--out", (dir / "lgt.bin").string()});
  REQUIRE_MESSAGE(o.status == 0, o.err);
  CHECK(load_ground_truth(dir / "lgt.bin") == GroundTruth{{0, 2}, {3}});
}

TEST_CASE("usage errors") {
  CHECK(run_cli({}).status != 0);
  CHECK(run_cli({"frobnicate"}).status != 0);
  CHECK(run_cli({"train", "--mode", "semi"}).status != 0);
  CHECK(run_cli({"encode", "--model", "m"}).status != 0);
}

}
