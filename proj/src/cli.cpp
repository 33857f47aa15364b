#include "dhash/cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dhash/eval.hpp"
#include "dhash/io.hpp"
#include "dhash/trainer.hpp"

namespace dhash::cli {
namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open report " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed to write report " + path);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Applies `key = value` lines from a config file to options of `app` that were
// not given on the command line. Keys are long option names without dashes.
void apply_config_file(CLI::App& app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = app.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown field '" + key + "'");
    }
    if (opt->count() > 0) continue;  // command line wins
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") opt->add_result("true");
      else if (value != "false" && value != "0") {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": field '" + key +
                                 "' expects true or false");
      }
    } else {
      std::istringstream parts(value);
      std::string part;
      if (opt->get_expected_max() > 1) {
        while (parts >> part) opt->add_result(part);
      } else {
        opt->add_result(value);
      }
    }
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": field '" + key +
                               "': " + e.what());
    }
  }
}

std::vector<Eigen::Index> parse_size_list(const std::string& s, const char* field) {
  std::vector<Eigen::Index> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 1) {
      throw std::invalid_argument(std::string(field) + ": '" + item + "' is not a positive integer");
    }
    out.push_back(static_cast<Eigen::Index>(v));
  }
  return out;
}

json lbfgs_json(const LbfgsConfig& c) {
  return {{"memory", c.memory},       {"max_iters", c.max_iters},
          {"grad_tol", c.grad_tol},   {"c1", c.c1},
          {"c2", c.c2},               {"max_backtracks", c.max_backtracks}};
}

json config_json(const TrainConfig& cfg) {
  json acts = json::array();
  for (Activation a : cfg.activations) acts.push_back(std::string(to_string(a)));
  return {{"mode", std::string(to_string(cfg.mode))},
          {"bits", cfg.bits()},
          {"layer_sizes", cfg.layer_sizes},
          {"activations", acts},
          {"lambda1", cfg.penalties.lambda1},
          {"lambda2", cfg.penalties.lambda2},
          {"lambda3", cfg.penalties.lambda3},
          {"lambda4", cfg.penalties.lambda4},
          {"max_iter", cfg.max_iter},
          {"lbfgs_initial", lbfgs_json(cfg.lbfgs_initial)},
          {"lbfgs_subsequent", lbfgs_json(cfg.lbfgs_subsequent)},
          {"dcc_max_sweeps", cfg.dcc_max_sweeps},
          {"itq_iterations", cfg.itq_iterations},
          {"n_s", cfg.n_s},
          {"seed", cfg.seed},
          {"center_inputs", cfg.center_inputs},
          {"input_scale", cfg.input_scale}};
}

json eval_json(const EvalReport& rep) {
  json prec = json::object();
  json per_query_prec = json::object();
  for (const auto& [r, v] : rep.precision_at_r) prec[std::to_string(r)] = v;
  for (const auto& [r, v] : rep.per_query_precision) per_query_prec[std::to_string(r)] = v;
  json j = {{"mAP", rep.map}, {"precision_at_r", prec}};
  j["top_k"] = rep.top_k ? json(*rep.top_k) : json(nullptr);
  j["radii"] = rep.radii;
  j["queries"] = rep.per_query_ap.size();
  j["per_query_ap"] = rep.per_query_ap;
  j["per_query_precision"] = per_query_prec;
  return j;
}

Matrix take_first(const Matrix& x, std::optional<std::size_t> limit) {
  if (!limit || *limit >= static_cast<std::size_t>(x.cols())) return x;
  return x.leftCols(static_cast<Eigen::Index>(*limit));
}

struct TrainArgs {
  std::string mode = "unsup";
  std::string data;
  std::string labels;
  bool csv_labels = false;
  Eigen::Index bits = 16;
  std::string layers;
  std::optional<double> lambda[4];
  std::optional<int> max_iter;
  std::optional<std::size_t> ns;
  std::uint64_t seed = 42;
  std::string out;
  std::string codes;
  std::string report;
  bool center = false;
  double scale = 1.0;
  std::optional<std::size_t> limit;
  std::optional<int> lbfgs_init_iters;
  std::optional<int> lbfgs_iters;
  std::optional<int> itq_iters;
  std::optional<int> dcc_sweeps;
  bool no_timings = false;
  std::string config;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto t_start = Clock::now();
  const Mode mode = mode_from_string(a.mode);
  std::optional<std::filesystem::path> labels_path;
  if (!a.labels.empty()) labels_path = a.labels;
  Dataset ds = load_dataset(a.data, labels_path, a.csv_labels);
  ds.x = take_first(ds.x, a.limit);
  if (ds.labels && a.limit && *a.limit < ds.labels->size()) ds.labels->resize(*a.limit);
  if (ds.x.cols() == 0) throw std::invalid_argument("data: no samples in " + a.data);
  const double t_load = seconds_since(t_start);

  TrainConfig cfg = TrainConfig::defaults(mode, ds.x.rows(), a.bits);
  if (!a.layers.empty()) {
    std::vector<Eigen::Index> hidden = parse_size_list(a.layers, "layers");
    if (hidden.empty() || hidden.back() != a.bits) {
      throw std::invalid_argument("layers: the last hidden size must equal bits (" +
                                  std::to_string(a.bits) + ")");
    }
    cfg.layer_sizes = {ds.x.rows()};
    cfg.layer_sizes.insert(cfg.layer_sizes.end(), hidden.begin(), hidden.end());
    cfg.activations.assign(hidden.size() - 1, Activation::sigmoid);
    cfg.activations.push_back(Activation::linear);
    if (mode == Mode::unsupervised) {
      cfg.layer_sizes.push_back(ds.x.rows());
      cfg.activations.push_back(Activation::linear);
    }
  }
  double* lambdas[4] = {&cfg.penalties.lambda1, &cfg.penalties.lambda2, &cfg.penalties.lambda3,
                        &cfg.penalties.lambda4};
  for (int i = 0; i < 4; ++i) {
    if (a.lambda[i]) *lambdas[i] = *a.lambda[i];
  }
  if (a.max_iter) cfg.max_iter = *a.max_iter;
  if (a.ns) cfg.n_s = *a.ns;
  if (a.lbfgs_init_iters) cfg.lbfgs_initial.max_iters = *a.lbfgs_init_iters;
  if (a.lbfgs_iters) cfg.lbfgs_subsequent.max_iters = *a.lbfgs_iters;
  if (a.itq_iters) cfg.itq_iterations = *a.itq_iters;
  if (a.dcc_sweeps) cfg.dcc_max_sweeps = *a.dcc_sweeps;
  cfg.seed = a.seed;
  cfg.center_inputs = a.center;
  cfg.input_scale = a.scale;
  cfg.validate();

  const auto t_train = Clock::now();
  TrainResult res;
  if (mode == Mode::unsupervised) {
    res = train_unsupervised(ds.x, cfg);
  } else {
    if (!ds.labels) throw std::invalid_argument("labels: supervised training needs labels");
    res = train_supervised(ds.x, *ds.labels, cfg);
  }
  const double train_seconds = seconds_since(t_train);

  // Codes for every input sample, from the trained hash function.
  const BinaryCodes codes = encode(res.params, ds.x, mode);
  const std::string codes_path = a.codes.empty() ? a.out + ".codes" : a.codes;
  save_model(Model{mode, res.params}, a.out);
  save_codes(codes, codes_path);

  json iters = json::array();
  for (const IterationLog& it : res.iterations) {
    iters.push_back({{"iteration", it.iteration},
                     {"loss_after_b_step", it.loss_after_b_step},
                     {"loss_after_wc_step", it.loss_after_wc_step},
                     {"bits_flipped", it.bits_flipped},
                     {"dcc_sweeps", it.dcc_sweeps},
                     {"lbfgs_iterations", it.lbfgs_iterations},
                     {"lbfgs_status", std::string(to_string(it.lbfgs_status))}});
  }
  json report = {{"command", "train"},
                 {"config", config_json(cfg)},
                 {"data", {{"path", a.data}, {"samples", ds.x.cols()}, {"dim", ds.x.rows()}}},
                 {"training_samples", mode == Mode::supervised ? res.sample_indices.size()
                                                                : static_cast<std::size_t>(ds.x.cols())},
                 {"loss_trace", res.loss_trace},
                 {"iterations", iters},
                 {"status", std::string(to_string(res.status))},
                 {"warnings", res.warnings},
                 {"model", a.out},
                 {"codes",
                  {{"path", codes_path},
                   {"bits", codes.bits()},
                   {"count", codes.count()},
                   {"fnv1a64", hex64(fnv1a64(codes.packed()))}}}};
  if (!a.no_timings) {
    report["timings"] = {{"load_seconds", t_load},
                         {"train_seconds", train_seconds},
                         {"total_seconds", seconds_since(t_start)}};
  }
  if (!a.report.empty()) write_json(report, a.report);

  out << "mode " << to_string(mode) << ", " << cfg.bits() << " bits, "
      << report["training_samples"].get<std::size_t>() << " training samples\n";
  for (std::size_t t = 0; t < res.loss_trace.size(); ++t) {
    out << "  iter " << std::setw(2) << t << "  J = " << std::setprecision(10)
        << res.loss_trace[t] << '\n';
  }
  out << "status " << to_string(res.status) << "; model " << a.out << ", codes " << codes_path
      << '\n';
  return 0;
}

struct EncodeArgs {
  std::string model;
  std::string data;
  std::string out;
  std::string report;
  std::optional<std::size_t> limit;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  const Model model = load_model(a.model);
  Dataset ds = load_dataset(a.data);
  ds.x = take_first(ds.x, a.limit);
  if (ds.x.rows() != model.params.layer_sizes.front() && ds.x.cols() > 0) {
    throw std::invalid_argument("data: dimension " + std::to_string(ds.x.rows()) +
                                " does not match model input " +
                                std::to_string(model.params.layer_sizes.front()));
  }
  Matrix x = ds.x;
  if (x.cols() == 0) x.resize(model.params.layer_sizes.front(), 0);
  const BinaryCodes codes = encode(model.params, x, model.mode);
  save_codes(codes, a.out);
  if (!a.report.empty()) {
    write_json({{"command", "encode"},
                {"model", a.model},
                {"data", a.data},
                {"codes",
                 {{"path", a.out},
                  {"bits", codes.bits()},
                  {"count", codes.count()},
                  {"fnv1a64", hex64(fnv1a64(codes.packed()))}}}},
               a.report);
  }
  out << "encoded " << codes.count() << " samples to " << codes.bits() << "-bit codes in "
      << a.out << '\n';
  return 0;
}

struct GtArgs {
  std::string data;
  std::string queries;
  std::string labels;
  std::string query_labels;
  std::size_t k = 50;
  std::string out;
  std::optional<std::size_t> limit;
  std::optional<std::size_t> query_limit;
};

int cmd_gt(const GtArgs& a, std::ostream& out) {
  GroundTruth gt;
  if (!a.labels.empty() || !a.query_labels.empty()) {
    if (a.labels.empty() || a.query_labels.empty()) {
      throw std::invalid_argument("labels: label ground truth needs --labels and --query-labels");
    }
    std::vector<int> db = load_idx_labels(a.labels);
    std::vector<int> q = load_idx_labels(a.query_labels);
    if (a.limit && *a.limit < db.size()) db.resize(*a.limit);
    if (a.query_limit && *a.query_limit < q.size()) q.resize(*a.query_limit);
    gt = label_gt(db, q);
  } else {
    if (a.data.empty() || a.queries.empty()) {
      throw std::invalid_argument("data: Euclidean ground truth needs --data and --queries");
    }
    const Matrix db = take_first(load_dataset(a.data).x, a.limit);
    const Matrix q = take_first(load_dataset(a.queries).x, a.query_limit);
    gt = euclidean_knn_gt(db, q, a.k);
  }
  save_ground_truth(gt, a.out);
  out << "wrote ground truth for " << gt.size() << " queries to " << a.out << '\n';
  return 0;
}

struct EvalArgs {
  std::string db_codes;
  std::string query_codes;
  std::string gt;
  std::vector<std::size_t> radii;
  std::optional<std::size_t> top_k;
  std::string report;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const BinaryCodes db = load_codes(a.db_codes);
  const BinaryCodes q = load_codes(a.query_codes);
  const GroundTruth gt = load_ground_truth(a.gt);
  if (db.bits() != q.bits()) {
    throw std::invalid_argument("codes: database has " + std::to_string(db.bits()) +
                                " bits, queries have " + std::to_string(q.bits()));
  }
  std::vector<std::size_t> radii = a.radii.empty() ? std::vector<std::size_t>{2, 3, 4} : a.radii;
  for (std::size_t r : radii) {
    if (r > db.bits()) {
      throw std::invalid_argument("radius: " + std::to_string(r) + " exceeds code length " +
                                  std::to_string(db.bits()));
    }
  }
  const EvalReport rep = evaluate(db, q, gt, radii, a.top_k);
  json j = {{"command", "eval"},
            {"db_codes", a.db_codes},
            {"query_codes", a.query_codes},
            {"gt", a.gt},
            {"bits", db.bits()},
            {"database", db.count()}};
  j.update(eval_json(rep));
  if (!a.report.empty()) write_json(j, a.report);

  out << std::fixed << std::setprecision(4);
  out << "mAP" << (a.top_k ? "@" + std::to_string(*a.top_k) : std::string()) << ": " << rep.map
      << '\n';
  for (const auto& [r, p] : rep.precision_at_r) out << "precision@r=" << r << ": " << p << '\n';
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep-network binary hashing: train, encode, ground truth, evaluation"};
  app.name("dhash");
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train an unsupervised or supervised hashing network");
  train->add_option("--config", ta.config, "file of key = value lines (flags override it)");
  train->add_option("--mode", ta.mode, "unsup or sup")->check(CLI::IsMember({"unsup", "sup"}));
  train->add_option("--data", ta.data, "training data (.idx/.ubyte, .fvecs, .bvecs, .csv)");
  train->add_option("--labels", ta.labels, "IDX label file");
  train->add_flag("--label-column", ta.csv_labels, "CSV: last column is an integer label");
  train->add_option("--bits", ta.bits, "code length L");
  train->add_option("--layers", ta.layers, "hidden sizes s_2..s_{n-1}, comma separated, last = bits");
  for (int i = 0; i < 4; ++i) {
    train->add_option("--lambda" + std::to_string(i + 1), ta.lambda[i]);
  }
  train->add_option("--max-iter", ta.max_iter, "outer alternations");
  train->add_option("--ns", ta.ns, "supervised: samples per class");
  train->add_option("--seed", ta.seed, "run seed");
  train->add_option("--out", ta.out, "model output path");
  train->add_option("--codes", ta.codes, "training codes output (default <out>.codes)");
  train->add_option("--report", ta.report, "JSON run report path");
  train->add_flag("--center", ta.center, "mean-center inputs during training");
  train->add_option("--scale", ta.scale, "multiply inputs by this factor during training");
  train->add_option("--limit", ta.limit, "use only the first N samples");
  train->add_option("--lbfgs-init-iters", ta.lbfgs_init_iters);
  train->add_option("--lbfgs-iters", ta.lbfgs_iters);
  train->add_option("--itq-iters", ta.itq_iters);
  train->add_option("--dcc-sweeps", ta.dcc_sweeps);
  train->add_flag("--no-timings", ta.no_timings, "omit wall-clock timings from the report");

  EncodeArgs ea;
  auto* enc = app.add_subcommand("encode", "encode data with a trained model");
  enc->add_option("--model", ea.model)->required();
  enc->add_option("--data", ea.data)->required();
  enc->add_option("--out", ea.out, "codes output path")->required();
  enc->add_option("--report", ea.report);
  enc->add_option("--limit", ea.limit);

  GtArgs ga;
  auto* gtc = app.add_subcommand("gt", "build a ground-truth file");
  gtc->add_option("--data", ga.data, "database samples");
  gtc->add_option("--queries", ga.queries, "query samples");
  gtc->add_option("--labels", ga.labels, "database IDX labels (label ground truth)");
  gtc->add_option("--query-labels", ga.query_labels, "query IDX labels");
  gtc->add_option("--gt-k", ga.k, "Euclidean nearest neighbours per query")
      ->check(CLI::PositiveNumber);
  gtc->add_option("--out", ga.out)->required();
  gtc->add_option("--limit", ga.limit, "use only the first N database samples");
  gtc->add_option("--query-limit", ga.query_limit, "use only the first N queries");

  EvalArgs va;
  auto* ev = app.add_subcommand("eval", "mAP and precision within Hamming radius");
  ev->add_option("--db-codes", va.db_codes)->required();
  ev->add_option("--query-codes", va.query_codes)->required();
  ev->add_option("--gt", va.gt)->required();
  ev->add_option("--radius", va.radii, "Hamming radius (repeatable, default 2 3 4)")
      ->allow_extra_args(false);
  ev->add_option("--topk", va.top_k, "truncate the ranking for mAP");
  ev->add_option("--report", va.report, "JSON report path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (train->parsed()) {
      if (!ta.config.empty()) apply_config_file(*train, ta.config);
      if (ta.data.empty()) throw std::invalid_argument("data: --data is required");
      if (ta.out.empty()) throw std::invalid_argument("out: --out is required");
      return cmd_train(ta, out);
    }
    if (enc->parsed()) return cmd_encode(ea, out);
    if (gtc->parsed()) return cmd_gt(ga, out);
    if (ev->parsed()) return cmd_eval(va, out);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const std::exception& e) {
    err << "dhash: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace dhash::cli
