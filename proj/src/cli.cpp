#include "gtab/cli.hpp"

#include <omp.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "gtab/bridge.hpp"
#include "gtab/csv.hpp"
#include "gtab/equivariance.hpp"
#include "gtab/error.hpp"
#include "gtab/pipeline.hpp"

namespace gtab {
namespace {

namespace fs = std::filesystem;

struct FeaturizeArgs {
  bool no_nfa = false, no_sf = false, no_pearl = false;
  std::size_t pca_threshold = 128, pca_dims = 64;
  std::size_t pearl_m = 8, eig_k = 8;
  std::uint64_t seed = 0;
  std::size_t pearl_epochs = 0;
  double pearl_lr = 0.01;
  std::string pearl_weights;

  void add_to(CLI::App* cmd) {
    cmd->add_flag("--no-nfa", no_nfa, "Drop the neighborhood aggregation block");
    cmd->add_flag("--no-sf", no_sf, "Drop degree, PageRank and Laplacian eigenvectors");
    cmd->add_flag("--no-pearl", no_pearl, "Drop the PEARL block");
    cmd->add_option("--pca-threshold", pca_threshold, "Blocks wider than this are PCA-reduced")->capture_default_str();
    cmd->add_option("--pca-dims", pca_dims, "Components kept by PCA")->capture_default_str();
    cmd->add_option("--pearl-m", pearl_m, "Random draws averaged by PEARL")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--eig-k", eig_k, "Laplacian eigenvectors (0 disables)")->capture_default_str();
    cmd->add_option("--seed", seed, "PEARL draw seed")->capture_default_str();
    cmd->add_option("--pearl-train-epochs", pearl_epochs, "Train PEARL on the train split (0 keeps the shared encoder)")
        ->capture_default_str();
    cmd->add_option("--pearl-lr", pearl_lr, "PEARL learning rate")->capture_default_str();
    cmd->add_option("--pearl-weights", pearl_weights, "Load PEARL weights from this file");
  }

  FeaturizeOptions options() const {
    FeaturizeOptions o;
    o.assemble.use_nfa = !no_nfa;
    o.assemble.use_sf = !no_sf;
    o.assemble.use_pearl = !no_pearl;
    o.assemble.pca_threshold = pca_threshold;
    o.assemble.pca_dims = pca_dims;
    o.structural.n_eigenvectors = eig_k;
    o.pearl.n_draws = pearl_m;
    o.pearl.draw_seed = seed;
    o.pearl_train_epochs = pearl_epochs;
    o.pearl_learning_rate = pearl_lr;
    if (!pearl_weights.empty()) o.pearl_weights = std::make_shared<const PearlWeights>(load_weights(pearl_weights));
    return o;
  }
};

struct PredictArgs {
  std::string predictor = "knn";
  std::size_t n_seeds = 10;
  std::uint64_t seed = 0;
  std::size_t k = 5;
  std::size_t label_shuffles = 10;
  double l2 = 1e-3;
  std::size_t epochs = 500;
  std::string bridge_dir;
  long long bridge_timeout_ms = 600000;
  bool val_in_context = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--predictor", predictor, "knn, linear or bridge")
        ->capture_default_str()
        ->check(CLI::IsMember({"knn", "linear", "bridge"}));
    cmd->add_option("--n-seeds", n_seeds, "Repetitions")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--predictor-seed", seed, "First predictor seed")->capture_default_str();
    cmd->add_option("--k", k, "Neighbors for knn")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--label-shuffles", label_shuffles, "Class permutations averaged (0 disables)")
        ->capture_default_str();
    cmd->add_option("--l2", l2, "Linear model penalty")->capture_default_str();
    cmd->add_option("--epochs", epochs, "Logistic regression steps")->capture_default_str();
    cmd->add_option("--bridge-dir", bridge_dir, "Request directory watched by the bridge server");
    cmd->add_option("--bridge-timeout-ms", bridge_timeout_ms, "Bridge timeout")->capture_default_str();
    cmd->add_flag("--val-in-context", val_in_context, "Append validation rows to the training context");
  }

  PredictorOptions options() const {
    PredictorOptions o;
    o.kind = parse_predictor_kind(predictor);
    o.k = k;
    o.label_shuffles = label_shuffles;
    o.linear.l2 = l2;
    o.linear.epochs = epochs;
    o.bridge_dir = bridge_dir;
    o.bridge_timeout = std::chrono::milliseconds(bridge_timeout_ms);
    o.val_in_context = val_in_context;
    if (o.kind == PredictorKind::bridge && bridge_dir.empty()) throw InputError("--predictor bridge needs --bridge-dir");
    return o;
  }
};

void write_json(const nlohmann::ordered_json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << j.dump(2) << '\n';
}

void print_stats(const Dataset& ds, std::ostream& out) {
  const DatasetStats s = dataset_stats(ds);
  out << "nodes " << s.n_nodes << '\n'
      << "edges " << s.n_edges << '\n'
      << "features " << s.n_features << '\n'
      << "mean_degree " << csv::format_double(s.mean_degree) << '\n'
      << "task " << to_string(ds.task.kind) << '\n';
  if (is_classification(ds.task.kind)) out << "classes " << ds.task.n_classes << '\n';
  if (s.edge_homophily) out << "edge_homophily " << csv::format_double(*s.edge_homophily) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-to-table featurization and evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a TOML/INI file; flags override it");
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);

  std::string data_dir, split_path, out_path, table_path;

  std::string edges, features, meta;
  auto* ingest = app.add_subcommand("ingest", "Validate raw files and write a dataset directory");
  ingest->add_option("--edges", edges, "Edge list (src,dst)")->required();
  ingest->add_option("--features", features, "Node feature table with the target column")->required();
  ingest->add_option("--meta", meta, "Column kinds, target and task")->required();
  ingest->add_option("--out", out_path, "Dataset directory")->required();

  auto* stats = app.add_subcommand("stats", "Print dataset statistics");
  stats->add_option("--data", data_dir, "Dataset directory")->required();

  SplitRatios ratios;
  std::uint64_t split_seed = 0;
  bool no_stratify = false;
  auto* split = app.add_subcommand("split", "Draw a train/val/test split");
  split->add_option("--data", data_dir, "Dataset directory")->required();
  split->add_option("--out", out_path, "Split file")->required();
  split->add_option("--seed", split_seed, "Split seed")->capture_default_str();
  split->add_option("--train", ratios.train)->capture_default_str();
  split->add_option("--val", ratios.val)->capture_default_str();
  split->add_option("--test", ratios.test)->capture_default_str();
  split->add_flag("--no-stratify", no_stratify, "Plain random split for classification tasks");

  FeaturizeArgs fargs;
  std::string sidecar, save_pearl;
  auto* featurize_cmd = app.add_subcommand("featurize", "Build the augmented feature table");
  featurize_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  featurize_cmd->add_option("--split", split_path, "Split file")->required();
  featurize_cmd->add_option("--out", out_path, "Output CSV")->required();
  featurize_cmd->add_option("--sidecar", sidecar, "Metadata JSON (default: <out>.json)");
  featurize_cmd->add_option("--save-pearl-weights", save_pearl, "Write the PEARL weights used");
  fargs.add_to(featurize_cmd);

  PredictArgs pargs;
  auto* evaluate = app.add_subcommand("evaluate", "Predict the test split and report the task metric");
  evaluate->add_option("--data", data_dir, "Dataset directory")->required();
  evaluate->add_option("--split", split_path, "Split file")->required();
  evaluate->add_option("--table", table_path, "Augmented table from featurize")->required();
  evaluate->add_option("--out", out_path, "Report JSON (default: stdout)");
  pargs.add_to(evaluate);

  FeaturizeArgs aargs;
  PredictArgs apargs;
  auto* ablate = app.add_subcommand("ablate", "Compare the five block variants");
  ablate->add_option("--data", data_dir, "Dataset directory")->required();
  ablate->add_option("--split", split_path, "Split file")->required();
  ablate->add_option("--out", out_path, "Report JSON");
  aargs.add_to(ablate);
  apargs.add_to(ablate);

  FeaturizeArgs cargs;
  std::string symmetry = "all";
  std::uint64_t check_seed = 0;
  std::size_t stat_draws = 4096;
  SplitRatios check_ratios;
  std::size_t check_k = 5;
  auto* check = app.add_subcommand("check", "Run the symmetry checks on a dataset");
  check->add_option("--data", data_dir, "Dataset directory")->required();
  check->add_option("--symmetry", symmetry)->capture_default_str()->check(
      CLI::IsMember({"feature", "node", "label", "all"}));
  check->add_option("--check-seed", check_seed)->capture_default_str();
  check->add_option("--statistical-draws", stat_draws, "Draws for the distributional PEARL check (0 skips)")
      ->capture_default_str();
  check->add_option("--out", out_path, "Report JSON (default: stdout)");
  check->add_option("--k", check_k, "Neighbors for knn")->capture_default_str()->check(CLI::PositiveNumber);
  check->add_option("--train", check_ratios.train)->capture_default_str();
  check->add_option("--val", check_ratios.val)->capture_default_str();
  check->add_option("--test", check_ratios.test)->capture_default_str();
  cargs.add_to(check);

  SbmOptions sbm;
  auto* synth = app.add_subcommand("synth", "Write a two-block SBM dataset with noise features");
  synth->add_option("--out", out_path, "Dataset directory")->required();
  synth->add_option("--n", sbm.n_nodes)->capture_default_str();
  synth->add_option("--p-in", sbm.p_in)->capture_default_str();
  synth->add_option("--p-out", sbm.p_out)->capture_default_str();
  synth->add_option("--numerical", sbm.n_numerical)->capture_default_str();
  synth->add_option("--categorical", sbm.n_categorical)->capture_default_str();
  synth->add_option("--missing-rate", sbm.missing_rate)->capture_default_str();
  synth->add_option("--seed", sbm.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (threads > 0) omp_set_num_threads(threads);

    if (ingest->parsed()) {
      LoadReport report;
      const Dataset ds = load_dataset(edges, features, meta, &report);
      save_dataset(ds, out_path);
      if (report.self_loops_dropped > 0) out << "self_loops_dropped " << report.self_loops_dropped << '\n';
      print_stats(ds, out);
    } else if (stats->parsed()) {
      print_stats(load_dataset_dir(data_dir), out);
    } else if (split->parsed()) {
      const Dataset ds = load_dataset_dir(data_dir);
      const Split s = make_split(ds, ratios, is_classification(ds.task.kind) && !no_stratify, split_seed);
      save_split(s, out_path);
      out << "train " << s.train.size() << " val " << s.val.size() << " test " << s.test.size() << " seed "
          << s.seed << '\n';
    } else if (featurize_cmd->parsed()) {
      const Dataset ds = load_dataset_dir(data_dir);
      const Split s = load_split(split_path);
      s.validate(ds.n_nodes());
      FeaturizeOptions opts = fargs.options();
      const FeatureBlocks blocks = compute_blocks(ds, s, opts);
      const AugmentedTable table =
          assemble_features(ds, blocks.nfa ? &*blocks.nfa : nullptr, blocks.sf ? &*blocks.sf : nullptr,
                            blocks.pearl ? &*blocks.pearl : nullptr, s, opts.assemble);
      if (!save_pearl.empty()) {
        if (!blocks.pearl_weights) throw InputError("--save-pearl-weights needs the PEARL block");
        save_weights(*blocks.pearl_weights, save_pearl);
      }
      write_augmented(table, out_path, sidecar.empty() ? out_path + ".json" : sidecar,
                      featurize_provenance(opts, s));
      out << "rows " << table.values.rows() << " columns " << table.values.cols() << '\n';
    } else if (evaluate->parsed()) {
      const Dataset ds = load_dataset_dir(data_dir);
      const Split s = load_split(split_path);
      s.validate(ds.n_nodes());
      const AugmentedTable table = read_augmented(table_path);
      const EvaluationReport rep = evaluate_seeds(table, ds, s, pargs.options(), pargs.n_seeds, pargs.seed);
      write_json(rep.to_json(), out_path, out);
      if (!out_path.empty()) {
        out << rep.metric << ' ' << csv::format_double(rep.mean) << " +- " << csv::format_double(rep.std) << '\n';
      }
    } else if (ablate->parsed()) {
      const Dataset ds = load_dataset_dir(data_dir);
      const Split s = load_split(split_path);
      s.validate(ds.n_nodes());
      const auto rows = run_ablation(ds, s, aargs.options(), apargs.options(), apargs.n_seeds, apargs.seed);
      out << format_ablation_table(rows);
      if (!out_path.empty()) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& r : rows) j.push_back({{"variant", r.label}, {"width", r.width}, {"report", r.report.to_json()}});
        write_json(j, out_path, out);
      }
    } else if (check->parsed()) {
      const Dataset ds = load_dataset_dir(data_dir);
      HarnessOptions h;
      h.featurize = cargs.options();
      h.statistical_draws = stat_draws;
      h.ratios = check_ratios;
      h.knn_k = check_k;
      std::vector<SymmetryReport> reports;
      if (symmetry == "feature" || symmetry == "all") reports.push_back(check_feature_permutation(h, ds, check_seed));
      if (symmetry == "node" || symmetry == "all") reports.push_back(check_node_permutation(h, ds, check_seed));
      if (symmetry == "label" || (symmetry == "all" && is_classification(ds.task.kind) && ds.task.n_classes <= 4)) {
        reports.push_back(check_label_permutation(h, ds, check_seed));
      }
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      bool ok = true;
      for (const auto& r : reports) {
        j.push_back(r.to_json());
        ok = ok && r.passed();
      }
      write_json(j, out_path, out);
      if (!ok) {
        err << "symmetry check failed\n";
        return 2;
      }
    } else if (synth->parsed()) {
      const Dataset ds = make_sbm_dataset(sbm);
      save_dataset(ds, out_path);
      print_stats(ds, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace gtab
