#include "gtab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "gtab/csv.hpp"
#include "gtab/error.hpp"
#include "gtab/rng.hpp"

namespace gtab {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

FeatureColumn FeatureColumn::numerical(std::string name, std::vector<double> values) {
  FeatureColumn c;
  c.name = std::move(name);
  c.kind = FeatureKind::numerical;
  c.values = std::move(values);
  return c;
}

FeatureColumn FeatureColumn::categorical(std::string name, std::span<const std::string> raw) {
  std::set<std::string> distinct;
  for (const auto& s : raw) {
    if (!s.empty() && s != kMissingToken) distinct.insert(s);
  }
  std::vector<std::string> vocab(distinct.begin(), distinct.end());
  std::vector<std::int32_t> codes(raw.size(), kMissingCode);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].empty() || raw[i] == kMissingToken) continue;
    codes[i] = static_cast<std::int32_t>(
        std::lower_bound(vocab.begin(), vocab.end(), raw[i]) - vocab.begin());
  }
  return categorical(std::move(name), std::move(codes), std::move(vocab));
}

FeatureColumn FeatureColumn::categorical(std::string name, std::vector<std::int32_t> codes,
                                         std::vector<std::string> vocabulary) {
  FeatureColumn c;
  c.name = std::move(name);
  c.kind = FeatureKind::categorical;
  c.codes = std::move(codes);
  c.vocabulary = std::move(vocabulary);
  return c;
}

void FeatureTable::add(FeatureColumn col) {
  if (col.size() != n_rows_) {
    throw InputError("column '" + col.name + "' has " + std::to_string(col.size()) +
                     " entries, expected " + std::to_string(n_rows_));
  }
  if (col.kind == FeatureKind::categorical) {
    const auto v = static_cast<std::int32_t>(col.vocabulary.size());
    for (auto code : col.codes) {
      if (code != kMissingCode && (code < 0 || code >= v)) {
        throw InputError("column '" + col.name + "' has a code outside its vocabulary");
      }
    }
  }
  columns_.push_back(std::move(col));
}

FeatureTable FeatureTable::permuted_rows(std::span<const NodeId> new_id) const {
  validate_permutation(new_id, n_rows_);
  FeatureTable out(n_rows_);
  for (const auto& c : columns_) {
    FeatureColumn p = c;
    for (std::size_t i = 0; i < n_rows_; ++i) {
      if (c.kind == FeatureKind::numerical) {
        p.values[new_id[i]] = c.values[i];
      } else {
        p.codes[new_id[i]] = c.codes[i];
      }
    }
    out.columns_.push_back(std::move(p));
  }
  return out;
}

FeatureTable FeatureTable::reordered_columns(std::span<const std::size_t> order) const {
  FeatureTable out(n_rows_);
  for (std::size_t j : order) out.columns_.push_back(columns_.at(j));
  return out;
}

bool operator==(const FeatureTable& a, const FeatureTable& b) {
  if (a.n_rows_ != b.n_rows_ || a.columns_.size() != b.columns_.size()) return false;
  for (std::size_t j = 0; j < a.columns_.size(); ++j) {
    const auto& x = a.columns_[j];
    const auto& y = b.columns_[j];
    if (x.name != y.name || x.kind != y.kind || x.codes != y.codes ||
        x.vocabulary != y.vocabulary || x.values.size() != y.values.size()) {
      return false;
    }
    for (std::size_t i = 0; i < x.values.size(); ++i) {
      if (!same_value(x.values[i], y.values[i])) return false;
    }
  }
  return true;
}

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::binary: return "binary";
    case TaskKind::multiclass: return "multiclass";
    case TaskKind::regression: return "regression";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view s) {
  if (s == "binary") return TaskKind::binary;
  if (s == "multiclass") return TaskKind::multiclass;
  if (s == "regression") return TaskKind::regression;
  throw InputError("unknown task kind '" + std::string(s) + "'");
}

void TaskSpec::validate() const {
  if (!is_classification(kind)) return;
  if (kind == TaskKind::binary && n_classes != 2) {
    throw InputError("binary task must have exactly 2 classes");
  }
  if (n_classes < 2) throw InputError("classification task needs at least 2 classes");
  for (double y : targets) {
    if (is_missing(y)) continue;
    if (y < 0 || y >= static_cast<double>(n_classes) || y != std::floor(y)) {
      throw InputError("class label " + csv::format_double(y) + " outside [0, " +
                       std::to_string(n_classes) + ")");
    }
  }
}

void Split::validate(std::size_t n_nodes) const {
  std::vector<char> owner(n_nodes, 0);
  auto mark = [&](const std::vector<NodeId>& part, char tag, const char* name) {
    if (part.empty()) throw InputError(std::string("split part '") + name + "' is empty");
    for (NodeId v : part) {
      if (v >= n_nodes) throw InputError("split index out of range");
      if (owner[v]) throw InputError("split parts overlap at node " + std::to_string(v));
      owner[v] = tag;
    }
  };
  mark(train, 1, "train");
  mark(val, 2, "val");
  mark(test, 3, "test");
}

void Dataset::validate() const {
  if (features.n_rows() != graph.n_nodes() || task.targets.size() != graph.n_nodes()) {
    throw InputError("graph, features and targets disagree on the node count");
  }
  task.validate();
}

Dataset Dataset::permuted(std::span<const NodeId> new_id) const {
  Dataset out;
  out.graph = graph.permuted(new_id);
  out.features = features.permuted_rows(new_id);
  out.task = task;
  for (std::size_t i = 0; i < new_id.size(); ++i) out.task.targets[new_id[i]] = task.targets[i];
  return out;
}

namespace {

std::string where(const fs::path& p, std::size_t line) {
  return p.string() + ":" + std::to_string(line) + ": ";
}

bool parse_node_id(const std::string& cell, std::uint64_t& out) {
  std::string s = csv::trim(cell);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

}  // namespace

Dataset load_dataset(const fs::path& edge_path, const fs::path& feature_path,
                     const fs::path& meta_path, LoadReport* report) {
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw InputError(meta_path.string() + ": cannot open file");
  ojson meta;
  try {
    meta = ojson::parse(meta_in);
  } catch (const std::exception& e) {
    throw InputError(meta_path.string() + ": " + e.what());
  }
  if (!meta.contains("columns") || !meta["columns"].is_object()) {
    throw InputError(meta_path.string() + ": missing 'columns' object");
  }
  if (!meta.contains("target") || !meta.contains("task")) {
    throw InputError(meta_path.string() + ": 'target' and 'task' are required");
  }
  const std::string target = meta["target"].get<std::string>();
  const TaskKind task_kind = parse_task_kind(meta["task"].get<std::string>());
  std::map<std::string, FeatureKind> kinds;
  for (auto& [name, kind] : meta["columns"].items()) {
    const std::string k = kind.get<std::string>();
    if (k == "numerical") {
      kinds[name] = FeatureKind::numerical;
    } else if (k == "categorical") {
      kinds[name] = FeatureKind::categorical;
    } else {
      throw InputError(meta_path.string() + ": unknown column kind '" + k + "' for '" + name +
                       "'");
    }
  }

  csv::Table ft = csv::read(feature_path, true);
  const std::size_t n = ft.rows.size();
  std::ptrdiff_t target_col = -1;
  for (std::size_t j = 0; j < ft.header.size(); ++j) {
    if (ft.header[j] == target) {
      target_col = static_cast<std::ptrdiff_t>(j);
    } else if (!kinds.count(ft.header[j])) {
      throw InputError(feature_path.string() + ": column '" + ft.header[j] +
                       "' is not declared in the meta file");
    }
  }
  if (target_col < 0) {
    throw InputError(feature_path.string() + ": target column '" + target + "' missing");
  }
  for (const auto& [name, kind] : kinds) {
    if (std::find(ft.header.begin(), ft.header.end(), name) == ft.header.end()) {
      throw InputError(feature_path.string() + ": declared column '" + name + "' missing");
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (ft.rows[r].size() != ft.header.size()) {
      throw InputError(where(feature_path, ft.line_numbers[r]) + "expected " +
                       std::to_string(ft.header.size()) + " fields, found " +
                       std::to_string(ft.rows[r].size()));
    }
  }

  Dataset ds;
  ds.features = FeatureTable(n);
  for (std::size_t j = 0; j < ft.header.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) == target_col) continue;
    const std::string& name = ft.header[j];
    if (kinds[name] == FeatureKind::numerical) {
      std::vector<double> vals(n);
      for (std::size_t r = 0; r < n; ++r) {
        const std::string& cell = ft.rows[r][j];
        if (csv::trim(cell) == kMissingToken) {
          vals[r] = kMissing;
        } else if (!csv::parse_double(cell, vals[r])) {
          throw InputError(where(feature_path, ft.line_numbers[r]) + "non-numeric value '" +
                           cell + "' in numerical column '" + name + "'");
        }
      }
      ds.features.add(FeatureColumn::numerical(name, std::move(vals)));
    } else {
      std::vector<std::string> raw(n);
      for (std::size_t r = 0; r < n; ++r) raw[r] = csv::trim(ft.rows[r][j]);
      ds.features.add(FeatureColumn::categorical(name, raw));
    }
  }

  ds.task.kind = task_kind;
  ds.task.target_name = target;
  ds.task.targets.resize(n);
  double max_label = -1;
  for (std::size_t r = 0; r < n; ++r) {
    const std::string& cell = ft.rows[r][static_cast<std::size_t>(target_col)];
    double y;
    if (!csv::parse_double(cell, y)) {
      throw InputError(where(feature_path, ft.line_numbers[r]) + "non-numeric target '" +
                       cell + "'");
    }
    if (is_classification(task_kind) && !is_missing(y)) {
      if (y < 0 || y != std::floor(y)) {
        throw InputError(where(feature_path, ft.line_numbers[r]) +
                         "class label must be a non-negative integer, got '" + cell + "'");
      }
      max_label = std::max(max_label, y);
    }
    ds.task.targets[r] = y;
  }
  if (task_kind == TaskKind::binary) {
    ds.task.n_classes = 2;
  } else if (task_kind == TaskKind::multiclass) {
    ds.task.n_classes = meta.contains("n_classes") ? meta["n_classes"].get<std::size_t>()
                                                   : static_cast<std::size_t>(max_label + 1);
  }

  csv::Table et = csv::read(edge_path, false);
  std::vector<Edge> edges;
  edges.reserve(et.rows.size());
  for (std::size_t r = 0; r < et.rows.size(); ++r) {
    const auto& row = et.rows[r];
    std::uint64_t u = 0, v = 0;
    const bool ok = row.size() == 2 && parse_node_id(row[0], u) && parse_node_id(row[1], v);
    if (!ok) {
      if (r == 0 && edges.empty()) continue;  // header such as "src,dst"
      throw InputError(where(edge_path, et.line_numbers[r]) +
                       "expected two non-negative integer node ids");
    }
    if (u >= n || v >= n) {
      throw InputError(where(edge_path, et.line_numbers[r]) + "node id " +
                       std::to_string(std::max(u, v)) + " out of range [0, " +
                       std::to_string(n) + ")");
    }
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  std::size_t loops = 0;
  ds.graph = Graph::from_edges(n, edges, &loops);
  if (report) {
    report->self_loops_dropped = loops;
    report->input_edges = edges.size();
  }
  ds.validate();
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "edges.csv");
    out << "src,dst\n";
    for (const Edge& e : ds.graph.edge_list()) out << e.src << ',' << e.dst << '\n';
  }
  {
    std::ofstream out(dir / "features.csv");
    const auto& cols = ds.features.columns();
    for (const auto& c : cols) out << csv::quote(c.name) << ',';
    out << csv::quote(ds.task.target_name) << '\n';
    for (std::size_t r = 0; r < ds.features.n_rows(); ++r) {
      for (const auto& c : cols) {
        if (c.kind == FeatureKind::numerical) {
          out << csv::format_double(c.values[r]);
        } else if (c.codes[r] == kMissingCode) {
          out << kMissingToken;
        } else {
          out << csv::quote(c.vocabulary[static_cast<std::size_t>(c.codes[r])]);
        }
        out << ',';
      }
      out << csv::format_double(ds.task.targets[r]) << '\n';
    }
  }
  ojson meta;
  meta["columns"] = ojson::object();
  for (const auto& c : ds.features.columns()) {
    meta["columns"][c.name] = c.kind == FeatureKind::numerical ? "numerical" : "categorical";
  }
  meta["target"] = ds.task.target_name;
  meta["task"] = std::string(to_string(ds.task.kind));
  if (is_classification(ds.task.kind)) meta["n_classes"] = ds.task.n_classes;
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
}

Dataset load_dataset_dir(const fs::path& dir, LoadReport* report) {
  return load_dataset(dir / "edges.csv", dir / "features.csv", dir / "meta.json", report);
}

Split make_split(const Dataset& ds, SplitRatios ratios, bool stratified, std::uint64_t seed) {
  const double parts[3] = {ratios.train, ratios.val, ratios.test};
  for (double r : parts) {
    if (!(r > 0.0)) throw InputError("split ratios must be positive");
  }
  if (std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9) {
    throw InputError("split ratios must sum to 1");
  }
  if (stratified && !is_classification(ds.task.kind)) {
    throw InputError("stratified split requested for a regression task");
  }

  std::vector<std::vector<NodeId>> groups(stratified ? ds.task.n_classes : 1);
  for (std::size_t v = 0; v < ds.task.targets.size(); ++v) {
    const double y = ds.task.targets[v];
    if (is_missing(y)) continue;
    groups[stratified ? static_cast<std::size_t>(y) : 0].push_back(static_cast<NodeId>(v));
  }

  Split split;
  split.seed = seed;
  std::vector<NodeId>* out[3] = {&split.train, &split.val, &split.test};
  Rng rng(seed);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& members = groups[g];
    if (members.size() < 3) {
      throw InputError(stratified ? "class " + std::to_string(g) + " has " +
                                        std::to_string(members.size()) +
                                        " labeled nodes, fewer than the 3 split parts"
                                  : std::string("fewer than 3 labeled nodes to split"));
    }
    rng.shuffle(members);
    std::size_t sizes[3];
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
      sizes[k] =
          static_cast<std::size_t>(std::floor(parts[k] * static_cast<double>(members.size()) + 1e-9));
      assigned += sizes[k];
    }
    for (int k = 0; assigned < members.size(); k = (k + 1) % 3, ++assigned) ++sizes[k];
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      out[k]->insert(out[k]->end(), members.begin() + static_cast<std::ptrdiff_t>(pos),
                     members.begin() + static_cast<std::ptrdiff_t>(pos + sizes[k]));
      pos += sizes[k];
    }
  }
  for (auto* part : out) std::sort(part->begin(), part->end());
  split.validate(ds.n_nodes());
  return split;
}

void save_split(const Split& s, const fs::path& path) {
  ojson j;
  j["train"] = s.train;
  j["val"] = s.val;
  j["test"] = s.test;
  j["seed"] = s.seed;
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot write");
  out << j.dump() << '\n';
}

Split load_split(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  try {
    ojson j = ojson::parse(in);
    Split s;
    s.train = j.at("train").get<std::vector<NodeId>>();
    s.val = j.at("val").get<std::vector<NodeId>>();
    s.test = j.at("test").get<std::vector<NodeId>>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats st;
  st.n_nodes = ds.n_nodes();
  st.n_edges = ds.graph.n_edges();
  st.n_features = ds.features.n_columns();
  st.mean_degree =
      st.n_nodes == 0 ? 0.0 : 2.0 * static_cast<double>(st.n_edges) / static_cast<double>(st.n_nodes);
  if (is_classification(ds.task.kind)) {
    std::size_t same = 0, total = 0;
    for (const Edge& e : ds.graph.edge_list()) {
      const double a = ds.task.targets[e.src], b = ds.task.targets[e.dst];
      if (is_missing(a) || is_missing(b)) continue;
      ++total;
      if (a == b) ++same;
    }
    if (total > 0) st.edge_homophily = static_cast<double>(same) / static_cast<double>(total);
  }
  return st;
}

}  // namespace gtab
