#include "gtab/bridge.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gtab/csv.hpp"
#include "gtab/error.hpp"

namespace gtab {

namespace fs = std::filesystem;

void check_bridge_limits(const PredictRequest& req, const BridgeLimits& limits) {
  if (is_classification(req.task) && req.n_classes > limits.max_classes) {
    throw InputError("bridge: " + std::to_string(req.n_classes) + " classes exceed the backbone limit of " +
                     std::to_string(limits.max_classes));
  }
  if (static_cast<std::size_t>(req.train_x.rows()) > limits.max_train_rows) {
    throw InputError("bridge: " + std::to_string(req.train_x.rows()) +
                     " train rows exceed the backbone limit of " +
                     std::to_string(limits.max_train_rows));
  }
}

namespace {

void write_rows(std::ostream& out, const Matrix& x, const std::vector<std::string>& names,
                const std::vector<double>* target) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (j) out << ',';
    out << csv::quote(static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                                : "f" + std::to_string(j));
  }
  if (target) out << (x.cols() ? "," : "") << "__target__";
  out << '\n';
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j) out << ',';
      out << csv::format_double(x(i, j));
    }
    if (target) out << (x.cols() ? "," : "") << csv::format_double((*target)[static_cast<std::size_t>(i)]);
    out << '\n';
  }
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

fs::path write_bridge_request(const PredictRequest& req, const fs::path& endpoint,
                              const std::string& request_id) {
  const fs::path dir = endpoint / request_id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw BridgeError("bridge: cannot create " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "train.csv");
    write_rows(out, req.train_x, req.feature_names, &req.train_y);
  }
  {
    std::ofstream out(dir / "test.csv");
    write_rows(out, req.test_x, req.feature_names, nullptr);
  }
  nlohmann::ordered_json meta;
  meta["request_id"] = request_id;
  meta["task"] = std::string(to_string(req.task));
  meta["n_classes"] = is_classification(req.task) ? req.n_classes : 0;
  meta["n_train"] = req.train_x.rows();
  meta["n_test"] = req.test_x.rows();
  meta["n_features"] = req.train_x.cols();
  std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  std::ofstream ready(dir / "READY");
  if (!ready) throw BridgeError("bridge: cannot write READY sentinel in " + dir.string());
  return dir;
}

Prediction read_bridge_response(const fs::path& request_dir, const PredictRequest& req) {
  const fs::path path = request_dir / "predictions.csv";
  std::ifstream in(path);
  if (!in) throw BridgeError("bridge: response has no predictions.csv");
  const Eigen::Index width = is_classification(req.task) ? static_cast<Eigen::Index>(req.n_classes) : 1;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split_line(line, ',');
    std::vector<double> vals(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      numeric = numeric && csv::parse_double(fields[j], vals[j]) && !is_missing(vals[j]);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw BridgeError("bridge: non-numeric value in predictions.csv: '" + line + "'");
    }
    first = false;
    if (static_cast<Eigen::Index>(vals.size()) != width) {
      throw BridgeError("bridge: expected " + std::to_string(width) + " columns per prediction row");
    }
    rows.push_back(std::move(vals));
  }
  if (static_cast<Eigen::Index>(rows.size()) != req.test_x.rows()) {
    throw BridgeError("bridge: expected " + std::to_string(req.test_x.rows()) +
                      " prediction rows, got " + std::to_string(rows.size()));
  }
  Prediction p{req.task, Matrix(static_cast<Eigen::Index>(rows.size()), width)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < width; ++j) p.values(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
  }
  if (is_classification(req.task)) {
    // The backbone computes in single precision; accept small drift, then
    // renormalize.
    for (Eigen::Index i = 0; i < p.values.rows(); ++i) {
      const double s = p.values.row(i).sum();
      if (p.values.row(i).minCoeff() < -1e-9 || std::abs(s - 1.0) > 1e-4) {
        throw BridgeError("bridge: prediction row " + std::to_string(i) + " is not a probability vector");
      }
      p.values.row(i) = p.values.row(i).cwiseMax(0.0) / p.values.row(i).cwiseMax(0.0).sum();
    }
  }
  return p;
}

Prediction bridge_predict(const PredictRequest& req, const fs::path& endpoint,
                          std::chrono::milliseconds timeout, const BridgeLimits& limits) {
  req.validate();
  check_bridge_limits(req, limits);
  if (!fs::is_directory(endpoint)) {
    throw BridgeError("bridge: endpoint directory " + endpoint.string() + " does not exist");
  }
  static std::atomic<unsigned> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  const std::string id = "req-" + std::to_string(stamp) + "-" + std::to_string(counter++);
  const fs::path dir = write_bridge_request(req, endpoint, id);

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto wait = std::chrono::milliseconds(5);
  while (true) {
    if (fs::exists(dir / "ERROR")) {
      throw BridgeError("bridge: " + csv::trim(read_text(dir / "ERROR")));
    }
    if (fs::exists(dir / "DONE")) return read_bridge_response(dir, req);
    if (std::chrono::steady_clock::now() >= deadline) {
      throw BridgeError("bridge: no response for " + id + " within " +
                        std::to_string(timeout.count()) + " ms");
    }
    std::this_thread::sleep_for(wait);
    wait = std::min(wait * 2, std::chrono::milliseconds(200));
  }
}

}  // namespace gtab
