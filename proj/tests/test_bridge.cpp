#include <doctest.h>

#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gtab/bridge.hpp"
#include "gtab/csv.hpp"
#include "gtab/error.hpp"
#include "support.hpp"

using namespace gtab;
namespace fs = std::filesystem;

namespace {

// Stand-in for the external server: answers every READY request directory
// with class frequencies of the train targets (or their mean), or with a
// canned failure.
class FakeServer {
 public:
  enum class Mode { answer, error, bad_rows, silent };

  FakeServer(fs::path endpoint, Mode mode) : endpoint_(std::move(endpoint)), mode_(mode) {
    thread_ = std::thread([this] { loop(); });
  }
  ~FakeServer() {
    stop_ = true;
    thread_.join();
  }
  int served() const { return served_; }

 private:
  void loop() {
    std::set<fs::path> done;
    while (!stop_) {
      for (const auto& entry : fs::directory_iterator(endpoint_)) {
        const fs::path dir = entry.path();
        if (done.count(dir) || !fs::exists(dir / "READY")) continue;
        done.insert(dir);
        answer(dir);
        ++served_;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }

  void answer(const fs::path& dir) {
    if (mode_ == Mode::silent) return;
    if (mode_ == Mode::error) {
      std::ofstream(dir / "ERROR") << "backbone exploded\n";
      return;
    }
    std::ifstream mf(dir / "meta.json");
    const auto meta = nlohmann::json::parse(mf);
    const csv::Table train = csv::read(dir / "train.csv", true);
    const std::size_t n_test = meta["n_test"];
    const std::size_t c = meta["n_classes"];
    std::vector<double> row;
    if (c > 0) {
      row.assign(c, 0.0);
      for (const auto& r : train.rows) row[std::stoul(r.back())] += 1.0 / double(train.rows.size());
    } else {
      double s = 0;
      for (const auto& r : train.rows) s += std::stod(r.back());
      row.push_back(s / double(train.rows.size()));
    }
    if (mode_ == Mode::bad_rows) row[0] += 0.5;
    std::ofstream out(dir / "predictions.csv");
    for (std::size_t i = 0; i < n_test; ++i) {
      for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << csv::format_double(row[k]);
      out << '\n';
    }
    out.close();
    std::ofstream(dir / "DONE");
  }

  fs::path endpoint_;
  Mode mode_;
  std::atomic<bool> stop_{false};
  std::atomic<int> served_{0};
  std::thread thread_;
};

PredictRequest toy(TaskKind task, std::size_t n_classes, std::size_t n_train) {
  Rng rng(61);
  PredictRequest r;
  r.task = task;
  r.n_classes = n_classes;
  r.train_x.resize(n_train, 3);
  r.test_x.resize(10, 3);
  for (Eigen::Index i = 0; i < r.train_x.size(); ++i) r.train_x.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < r.test_x.size(); ++i) r.test_x.data()[i] = rng.normal();
  for (std::size_t i = 0; i < n_train; ++i) r.train_y.push_back(n_classes ? double(i % n_classes) : rng.normal());
  r.feature_names = {"a", "b", "c"};
  return r;
}

}  // namespace

TEST_CASE("request files follow the wire format") {
  testing::TempDir tmp;
  PredictRequest r = toy(TaskKind::binary, 2, 5);
  r.train_x(0, 1) = kMissing;
  const fs::path dir = write_bridge_request(r, tmp.path, "req-x");
  CHECK(fs::exists(dir / "READY"));
  CHECK(fs::file_size(dir / "READY") == 0);
  const csv::Table train = csv::read(dir / "train.csv", true);
  CHECK(train.header == std::vector<std::string>{"a", "b", "c", "__target__"});
  CHECK(train.rows.size() == 5);
  CHECK(train.rows[0][1] == "nan");
  const csv::Table test = csv::read(dir / "test.csv", true);
  CHECK(test.header.size() == 3);
  std::ifstream mf(dir / "meta.json");
  const auto meta = nlohmann::json::parse(mf);
  CHECK(meta["request_id"] == "req-x");
  CHECK(meta["task"] == "binary");
  CHECK(meta["n_classes"] == 2);
  CHECK(meta["n_train"] == 5);
  CHECK(meta["n_test"] == 10);
}

TEST_CASE("round trip with a fake server: classification and regression") {
  testing::TempDir tmp;
  FakeServer server(tmp.path, FakeServer::Mode::answer);
  const PredictRequest cls = toy(TaskKind::multiclass, 3, 50);
  const Prediction p = bridge_predict(cls, tmp.path, std::chrono::seconds(10));
  CHECK_NOTHROW(p.validate());
  CHECK(p.values.rows() == 10);
  CHECK(p.values(0, 0) == doctest::Approx(17.0 / 50.0));
  const PredictRequest reg = toy(TaskKind::regression, 0, 50);
  const BridgePredictor bp(tmp.path, std::chrono::seconds(10));
  const Prediction q = bp.predict(reg);
  CHECK(q.values.cols() == 1);
  double mean = 0;
  for (double y : reg.train_y) mean += y / 50;
  CHECK(q.values(3, 0) == doctest::Approx(mean));
}

TEST_CASE("limits are checked before anything is written") {
  testing::TempDir tmp;
  CHECK_THROWS_AS(bridge_predict(toy(TaskKind::multiclass, 11, 50), tmp.path, std::chrono::seconds(1)), InputError);
  CHECK_THROWS_AS(check_bridge_limits(toy(TaskKind::regression, 0, 10001)), InputError);
  CHECK(fs::is_empty(tmp.path));
}

TEST_CASE("server failures surface as bridge errors") {
  {
    testing::TempDir tmp;
    FakeServer server(tmp.path, FakeServer::Mode::error);
    try {
      bridge_predict(toy(TaskKind::binary, 2, 20), tmp.path, std::chrono::seconds(10));
      FAIL("expected BridgeError");
    } catch (const BridgeError& e) {
      CHECK(std::string(e.what()).find("backbone exploded") != std::string::npos);
      CHECK(e.exit_code() == 3);
    }
  }
  {
    testing::TempDir tmp;
    FakeServer server(tmp.path, FakeServer::Mode::bad_rows);
    CHECK_THROWS_AS(bridge_predict(toy(TaskKind::binary, 2, 20), tmp.path, std::chrono::seconds(10)), BridgeError);
  }
  {
    testing::TempDir tmp;
    FakeServer server(tmp.path, FakeServer::Mode::silent);
    CHECK_THROWS_AS(bridge_predict(toy(TaskKind::binary, 2, 20), tmp.path, std::chrono::milliseconds(50)), BridgeError);
  }
  CHECK_THROWS_AS(bridge_predict(toy(TaskKind::binary, 2, 20), "/nonexistent/endpoint", std::chrono::milliseconds(50)),
                  BridgeError);
}

TEST_CASE("response rows are renormalized and headers tolerated") {
  testing::TempDir tmp;
  const PredictRequest r = toy(TaskKind::binary, 2, 5);
  const fs::path dir = write_bridge_request(r, tmp.path, "req-y");
  std::ofstream out(dir / "predictions.csv");
  out << "p0,p1\n";
  for (int i = 0; i < 10; ++i) out << "0.25,0.75000005\n";
  out.close();
  const Prediction p = read_bridge_response(dir, r);
  CHECK(p.values.row(0).sum() == doctest::Approx(1.0).epsilon(1e-15));
}
