#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "acnmp/cnmp.hpp"
#include "acnmp/io.hpp"

using namespace acnmp;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("acnmp_test_" + std::to_string(std::rand()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

Trajectory wiggle(double a, const std::string& id) {
  Trajectory t;
  t.id = id;
  t.task_params = {a, -a};
  for (int k = 0; k < 12; ++k) {
    const double time = k / 11.0;
    t.times.push_back(time);
    t.values.push_back({a * time, std::cos(a + time)});
  }
  return t;
}

}  // namespace

TEST_CASE("dataset JSONL round trip is bit exact") {
  TempDir tmp;
  DemonstrationSet demos;
  demos.add(wiggle(0.123456789012345, "a"));
  demos.add(wiggle(-2.5, "b"));

  const std::string path = tmp.file("demos.jsonl");
  save_dataset(demos, path);
  const DemonstrationSet loaded = load_dataset(path);

  REQUIRE(loaded.size() == demos.size());
  REQUIRE(loaded.sm_width == 2);
  REQUIRE(loaded.gamma_width == 2);
  for (std::size_t i = 0; i < demos.size(); ++i) {
    REQUIRE(loaded.trajectories[i].id == demos.trajectories[i].id);
    REQUIRE(loaded.trajectories[i].task_params == demos.trajectories[i].task_params);
    REQUIRE(loaded.trajectories[i].times == demos.trajectories[i].times);
    REQUIRE(loaded.trajectories[i].values == demos.trajectories[i].values);
  }

  // saving again produces identical bytes
  const std::string again = tmp.file("demos2.jsonl");
  save_dataset(loaded, again);
  REQUIRE(read_text_file(path) == read_text_file(again));
}

TEST_CASE("dataset loader rejects malformed content") {
  TempDir tmp;
  const std::string path = tmp.file("bad.jsonl");

  write_text_file(path, "not json\n");
  REQUIRE_THROWS_AS(load_dataset(path), DataError);

  write_text_file(path, R"({"id":"x","task_params":[],"points":[[0.0,1.0],[1.5,2.0]]})"
                        "\n");
  REQUIRE_THROWS_AS(load_dataset(path), DataError);  // t outside [0,1]

  write_text_file(path, R"({"id":"x","task_params":[],"points":[[0.5,1.0],[0.5,2.0]]})"
                        "\n");
  REQUIRE_THROWS_AS(load_dataset(path), DataError);  // not strictly increasing

  write_text_file(path, R"({"id":"x","task_params":[],"points":[[0.0,1.0]]})"
                        "\n");
  REQUIRE_THROWS_AS(load_dataset(path), DataError);  // fewer than 2 points

  write_text_file(path, "");
  REQUIRE_THROWS_AS(load_dataset(path), DataError);  // empty dataset

  REQUIRE_THROWS_AS(load_dataset(tmp.file("missing.jsonl")), DataError);
}

TEST_CASE("snapshot reload reproduces generate() bit exactly") {
  TempDir tmp;
  const CNMPModel model = make_cnmp(2, 1, {16, 8}, {16, 16, 4}, 42);
  const std::string path = tmp.file("model.snapshot");
  save_snapshot(model, path);
  const CNMPModel loaded = load_snapshot(path);

  REQUIRE(loaded.encoder_params == model.encoder_params);
  REQUIRE(loaded.decoder_params == model.decoder_params);
  REQUIRE(loaded.encoder_spec == model.encoder_spec);
  REQUIRE(loaded.decoder_spec == model.decoder_spec);
  REQUIRE(loaded.sigma_floor == model.sigma_floor);

  const std::vector<ObservationPoint> cond{{0.25, {0.5}, {0.1, -0.4}}};
  const auto a = generate(model, cond, {0.5}, uniform_grid(37));
  const auto b = generate(loaded, cond, {0.5}, uniform_grid(37));
  REQUIRE(a.values == b.values);
}

TEST_CASE("snapshot loader rejects corrupted files") {
  TempDir tmp;
  const CNMPModel model = make_cnmp(1, 0, {4}, {4, 2}, 1);
  const std::string path = tmp.file("model.snapshot");
  save_snapshot(model, path);

  std::string text = read_text_file(path);
  write_text_file(tmp.file("trunc.snapshot"), text.substr(0, text.size() / 2));
  REQUIRE_THROWS_AS(load_snapshot(tmp.file("trunc.snapshot")), DataError);

  write_text_file(tmp.file("magic.snapshot"), "something-else v9\n" + text);
  REQUIRE_THROWS_AS(load_snapshot(tmp.file("magic.snapshot")), DataError);

  REQUIRE_THROWS_AS(load_snapshot(tmp.file("absent.snapshot")), DataError);
}
