#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "miace/io.hpp"
#include "miace/train.hpp"
#include "test_util.hpp"

using namespace miace;
using namespace miace::testutil;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() /
           ("miace_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

BagSet random_bags(std::mt19937_64& rng, int n_bags, int per_bag,
                   Eigen::Index d) {
  std::vector<Bag> bags;
  for (int j = 0; j < n_bags; ++j) {
    Bag bag{"bag" + std::to_string(j), j % 2 == 0, {}};
    for (int i = 0; i < per_bag; ++i) {
      bag.instances.push_back(random_vector(rng, d, -10.0, 10.0));
    }
    bags.push_back(std::move(bag));
  }
  return BagSet(std::move(bags));
}

}  // namespace

TEST_CASE("bag csv round trip is lossless") {
  TempDir tmp;
  std::mt19937_64 rng(103);
  const auto bags = random_bags(rng, 10, 5, 7);
  const auto path = tmp.path / "bags.csv";
  write_bag_csv(path, bags);
  const auto loaded = read_bag_csv(path);

  REQUIRE(loaded.bags().size() == bags.bags().size());
  for (std::size_t j = 0; j < bags.bags().size(); ++j) {
    CHECK(loaded.bags()[j].id == bags.bags()[j].id);
    CHECK(loaded.bags()[j].positive == bags.bags()[j].positive);
    REQUIRE(loaded.bags()[j].instances.size() ==
            bags.bags()[j].instances.size());
    for (std::size_t i = 0; i < bags.bags()[j].instances.size(); ++i) {
      CHECK(loaded.bags()[j].instances[i] == bags.bags()[j].instances[i]);
    }
  }
}

TEST_CASE("bag csv error paths") {
  TempDir tmp;
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_bag_csv(tmp.path / "absent.csv"), IoError);
  }
  SUBCASE("bad header") {
    const auto path = tmp.path / "bad.csv";
    std::ofstream(path) << "id,label,f0\n";
    CHECK_THROWS_AS(read_bag_csv(path), IoError);
  }
  SUBCASE("conflicting labels within a bag") {
    const auto path = tmp.path / "conflict.csv";
    std::ofstream(path) << "bag_id,label,f0\nb,1,0.5\nb,0,0.25\n";
    CHECK_THROWS_AS(read_bag_csv(path), IoError);
  }
  SUBCASE("non-numeric feature") {
    const auto path = tmp.path / "nan.csv";
    std::ofstream(path) << "bag_id,label,f0\nb,1,xyz\n";
    CHECK_THROWS_AS(read_bag_csv(path), IoError);
  }
}

TEST_CASE("signature json reproduces detector scores exactly") {
  TempDir tmp;
  std::mt19937_64 rng(107);
  const auto bags = random_bags(rng, 8, 6, 4);

  TrainConfig config;
  config.mode = Mode::Ace;
  const auto result = train(bags, config);

  SignatureFile file;
  file.signature = result.signature;
  file.iterations = result.iterations;
  file.objective = result.objective;
  file.converged = result.converged;
  const auto path = tmp.path / "sig.json";
  write_signature_json(path, file);
  const auto loaded = read_signature_json(path);

  CHECK(loaded.iterations == result.iterations);
  CHECK(loaded.objective == result.objective);
  CHECK(loaded.converged == result.converged);
  CHECK(loaded.signature.mode == Mode::Ace);
  CHECK(loaded.signature.signature == result.signature.signature);

  const auto instances = bags.all_instances();
  const auto expected = score_dataset(instances, result.signature);
  const auto actual = score_dataset(instances, loaded.signature);
  for (std::size_t i = 0; i < expected.scores.size(); ++i) {
    // The whitened form is recomputed on read, so agreement is to
    // round-off, not bitwise.
    CHECK(actual.scores[i] ==
          doctest::Approx(expected.scores[i]).epsilon(1e-12));
  }

  // Re-reading the same file is bit-stable.
  const auto again = read_signature_json(path);
  const auto rescored = score_dataset(instances, again.signature);
  for (std::size_t i = 0; i < actual.scores.size(); ++i) {
    CHECK(rescored.scores[i] == actual.scores[i]);
  }
}

TEST_CASE("concept json round trip") {
  TempDir tmp;
  std::mt19937_64 rng(109);
  const DDConcept dd{random_vector(rng, 5), random_vector(rng, 5, 0.0, 2.0)};
  const auto path = tmp.path / "concept.json";
  write_concept_json(path, dd);
  const auto loaded = read_concept_json(path);
  CHECK(loaded.point == dd.point);
  CHECK(loaded.scales == dd.scales);
}

TEST_CASE("scores csv round trip") {
  TempDir tmp;
  SUBCASE("with truth labels") {
    const std::vector<ScoreRow> rows = {
        {"0", 0.125, 1}, {"1", -3.5e-7, 0}, {"2", 1.0 / 3.0, 1}};
    const auto path = tmp.path / "scores.csv";
    write_scores_csv(path, rows);
    const auto loaded = read_scores_csv(path);
    REQUIRE(loaded.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(loaded[i].instance_id == rows[i].instance_id);
      CHECK(loaded[i].score == rows[i].score);
      CHECK(loaded[i].truth_label == rows[i].truth_label);
    }
  }
  SUBCASE("without truth labels") {
    const std::vector<ScoreRow> rows = {{"a", 1.5, std::nullopt}};
    const auto path = tmp.path / "scores2.csv";
    write_scores_csv(path, rows);
    const auto loaded = read_scores_csv(path);
    REQUIRE(loaded.size() == 1);
    CHECK_FALSE(loaded[0].truth_label.has_value());
  }
}

TEST_CASE("truth csv round trip") {
  TempDir tmp;
  SyntheticConfig config;
  config.endmembers = make_endmembers(EndmemberKind::SmoothSpectra, 8, 3, 4);
  config.n_pos_bags = 2;
  config.n_neg_bags = 2;
  config.instances_per_bag = 3;
  config.targets_per_positive_bag = 1;
  config.seed = 12;
  const auto data = generate(config);
  const auto path = tmp.path / "truth.csv";
  write_truth_csv(path, data);
  const auto rows = read_truth_csv(path);
  REQUIRE(rows.size() == data.truth.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].bag_id == data.truth[i].bag_id);
    CHECK(rows[i].alpha_target == data.truth[i].alpha_target);
    CHECK(rows[i].instance_label == (data.truth[i].is_target ? 1 : 0));
  }
}

TEST_CASE("config parsing") {
  SUBCASE("values, comments, and whitespace") {
    const auto config = parse_config_text(
        "# header comment\n"
        "mode = ace\n"
        "snr_db=20.0   # trailing comment\n"
        "  seed =   42\n"
        "\n");
    CHECK(config.at("mode") == "ace");
    CHECK(config.at("snr_db") == "20.0");
    CHECK(config.at("seed") == "42");
    CHECK(config.size() == 3);
  }
  SUBCASE("malformed lines are rejected") {
    CHECK_THROWS_AS(parse_config_text("just some words\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("= value\n"), ConfigError);
  }
}

TEST_CASE("manifest and digests") {
  TempDir tmp;
  const auto data_path = tmp.path / "data.txt";
  std::ofstream(data_path) << "payload";

  const auto d1 = file_digest(data_path);
  CHECK(d1.size() == 16);
  CHECK(d1 == file_digest(data_path));
  std::ofstream(data_path, std::ios::app) << "!";
  CHECK(d1 != file_digest(data_path));

  RunManifest manifest;
  manifest.command = "generate";
  manifest.config = {{"seed", "7"}};
  manifest.seeds = {{"seed", 7}};
  manifest.outputs = {data_path};
  manifest.wall_clock_s = 0.25;
  const auto path = tmp.path / "manifest.json";
  write_manifest(path, manifest);

  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("\"command\": \"generate\"") != std::string::npos);
  CHECK(text.find(file_digest(data_path)) != std::string::npos);
}
