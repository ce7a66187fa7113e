#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "osp/config.hpp"

using namespace osp;

namespace {

// A fully specified bandit run used as the starting point for validate cases.
ExperimentConfig bandit_base() {
  ExperimentConfig cfg;
  cfg.feedback = "bandit";
  cfg.estimator = "iw";
  cfg.q_policy = "fixed:0.2";
  return cfg;
}

}  // namespace

TEST_CASE("defaults validate as a full-information run") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  CHECK(cfg.structure == "multiclass");
  CHECK(cfg.d == 8);
  CHECK(cfg.horizon == 1000);
  CHECK(cfg.seed == 1);
  CHECK(cfg.B == 2.0);
}

TEST_CASE("parser reads keys, comments and blank lines") {
  ExperimentConfig cfg = parse_config_text(
      "# experiment\n"
      "structure = multilabel\n"
      "d = 6\n"
      "m=3   # inline comment\n"
      "\n"
      "stream = separable\n"
      "margin = 0.5\n"
      "horizon = 250\n"
      "seed = 99\n"
      "learner = bold\n"
      "delay = fixed:4\n"
      "out = /tmp/somewhere\n");
  CHECK(cfg.structure == "multilabel");
  CHECK(cfg.d == 6);
  CHECK(cfg.m == 3);
  CHECK(cfg.stream == "separable");
  CHECK(cfg.margin == 0.5);
  CHECK(cfg.horizon == 250);
  CHECK(cfg.seed == 99);
  CHECK(cfg.learner == "bold");
  CHECK(cfg.delay == "fixed:4");
  CHECK(cfg.out == "/tmp/somewhere");
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("later assignments win") {
  ExperimentConfig cfg = parse_config_text("d = 3\nd = 5\n");
  CHECK(cfg.d == 5);
}

TEST_CASE("parser rejects malformed input") {
  CHECK_THROWS_AS(parse_config_text("frobnicate = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just some words\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("d = three\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("d = 3x\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("B = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("seed = 12abc\n"), ConfigError);
}

TEST_CASE("sweep lines collect axes in file order") {
  ExperimentConfig cfg = parse_config_text(
      "sweep.d = 4, 8, 16\n"
      "sweep.learner = ogd, solid\n");
  REQUIRE(cfg.sweep.size() == 2);
  CHECK(cfg.sweep[0].first == "d");
  CHECK((cfg.sweep[0].second == std::vector<std::string>{"4", "8", "16"}));
  CHECK(cfg.sweep[1].first == "learner");
  CHECK((cfg.sweep[1].second == std::vector<std::string>{"ogd", "solid"}));
  // Base keys are untouched by sweep declarations.
  CHECK(cfg.d == 8);
  CHECK(cfg.learner == "ogd");

  CHECK_THROWS_AS(parse_config_text("sweep.d = \n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("sweep. = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("sweep.bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("sweep.d = 1, nope\n"), ConfigError);
}

TEST_CASE("parse_config_file requires a readable path") {
  CHECK_THROWS_AS(parse_config_file("/nonexistent/osp.cfg"), ConfigError);
}

TEST_CASE("split_tag separates name and argument") {
  CHECK(split_tag("fixed:0.5") == std::make_pair(std::string("fixed"), std::string("0.5")));
  CHECK(split_tag("none") == std::make_pair(std::string("none"), std::string("")));
  CHECK(split_tag("trace:/a:b") == std::make_pair(std::string("trace"), std::string("/a:b")));
}

TEST_CASE("validate rejects inconsistent structure settings") {
  ExperimentConfig cfg;
  cfg.structure = "simplex";
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.d = 1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.structure = "multilabel";
  cfg.stream = "synth_multilabel";
  cfg.m = 8;  // m must stay below d
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.m = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.structure = "ranking";
  cfg.stream = "separable";
  cfg.d = 13;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.d = 4;
  CHECK_NOTHROW(validate(cfg));

  cfg.zeta = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("validate enforces stream and structure pairing") {
  ExperimentConfig cfg;
  cfg.stream = "telemetry";
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.structure = "multilabel";  // with stream synth_multiclass
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.stream = "synth_multilabel";
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.stream = "mnist";
  cfg.d = 10;
  CHECK_THROWS_AS(validate(cfg), ConfigError);  // missing idx paths
  cfg.mnist_images = "a";
  cfg.mnist_labels = "b";
  CHECK_NOTHROW(validate(cfg));
  cfg.d = 8;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.nprime = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.noise = 1.5;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.stream = "separable";
  cfg.margin = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("validate ties feedback, estimator and exploration together") {
  ExperimentConfig cfg;
  cfg.estimator = "pi";  // full feedback must use exact gradients
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = bandit_base();
  CHECK_NOTHROW(validate(cfg));
  cfg.estimator = "exact";
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = bandit_base();
  cfg.q_policy = "zero";
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.q_policy = "fixed:0.1";  // exploration without bandit feedback
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = bandit_base();
  cfg.q_policy = "fixed:0";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.q_policy = "fixed:1.5";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.q_policy = "fixed:nan?";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.q_policy = "fixed:nan";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.q_policy = "adaptive";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.q_policy = "theory_iw";
  CHECK_NOTHROW(validate(cfg));
  cfg.estimator = "pi";
  cfg.q_policy = "theory_pi";
  CHECK_NOTHROW(validate(cfg));

  cfg = ExperimentConfig{};
  cfg.feedback = "semi";
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.estimator = "doubly_robust";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("validate checks learner and delay settings") {
  ExperimentConfig cfg;
  cfg.learner = "adam";
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.B = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.eps0 = 0.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.delay = "poisson:3";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.delay = "fixed:-1";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.delay = "fixed:x";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.delay = "trace:";
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.delay = "uniform:6";
  CHECK_NOTHROW(validate(cfg));

  cfg.learner = "odaftrl";  // cannot reorder feedback
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.delay = "fixed:6";
  CHECK_NOTHROW(validate(cfg));
  cfg.delay = "none";
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("validate checks reporting settings") {
  ExperimentConfig cfg;
  cfg.horizon = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.reps = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.comparator = "oracle";
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.comparator = "planted";  // needs the separable stream
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.stream = "separable";
  CHECK_NOTHROW(validate(cfg));

  cfg = ExperimentConfig{};
  cfg.offline_passes = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.threads = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);

  cfg = ExperimentConfig{};
  cfg.log_every = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}
