#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "doctest.h"

#include "splitstep/config.hpp"

using namespace splitstep;

namespace {

bool mentions_line(const char* what, int line) {
  return std::string(what).find("line " + std::to_string(line)) != std::string::npos;
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("an empty document produces the documented defaults") {
  const ExperimentConfig cfg = parse_config("");
  CHECK(cfg.problem == "heat_neumann");
  CHECK(cfg.m == 257);
  CHECK(cfg.extent_lo == 0.0);
  CHECK(cfg.extent_hi == 1.0);
  CHECK(cfg.T == 1.0);
  CHECK(cfg.N == 64);
  CHECK(cfg.N_sweep.empty());
  CHECK(cfg.scheme == SchemeKind::sum);
  CHECK(cfg.s == 2);
  CHECK(cfg.overlap_fraction == 0.125);
  CHECK(cfg.profile == "ramp");
  CHECK(cfg.p == 2.0);
  CHECK_FALSE(cfg.p_set);
  CHECK_FALSE(cfg.kind.has_value());
  CHECK_FALSE(cfg.alpha_value.has_value());
  CHECK_FALSE(cfg.alpha_slope.has_value());
  CHECK(cfg.alpha_table.empty());
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.threads == 1);
  CHECK_FALSE(cfg.record_sublevels);
  CHECK(cfg.reference == "exact");
}

TEST_CASE("keys, comments and blank lines parse as documented") {
  const ExperimentConfig cfg = parse_config(
      "# full override\n"
      "problem = decay\n"
      "m = 129   # nodes\n"
      "extent_lo = -1\n"
      "extent_hi = 3\n"
      "\n"
      "T = 2\n"
      "N = 32\n"
      "N_sweep = 8, 16, 32\n"
      "scheme = backward_euler\n"
      "s = 4\n"
      "overlap_fraction = 0.2\n"
      "profile = ramp\n"
      "p = 4\n"
      "kind = anisotropic\n"
      "alpha_table = 0:1, 0.5:2, 1:1.5\n"
      "tol_abs = 1e-9\n"
      "tol_rel = 0\n"
      "max_newton_iters = 12\n"
      "jacobian_regularization = 1e-10\n"
      "damping_factor = 0.25\n"
      "max_damping_halvings = 5\n"
      "output_dir = results\n"
      "threads = 3\n"
      "record_sublevels = yes\n"
      "reference = 256\n");
  CHECK(cfg.problem == "decay");
  CHECK(cfg.m == 129);
  CHECK(cfg.extent_lo == -1.0);
  CHECK(cfg.extent_hi == 3.0);
  CHECK(cfg.T == 2.0);
  CHECK(cfg.N == 32);
  CHECK(cfg.N_sweep == std::vector<int>{8, 16, 32});
  CHECK(cfg.scheme == SchemeKind::backward_euler);
  CHECK(cfg.s == 4);
  CHECK(cfg.overlap_fraction == 0.2);
  CHECK(cfg.p == 4.0);
  CHECK(cfg.p_set);
  REQUIRE(cfg.kind.has_value());
  CHECK(*cfg.kind == OperatorKind::anisotropic);
  REQUIRE(cfg.alpha_table.size() == 3);
  CHECK(cfg.alpha_table[1].first == 0.5);
  CHECK(cfg.alpha_table[1].second == 2.0);
  CHECK(cfg.resolvent.tol_abs == 1e-9);
  CHECK(cfg.resolvent.tol_rel == 0.0);
  CHECK(cfg.resolvent.max_newton_iters == 12);
  CHECK(cfg.resolvent.jacobian_regularization == 1e-10);
  CHECK(cfg.resolvent.damping_factor == 0.25);
  CHECK(cfg.resolvent.max_damping_halvings == 5);
  CHECK(cfg.output_dir == "results");
  CHECK(cfg.threads == 3);
  CHECK(cfg.record_sublevels);
  CHECK(cfg.reference == "256");
}

TEST_CASE("failures name the offending line") {
  try {
    parse_config("m = 65\nN = 8\nnot_a_key = 1\n");
    FAIL("expected a parse failure");
  } catch (const ConfigError& e) {
    CHECK(mentions_line(e.what(), 3));
    CHECK(std::string(e.what()).find("not_a_key") != std::string::npos);
  }
  try {
    parse_config("m = 65\njust some words\n");
    FAIL("expected a parse failure");
  } catch (const ConfigError& e) {
    CHECK(mentions_line(e.what(), 2));
  }
}

TEST_CASE("scalar keys reject out-of-range or malformed values") {
  CHECK_THROWS_AS(parse_config("m = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("m = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("T = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("s = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("p = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("p = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("overlap_fraction = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("overlap_fraction = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("profile = smooth\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("scheme = sum\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("kind = heat\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("threads = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("max_newton_iters = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("damping_factor = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("record_sublevels = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("alpha_value = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("m =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("= 3\n"), ConfigError);
}

TEST_CASE("sweep lists must increase strictly") {
  CHECK(parse_config("N_sweep = 16\n").N_sweep == std::vector<int>{16});
  CHECK_THROWS_AS(parse_config("N_sweep = 16, 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N_sweep = 8, 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N_sweep = 4,,8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("N_sweep = 0, 8\n"), ConfigError);
}

TEST_CASE("coefficient tables must be positive and ordered in time") {
  CHECK_THROWS_AS(parse_config("alpha_table = 0 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("alpha_table = 0:0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("alpha_table = 0:1, 0:2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("alpha_table = 0.5:1, 0.2:2\n"), ConfigError);
  const ExperimentConfig cfg = parse_config("alpha_table = 0:2\n");
  REQUIRE(cfg.alpha_table.size() == 1);
  CHECK(cfg.alpha_table[0].second == 2.0);
}

TEST_CASE("the reference key takes 'exact' or a step count") {
  CHECK(parse_config("reference = exact\n").reference == "exact");
  CHECK(parse_config("reference = 128\n").reference == "128");
  CHECK_THROWS_AS(parse_config("reference = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("reference = fine\n"), ConfigError);
}

TEST_CASE("the extent must be a nonempty interval") {
  CHECK_THROWS_AS(parse_config("extent_lo = 1\nextent_hi = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("extent_lo = 1\nextent_hi = 1\n"), ConfigError);
}

TEST_CASE("the worker-count environment variable seeds the default") {
  REQUIRE(setenv("SPLITSTEP_THREADS", "3", 1) == 0);
  CHECK(parse_config("").threads == 3);
  // an explicit key wins over the environment
  CHECK(parse_config("threads = 2\n").threads == 2);
  REQUIRE(setenv("SPLITSTEP_THREADS", "zero", 1) == 0);
  CHECK_THROWS_AS(parse_config(""), ConfigError);
  REQUIRE(setenv("SPLITSTEP_THREADS", "-4", 1) == 0);
  CHECK_THROWS_AS(parse_config(""), ConfigError);
  REQUIRE(unsetenv("SPLITSTEP_THREADS") == 0);
  CHECK(parse_config("").threads == 1);
}

TEST_CASE("config files are read verbatim and missing paths are reported") {
  const std::string path = "config_roundtrip_tmp.cfg";
  {
    std::ofstream out(path);
    out << "m = 65\nscheme = lie_splitting\n";
  }
  const ExperimentConfig cfg = parse_config_file(path);
  CHECK(cfg.m == 65);
  CHECK(cfg.scheme == SchemeKind::lie);
  std::remove(path.c_str());
  CHECK_THROWS_AS(parse_config_file("definitely_not_here.cfg"), ConfigError);
}

} // TEST_SUITE
