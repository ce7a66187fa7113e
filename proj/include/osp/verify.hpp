#pragma once
// Property suites: every analytically derived quantity in the library is
// rechecked here against a brute-force or first-principles oracle on small
// instances. The CLI `verify` subcommand and the acceptance gate both run
// these; the per-structure batteries also accept tampered specs so tests can
// confirm the checks actually detect corruption.

#include <string>
#include <vector>

#include "osp/fy_loss.hpp"
#include "osp/structures.hpp"

namespace osp {

struct CheckResult {
  std::string name;
  bool pass = false;
  double slack = 0.0;   // bound minus measured value (negative on failure)
  std::string detail;
};

// Oracle battery for one structure; enumerates the vertex set, so card must
// stay small (a few thousand).
std::vector<CheckResult> check_structure(const StructureSpec& spec);

std::vector<CheckResult> check_losses(const StructureSpec& spec,
                                      const Regularizer& reg, int trials,
                                      std::uint64_t seed);

std::vector<CheckResult> check_decoding(const StructureSpec& spec,
                                        const Regularizer& reg, int trials,
                                        std::uint64_t seed);

std::vector<CheckResult> check_estimators(const StructureSpec& spec,
                                          const Regularizer& reg, int trials,
                                          std::uint64_t seed);

std::vector<CheckResult> check_numerics(std::uint64_t seed);
std::vector<CheckResult> check_delay(std::uint64_t seed);
std::vector<CheckResult> check_learners(std::uint64_t seed);
std::vector<CheckResult> check_envs(std::uint64_t seed);
std::vector<CheckResult> check_harness(std::uint64_t seed);

std::vector<std::string> suite_names();
std::vector<CheckResult> run_suite(const std::string& name, std::uint64_t seed);
std::vector<CheckResult> run_all_suites(std::uint64_t seed);

}  // namespace osp
