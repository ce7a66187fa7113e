#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "osp/numerics.hpp"

namespace osp {

// Run description parsed from a plain key = value file.  Unknown keys are
// rejected so typos fail loudly instead of silently using a default.
struct ExperimentConfig {
  // Structure.
  std::string structure = "multiclass";  // multiclass | multilabel | ranking
  int d = 8;       // classes (multiclass), labels (multilabel), items (ranking)
  int m = 2;       // active labels, multilabel only
  double zeta = 1.0;

  // Stream.
  std::string stream = "synth_multiclass";
  int nprime = 2;          // signature block size for synth_multiclass
  double noise = 0.0;      // label flip probability for synth_multiclass
  int stream_n = 64;       // distinct examples (separable) / input dim (synth_multilabel)
  double margin = 1.0;     // separation margin for separable
  std::string mnist_images;
  std::string mnist_labels;

  // Protocol.
  long horizon = 1000;
  int reps = 1;
  std::uint64_t seed = 1;
  std::string feedback = "full";    // full | bandit
  std::string estimator = "exact";  // exact | iw | pi
  std::string q_policy = "zero";    // zero | fixed:<v> | theory_iw | theory_pi
                                    // | theory_pi_delayed

  // Learner.
  std::string learner = "ogd";      // ogd | bold | odaftrl | solid
  double B = 2.0;
  double R = -1.0;                  // solid radius, defaults to B/2
  double eps0 = 1e-8;

  // Delay.
  std::string delay = "none";       // none | fixed:<d> | uniform:<max> | trace:<path>

  // Reporting.
  std::string comparator = "zero";  // zero | planted | offline
  int offline_passes = 4;
  int threads = 1;
  std::string out;
  long log_every = 1;

  // Sweep axes: key -> list of raw values, in file order.
  std::vector<std::pair<std::string, std::vector<std::string>>> sweep;
};

// Parses "key = value" lines; '#' starts a comment, blanks are skipped.
// Lines of the form "sweep.key = a,b,c" declare sweep axes.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Applies one "key = value" override (used by sweeps and tests).
void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value);

// Checks cross-field consistency; throws ConfigError with a message naming
// the offending key.
void validate(const ExperimentConfig& cfg);

// Splits "name:arg" into its two parts; arg is empty when there is no colon.
std::pair<std::string, std::string> split_tag(const std::string& s);

}  // namespace osp
