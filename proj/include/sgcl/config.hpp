#pragma once

#include <map>
#include <string>

#include "sgcl/augment.hpp"
#include "sgcl/model.hpp"
#include "sgcl/objectives.hpp"
#include "sgcl/trainer.hpp"

namespace sgcl {

inline constexpr const char* kVersionString = "sgcl 0.1.0";

// Everything a run needs, mirroring the config-file keys one to one.
struct RunConfig {
  EncoderConfig encoder;
  LossConfig loss;
  AugmentConfig augment;
  TrainConfig train;
  Real k_damping = 0.75;       // synonym sampling exponent
  bool graph_directed = false; // directed global-graph variant (ablation)
  bool ln_affine = false;      // learnable affine after layer norm
};

// Line-oriented `key = value`; '#' starts a comment. Unknown keys error.
std::map<std::string, std::string> parse_kv_text(const std::string& text);
std::map<std::string, std::string> parse_kv_file(const std::string& path);

void apply_kv(RunConfig& cfg, const std::map<std::string, std::string>& kv);

// Resolved snapshot in config-file syntax (also the manifest body).
std::string dump_config(const RunConfig& cfg);

void write_manifest(const RunConfig& cfg, const std::string& dir, std::uint64_t corpus_hash,
                    const std::string& note = "");

}  // namespace sgcl
