#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "spdcbell/model.hpp"

namespace spdcbell {

/// Everything needed to reproduce one evaluation: a full parameter set plus
/// an optional pinned binning-strategy index.
struct EvalSpec {
  ExperimentConfig config;
  std::optional<unsigned> binning;
};

/// Flat `key = value` text format, one key per line, `#` comments.
/// Angles in radians; `modes = poisson | <positive integer>`.  Finite
/// emission uses keys g / g_bar, the Poisson limit gamma / gamma_bar.
/// Values are written with 17 significant digits so that emitting and
/// re-reading a spec reproduces it exactly.
std::string format_param_file(const EvalSpec& spec);
EvalSpec parse_param_text(std::string_view text);

EvalSpec read_param_file(const std::string& path);
void write_param_file(const std::string& path, const EvalSpec& spec);

}  // namespace spdcbell
