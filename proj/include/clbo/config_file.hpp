#pragma once

#include "clbo/harness.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace clbo {

/// Parses an experiment suite.
///
///     # comment
///     repeats = 5            <- keys before the first section are defaults
///     [branin-ego]
///     problem = branin2
///     optimizer = ego
///
/// Every section becomes one ExperimentConfig named after it. Unknown keys,
/// malformed values and sections without a problem or optimizer raise
/// ConfigError whose field() is the offending key.
std::vector<ExperimentConfig> parse_suite(std::string_view text);

/// Applies one `key = value` setting; shared by the suite parser and the CLI.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Keys understood by apply_setting().
std::vector<std::string> setting_keys();

}  // namespace clbo
