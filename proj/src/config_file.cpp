#include "clbo/config_file.hpp"

#include "clbo/errors.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>

namespace clbo {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || end != value.data() + value.size() || value.empty())
        throw ConfigError(std::string(key), "expected a number, got '" + std::string(value) + "'");
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "yes" || value == "1" || value == "on") return true;
    if (value == "false" || value == "no" || value == "0" || value == "off") return false;
    throw ConfigError(std::string(key), "expected true or false, got '" + std::string(value) + "'");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"problem", [](auto& c, auto, auto v) { c.problem = std::string(v); }},
        {"optimizer", [](auto& c, auto, auto v) { c.optimizer = OptimizerSpec::parse(v); }},
        {"repeats", [](auto& c, auto k, auto v) { c.repeats = parse_number<int>(k, v); }},
        {"seed", [](auto& c, auto k, auto v) { c.base_seed = parse_number<std::uint64_t>(k, v); }},
        {"n_init", [](auto& c, auto k, auto v) { c.loop.n_init = parse_number<int>(k, v); }},
        {"budget", [](auto& c, auto k, auto v) { c.loop.n_budget = parse_number<int>(k, v); }},
        {"t_max", [](auto& c, auto k, auto v) { c.loop.t_max = parse_number<int>(k, v); }},
        {"epsilon", [](auto& c, auto k, auto v) { c.loop.epsilon = parse_number<double>(k, v); }},
        {"fit_starts", [](auto& c, auto k, auto v) { c.loop.fit.starts = parse_number<int>(k, v); }},
        {"refit_starts", [](auto& c, auto k, auto v) { c.loop.refit_starts = parse_number<int>(k, v); }},
        {"acquisition_starts", [](auto& c, auto k, auto v) { c.loop.acquisition.starts = parse_number<int>(k, v); }},
        {"ambiguity_points", [](auto& c, auto k, auto v) { c.loop.ambiguity_points = parse_number<int>(k, v); }},
        {"failure_rate", [](auto& c, auto k, auto v) { c.failure_rate = parse_number<double>(k, v); }},
        {"threads", [](auto& c, auto k, auto v) { c.threads = parse_number<int>(k, v); }},
        {"own_query_retention", [](auto& c, auto k, auto v) { c.loop.own_query_retention = parse_bool(k, v); }},
        {"bootstrap", [](auto& c, auto k, auto v) { c.loop.bootstrap = parse_bool(k, v); }},
        {"output", [](auto& c, auto, auto v) { c.output_dir = std::string(v); }},
        {"format",
         [](auto& c, auto k, auto v) {
             if (v == "csv") c.format = OutputFormat::Csv;
             else if (v == "json") c.format = OutputFormat::Json;
             else throw ConfigError(std::string(k), "expected csv or json, got '" + std::string(v) + "'");
         }},
    };
    return table;
}

}  // namespace

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(std::string(key), "unknown setting");
    it->second(config, key, value);
}

std::vector<std::string> setting_keys() {
    std::vector<std::string> keys;
    for (const auto& [key, setter] : setters()) keys.push_back(key);
    return keys;
}

std::vector<ExperimentConfig> parse_suite(std::string_view text) {
    ExperimentConfig defaults;
    std::vector<ExperimentConfig> sections;
    std::vector<std::set<std::string>> seen_keys;
    std::set<std::string> default_keys;
    std::set<std::string> names;

    int line_number = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_number;
        const auto where = "line " + std::to_string(line_number) + ": ";

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("section", where + "unterminated section header");
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (name.empty()) throw ConfigError("section", where + "empty section name");
            if (!names.insert(name).second) throw ConfigError("section", where + "duplicate section '" + name + "'");
            sections.push_back(defaults);
            sections.back().name = name;
            seen_keys.push_back(default_keys);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("syntax", where + "expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("syntax", where + "missing key");
        try {
            apply_setting(sections.empty() ? defaults : sections.back(), key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(e.field(), where + e.message());
        }
        (sections.empty() ? default_keys : seen_keys.back()).insert(std::string(key));
    }

    if (sections.empty()) throw ConfigError("section", "no experiment sections");
    for (std::size_t s = 0; s < sections.size(); ++s) {
        for (const char* required : {"problem", "optimizer"})
            if (!seen_keys[s].contains(required))
                throw ConfigError(required, "section [" + sections[s].name + "] does not set " + required);
        sections[s].validate();
    }
    return sections;
}

}  // namespace clbo
