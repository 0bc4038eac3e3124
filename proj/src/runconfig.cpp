#include "ocn/runconfig.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ocn/errors.hpp"

namespace ocn {

namespace {

// Every key any subcommand understands; anything else is a typo.
const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        // channel
        "n", "paths", "fnd", "oscillators", "path_powers",
        // training
        "layers", "lr", "batch", "iterations", "snr_low", "snr_high",
        "condition_threshold", "loss", "init", "seed", "loss_every", "workers",
        // sliding geometry
        "output_len", "guard_len", "sub_location",
        // evaluation
        "snr_points", "min_symbols", "min_errors", "detectors",
        "identity_channel", "noiseless",
        // guard formula
        "alpha", "beta",
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_text(ss.str(), path);
}

RunConfig RunConfig::parse_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    cfg.origin_ = origin;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (known_keys().count(key) == 0)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
        if (cfg.entries_.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": duplicate key '" + key + "'");
        cfg.entries_[key] = {value, lineno};
    }
    return cfg;
}

const RunConfig::Entry* RunConfig::find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

void RunConfig::fail(const std::string& key, int line, const std::string& why) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": key '" + key +
                      "': " + why);
}

bool RunConfig::has(const std::string& key) const { return find(key) != nullptr; }

long RunConfig::get_int(const std::string& key, long def) const {
    const Entry* e = find(key);
    if (!e) return def;
    try {
        std::size_t pos = 0;
        const long v = std::stol(e->value, &pos);
        if (pos != e->value.size()) fail(key, e->line, "not an integer");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(key, e->line, "not an integer");
    }
}

double RunConfig::get_real(const std::string& key, double def) const {
    const Entry* e = find(key);
    if (!e) return def;
    try {
        std::size_t pos = 0;
        const double v = std::stod(e->value, &pos);
        if (pos != e->value.size()) fail(key, e->line, "not a number");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(key, e->line, "not a number");
    }
}

bool RunConfig::get_bool(const std::string& key, bool def) const {
    const Entry* e = find(key);
    if (!e) return def;
    if (e->value == "1" || e->value == "true") return true;
    if (e->value == "0" || e->value == "false") return false;
    fail(key, e->line, "expected 0/1/true/false");
}

std::string RunConfig::get_string(const std::string& key, const std::string& def) const {
    const Entry* e = find(key);
    return e ? e->value : def;
}

std::vector<double> RunConfig::get_reals(const std::string& key,
                                         const std::vector<double>& def) const {
    const Entry* e = find(key);
    if (!e) return def;
    std::vector<double> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) fail(key, e->line, "bad list entry '" + item + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (...) {
            fail(key, e->line, "bad list entry '" + item + "'");
        }
    }
    if (out.empty()) fail(key, e->line, "empty list");
    return out;
}

std::vector<std::string> RunConfig::get_strings(
    const std::string& key, const std::vector<std::string>& def) const {
    const Entry* e = find(key);
    if (!e) return def;
    std::vector<std::string> out;
    std::stringstream ss(e->value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) fail(key, e->line, "empty list");
    return out;
}

std::uint64_t RunConfig::get_seed(const std::string& key, std::uint64_t def) const {
    const Entry* e = find(key);
    if (!e) return def;
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(e->value, &pos);
        if (pos != e->value.size()) fail(key, e->line, "not an unsigned integer");
        return static_cast<std::uint64_t>(v);
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        fail(key, e->line, "not an unsigned integer");
    }
}

}  // namespace ocn
