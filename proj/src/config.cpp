#include "flowctl/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "flowctl/errors.hpp"

namespace flowctl {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

void Config::set(const std::string& key, const std::string& value) {
    entries_[key] = {value, "<programmatic>"};
}

void Config::load_string(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw config_error(origin + ":" + std::to_string(lineno) +
                                   ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw config_error(origin + ":" + std::to_string(lineno) + ": empty section name");
            }
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": expected 'key = value', got \"" + line + "\"");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        entries_[full] = {value, origin + ":" + std::to_string(lineno)};
    }
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    load_string(ss.str(), path);
}

const Config::Entry* Config::find(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string Config::get_string(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw config_error("missing config key: " + key);
    return e->value;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

double Config::get_double(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw config_error("missing config key: " + key);
    char* end = nullptr;
    const double v = std::strtod(e->value.c_str(), &end);
    if (end == e->value.c_str() || *end != '\0') {
        throw config_error("config key " + key + " (" + e->origin + "): not a number: \"" +
                           e->value + "\"");
    }
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
    const double v = get_double(key);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
        throw config_error("config key " + key + ": expected an integer");
    }
    return i;
}

int Config::get_int(const std::string& key, int fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error("config key " + key + ": expected a boolean, got \"" + v + "\"");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::vector<double> Config::get_list(const std::string& key) const {
    const std::string raw = get_string(key);
    std::vector<double> out;
    std::string token;
    // accept comma or whitespace separated values
    std::string normalized = raw;
    for (char& c : normalized)
        if (c == ',') c = ' ';
    std::istringstream nin(normalized);
    while (nin >> token) {
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (end == token.c_str() || *end != '\0') {
            throw config_error("config key " + key + ": bad list element \"" + token + "\"");
        }
        out.push_back(v);
    }
    if (out.empty()) throw config_error("config key " + key + ": empty list");
    return out;
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& fallback) const {
    return has(key) ? get_list(key) : fallback;
}

void Config::check_consumed() const {
    std::string complaints;
    for (const auto& [key, entry] : entries_) {
        if (entry.origin != "<programmatic>" && consumed_.count(key) == 0) {
            complaints += "\n  " + key + " (" + entry.origin + ")";
        }
    }
    if (!complaints.empty()) {
        throw config_error("unknown config keys:" + complaints);
    }
}

std::string Config::dump() const {
    std::ostringstream out;
    for (const auto& [key, entry] : entries_) {
        out << key << " = " << entry.value << "\n";
    }
    return out.str();
}

Config make_preset(const std::string& name) {
    if (name == "taylor_green_paper") {
        Config c;
        c.set("field.type", "taylor_green");
        c.set("field.U", "1");
        c.set("field.L", "1");
        c.set("field.domain", "0 2 0 1");
        c.set("saddle.guess", "0.9 0.1");
        c.set("manifold.kind", "stable");
        c.set("manifold.endpoint", "-1");
        c.set("manifold.time_anchor", "-1");
        c.set("manifold.anchor_arclength", "0.5");
        c.set("manifold.branch", "1");
        c.set("desired.eps", "0.1");
        c.set("desired.form", "taylor_green");
        c.set("control.analytic", "true");
        c.set("grids.np", "61");
        c.set("grids.nt", "21");
        c.set("grids.t_lo", "-1");
        c.set("grids.t_hi", "0");
        c.set("ftle.nx", "512");
        c.set("ftle.ny", "256");
        c.set("ftle.times", "-0.9");
        c.set("ftle.tau", "1");
        c.set("ftle.band", "0.7 1.3");
        return c;
    }
    throw config_error("unknown preset: " + name);
}

} // namespace flowctl
