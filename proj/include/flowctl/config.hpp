#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace flowctl {

// Layered key/value configuration. Keys are dotted ("section.key"); files use
// INI-style sections with '#'/';' comments. Presets and CLI overrides land in
// the same store; every key read is marked consumed so leftovers from a user
// file can be rejected with their line number.
class Config {
public:
    void set(const std::string& key, const std::string& value); // programmatic (preset/CLI)
    void load_file(const std::string& path);                    // overlay a user file
    void load_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    // throws config_error naming any user-file key never consumed by the run
    void check_consumed() const;

    // echo of the effective configuration, sorted by key
    std::string dump() const;

private:
    struct Entry {
        std::string value;
        std::string origin; // "<preset>", "<cli>", or "file:line"
    };
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> consumed_;

    const Entry* find(const std::string& key) const;
};

// named presets ("taylor_green_paper"); throws config_error for unknown names
Config make_preset(const std::string& name);

} // namespace flowctl
