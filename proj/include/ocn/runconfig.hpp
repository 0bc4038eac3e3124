#ifndef OCN_RUNCONFIG_HPP
#define OCN_RUNCONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ocn {

// Plain-text key=value run configuration. '#' starts a comment; unknown keys
// and malformed values are rejected with the key name and line number.
class RunConfig {
  public:
    static RunConfig parse_file(const std::string& path);
    static RunConfig parse_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    long get_int(const std::string& key, long def) const;
    double get_real(const std::string& key, double def) const;
    bool get_bool(const std::string& key, bool def) const;
    std::string get_string(const std::string& key, const std::string& def) const;
    std::vector<double> get_reals(const std::string& key,
                                  const std::vector<double>& def) const;
    std::vector<std::string> get_strings(const std::string& key,
                                         const std::vector<std::string>& def) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t def) const;

  private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string origin_;
    std::map<std::string, Entry> entries_;

    const Entry* find(const std::string& key) const;
    [[noreturn]] void fail(const std::string& key, int line,
                           const std::string& why) const;
};

}  // namespace ocn

#endif  // OCN_RUNCONFIG_HPP
