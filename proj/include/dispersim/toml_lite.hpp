#ifndef DISPERSIM_TOML_LITE_HPP
#define DISPERSIM_TOML_LITE_HPP

#include <map>
#include <string>
#include <vector>

namespace dispersim {

// Flat TOML subset: [section] headers, key = value with string, number,
// boolean, or homogeneous scalar array values, and # comments. Enough
// for study configs; anything fancier is rejected loudly.
class TomlLite {
 public:
  static TomlLite parse_file(const std::string& path);
  static TomlLite parse(const std::string& text, const std::string& origin);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_number(const std::string& section, const std::string& key) const;
  double get_number(const std::string& section, const std::string& key,
                    double fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<std::string> get_string_array(const std::string& section,
                                            const std::string& key) const;
  std::vector<double> get_number_array(const std::string& section,
                                       const std::string& key) const;

 private:
  struct Value {
    std::string raw;
    bool is_string = false;
    std::vector<std::string> array;
    bool is_array = false;
  };
  const Value* lookup(const std::string& section, const std::string& key) const;
  const Value& require(const std::string& section, const std::string& key) const;
  std::map<std::string, std::map<std::string, Value>> sections_;
  std::string origin_;
};

}  // namespace dispersim

#endif
