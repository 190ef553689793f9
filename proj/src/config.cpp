#include <apfem/config.hpp>
#include <apfem/types.hpp>

#include <algorithm>
#include <fstream>
#include <istream>

namespace apfem {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

ConfigMap parse_config(std::istream& in, const std::string& source) {
  ConfigMap out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + "expected `key = value`");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw InvalidArgument(where + "empty key");
    if (key.find('-') != std::string::npos) throw InvalidArgument(where + "keys use underscores, not dashes: " + key);
    if (!out.emplace(key, value).second) throw InvalidArgument(where + "duplicate key " + key);
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file " + path.string());
  return parse_config(in, path.string());
}

std::vector<std::string> config_to_args(const ConfigMap& config) {
  std::vector<std::string> args;
  for (const auto& [key, value] : config) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    args.push_back("--" + flag + "=" + value);
  }
  return args;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    const auto end = text.find(sep, start);
    const std::string item = trim(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (!item.empty()) out.push_back(item);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace apfem
