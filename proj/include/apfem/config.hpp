#pragma once

// Flat `key = value` configuration files. Keys are CLI flag names with
// dashes written as underscores; `#` starts a comment.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace apfem {

using ConfigMap = std::map<std::string, std::string>;

/// Throws InvalidArgument naming the line for malformed or duplicate entries.
ConfigMap parse_config(std::istream& in, const std::string& source = "<config>");
ConfigMap load_config(const std::filesystem::path& path);

/// `--key-name=value` arguments for every entry, suitable for a CLI parser.
std::vector<std::string> config_to_args(const ConfigMap& config);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

}  // namespace apfem
