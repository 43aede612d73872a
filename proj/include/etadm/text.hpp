#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace etadm {

std::string ascii_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Whole-file IO; failures raise Error(ErrorCode::Io).
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace etadm
