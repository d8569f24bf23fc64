#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dsuc::cli {

enum ExitCode { ok = 0, failed = 1, usage = 2 };

// args excludes the program name. Reports go to --out; a short summary goes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "1/64,0.01,1/128" -> {0.015625, 0.01, 0.0078125}. Throws std::invalid_argument.
std::vector<double> parse_number_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

} // namespace dsuc::cli
