#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "btgen/cli.hpp"

namespace btgen::testing {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliRun run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "btgen");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace btgen::testing
