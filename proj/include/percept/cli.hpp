#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace percept {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

struct MethodInfo {
  std::string_view name;         // value of --method
  std::string_view algorithm;    // algorithm it realizes
  std::string_view subcommands;  // space-separated
};

// Every method the CLI accepts.
std::span<const MethodInfo> method_registry();

// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace percept
