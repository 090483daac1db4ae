#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

namespace genesis::cli {

inline std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot digest missing file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[32];
  std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

// Everything needed to reproduce a run: the resolved configuration and
// seeds, digests of the inputs, and the produced files. Timestamps and
// timings live only here, keeping the primary outputs byte-reproducible.
struct RunManifest {
  std::string command;
  std::string tool_version;
  int jobs = 1;
  nlohmann::json flags = nlohmann::json::object();
  std::map<std::string, std::string> input_digests;
  std::vector<std::string> outputs;
  std::map<std::string, double> timings_seconds;

  void add_input(const std::string& path) {
    input_digests[path] = fnv1a64_file(path);
  }

  void write(const std::string& path) const {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ",
                  std::gmtime(&tt));
    nlohmann::json j = {{"command", command},
                        {"tool_version", tool_version},
                        {"created_utc", stamp},
                        {"jobs", jobs},
                        {"flags", flags},
                        {"inputs", input_digests},
                        {"outputs", outputs},
                        {"timings_seconds", timings_seconds}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
  }
};

}  // namespace genesis::cli
