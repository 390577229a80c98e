#include "mgap/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mgap/errors.hpp"

namespace mgap {

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::not_found, "cannot open " + path);

  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
    if (!in.good()) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

namespace {

// Worker-pool flags are execution details, not replay inputs; embedded
// manifests drop them so report bytes match across --threads settings.
std::vector<std::string> without_thread_flags(const std::vector<std::string>& argv) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (argv[i] == "--threads") {
      ++i;
      continue;
    }
    if (argv[i].rfind("--threads=", 0) == 0) continue;
    out.push_back(argv[i]);
  }
  return out;
}

}  // namespace

std::string RunManifest::to_json(bool embedded) const {
  nlohmann::ordered_json j;
  j["artifact_version"] = artifact_version;
  j["subcommand"] = subcommand;
  j["argv"] = embedded ? without_thread_flags(argv) : argv;
  j["seed"] = seed;
  j["outputs"] = outputs;
  if (!embedded) {
    j["threads"] = threads;
    j["duration_seconds"] = duration_seconds;
    j["checksums"] = checksums;
  }
  return j.dump(2);
}

RunManifest RunManifest::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, std::string("manifest parse: ") + e.what());
  }
  RunManifest m;
  try {
    m.artifact_version = j.value("artifact_version", std::string());
    m.subcommand = j.at("subcommand").get<std::string>();
    m.argv = j.value("argv", std::vector<std::string>());
    m.seed = j.value("seed", std::uint64_t{0});
    m.outputs = j.value("outputs", std::vector<std::string>());
    m.threads = j.value("threads", 0);
    m.duration_seconds = j.value("duration_seconds", 0.0);
    if (j.contains("checksums"))
      m.checksums = j["checksums"].get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, std::string("manifest fields: ") + e.what());
  }
  return m;
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::not_found, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

void RunManifest::fill_checksums() {
  checksums.clear();
  for (const std::string& p : outputs) checksums[p] = file_checksum(p);
}

void RunManifest::save(const std::string& path) const {
  std::ofstream out(path);
  require(out.good(), Errc::io_error, "cannot write " + path);
  out << to_json(false) << "\n";
  require(out.good(), Errc::io_error, "write failed: " + path);
}

std::string RunManifest::sidecar_path(const std::string& first_output) {
  std::filesystem::path p(first_output);
  p.replace_extension();
  return p.string() + ".manifest.json";
}

}  // namespace mgap
