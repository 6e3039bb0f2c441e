#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "grazing/error.hpp"
#include "grazing/experiments.hpp"
#include "grazing/trajectory.hpp"
#include "grazing/verifiers.hpp"

namespace grazing::io {

using nlohmann::ordered_json;

/// Round-trip decimal form of a double; non-finite values print as nan, inf, -inf.
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON number, or null for NaN and infinities.
inline ordered_json jnum(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

/// Collects artifacts in memory and writes them under one directory, each path once.
class ArtifactSet {
 public:
  void add(const std::string& name, std::string content) {
    if (files_.count(name)) throw Error("artifact '" + name + "' written twice");
    files_[name] = std::move(content);
  }
  const std::map<std::string, std::string>& files() const { return files_; }

  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files_) {
      std::ofstream f(dir / name, std::ios::binary);
      if (!f) throw Error("cannot write '" + (dir / name).string() + "'");
      f << content;
    }
  }

 private:
  std::map<std::string, std::string> files_;
};

/// SHA-1 of "blob <size>\0" + content, as git computes object ids.
inline std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// Config echo, seed and per-file hashes; the combined hash covers every output byte.
inline std::string manifest(const std::string& subcommand, const std::string& config_text, std::uint64_t seed,
                            const ArtifactSet& outputs) {
  ordered_json m;
  m["subcommand"] = subcommand;
  m["seed"] = seed;
  m["config"] = config_text;
  ordered_json files = ordered_json::object();
  std::string listing;
  for (const auto& [name, content] : outputs.files()) {
    const std::string h = git_blob_hash(content);
    files[name] = {{"bytes", content.size()}, {"hash", h}};
    listing += h + " " + name + "\n";
  }
  m["files"] = files;
  m["content_hash"] = git_blob_hash(listing);
  return m.dump(2) + "\n";
}

inline std::string snapshots_csv(const Trajectory& tr) {
  std::string out = "t,particle,vx,vy,vz\n";
  for (const Snapshot& s : tr)
    for (std::size_t i = 0; i < s.v.size(); ++i)
      out += num(s.t) + "," + std::to_string(i) + "," + num(s.v[i].x) + "," + num(s.v[i].y) + "," + num(s.v[i].z) + "\n";
  return out;
}

inline std::string diagnostics_json(const Trajectory& tr) {
  ordered_json arr = ordered_json::array();
  for (const Snapshot& s : tr)
    arr.push_back({{"t", s.diag.t},
                   {"m2", jnum(s.diag.m2)},
                   {"m4", jnum(s.diag.m4)},
                   {"entropy", jnum(s.diag.entropy)},
                   {"max_speed", jnum(s.diag.max_speed)},
                   {"events", s.diag.events}});
  return arr.dump(2) + "\n";
}

inline std::string coupled_csv(const CoupledResult& r) {
  std::string out = "t,paired_l2,w2,m2_boltz,m2_landau\n";
  for (std::size_t k = 0; k < r.t.size(); ++k)
    out += num(r.t[k]) + "," + num(r.paired_l2[k]) + "," + num(r.w2[k]) + "," + num(r.m2_boltz[k]) + "," +
           num(r.m2_landau[k]) + "\n";
  return out;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "eps,seed,t,paired_l2,w2,m2_boltz,m2_landau\n";
  for (const SweepRow& r : rows)
    out += num(r.eps) + "," + std::to_string(r.seed) + "," + num(r.t) + "," + num(r.paired_l2) + "," + num(r.w2) + "," +
           num(r.m2_boltz) + "," + num(r.m2_landau) + "\n";
  return out;
}

/// Parses a sweep CSV back into rows; the header must match exactly.
inline std::vector<SweepRow> read_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "eps,seed,t,paired_l2,w2,m2_boltz,m2_landau")
    throw ParameterError("sweep CSV header must be eps,seed,t,paired_l2,w2,m2_boltz,m2_landau");
  std::vector<SweepRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw ParameterError("sweep CSV line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      rows.push_back({std::stod(f[0]), std::stoull(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                      std::stod(f[5]), std::stod(f[6])});
    } catch (const std::exception&) {
      throw ParameterError("sweep CSV line " + std::to_string(lineno) + ": malformed number");
    }
  }
  if (rows.empty()) throw ParameterError("sweep CSV has no rows");
  return rows;
}

inline ordered_json fit_json(const RateFit& f) {
  return {{"slope", jnum(f.slope)},
          {"slope_stderr", jnum(f.slope_stderr)},
          {"intercept", jnum(f.intercept)},
          {"abscissa", f.abscissa},
          {"verdict", to_string(f.verdict)},
          {"reason", f.reason}};
}

inline std::string sweep_summary_json(const SweepReport& r) {
  ordered_json j;
  j["family"] = to_string(r.family);
  j["eps"] = r.eps_list;
  j["mean_terminal"] = r.mean_terminal;
  j["stderr_terminal"] = r.stderr_terminal;
  j["mean_sup"] = r.mean_sup;
  j["m2_drift_boltz"] = r.m2_drift_boltz;
  j["m2_drift_landau"] = r.m2_drift_landau;
  j["fit"] = fit_json(r.fit);
  j["slope"] = jnum(r.fit.slope);
  j["stderr"] = jnum(r.fit.slope_stderr);
  j["verdict"] = to_string(r.fit.verdict);
  if (r.family != Family::kCoulomb) j["proven_exponent"] = r.proven_exponent;
  j["conjectured_exponent"] = r.conjectured_exponent;
  return j.dump(2) + "\n";
}

inline std::string checks_csv(const CheckTable& t) {
  std::string out = "check,case,value,bound,pass\n";
  for (const Check& c : t.rows)
    out += c.name + "," + c.label + "," + num(c.value) + "," + num(c.bound) + "," + (c.pass ? "PASS" : "FAIL") + "\n";
  return out;
}

}  // namespace grazing::io
