#ifndef CORROSCALE_CSVIO_HPP
#define CORROSCALE_CSVIO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "corroscale/cell_problem.hpp"
#include "corroscale/macro.hpp"
#include "corroscale/micro.hpp"

namespace corroscale {

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

struct ManifestEntry {
  std::string name;
  std::size_t size = 0;
  std::string digest;
};

struct ResultBundle {
  std::string config_digest;
  std::string version;
  double wall_seconds = 0;
  std::vector<ManifestEntry> files;
};

/// Writes bytes as-is (binary stream, LF endings are the caller's contract)
/// and records the file in the bundle.
inline void emit_file(ResultBundle& bundle, const std::filesystem::path& dir,
                      const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(content.data(), (std::streamsize)content.size());
  out.flush();
  if (!out) fail(ErrorCode::IoError, "short write to " + path.string());
  bundle.files.push_back({name, content.size(), hex64(fnv1a64(content))});
}

inline std::string effective_csv(const std::array<EffectiveTensor, 4>& d,
                                 const EffectiveRates& rates) {
  std::string s = "species,i,j,value\n";
  for (int sp = 0; sp < 4; ++sp) {
    const Mat2& m = d[sp].d;
    const double entries[2][2] = {{m.a11, m.a12}, {m.a21, m.a22}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        s += std::to_string(sp + 1) + "," + std::to_string(i + 1) + "," + std::to_string(j + 1) +
             "," + format_g17(entries[i][j]) + "\n";
  }
  s += "k1,0,0," + format_g17(rates.k1) + "\n";
  s += "k2,0,0," + format_g17(rates.k2) + "\n";
  s += "a,0,0," + format_g17(rates.a) + "\n";
  s += "b,0,0," + format_g17(rates.b) + "\n";
  return s;
}

inline std::string series_csv(const std::vector<DiagnosticsRecord>& series) {
  std::string s = "t";
  for (int sp = 1; sp <= 5; ++sp) {
    const std::string b = "u" + std::to_string(sp);
    s += "," + b + "_min," + b + "_mean," + b + "_max";
  }
  s += ",S_total,total_gypsum\n";
  for (const auto& r : series) {
    s += format_g17(r.t);
    for (int sp = 0; sp < 5; ++sp)
      s += "," + format_g17(r.min[sp]) + "," + format_g17(r.mean[sp]) + "," + format_g17(r.max[sp]);
    s += "," + format_g17(r.s_total) + "," + format_g17(r.gypsum_total) + "\n";
  }
  return s;
}

inline std::string fields_csv(const MacroState& state, const MacroGrid& grid,
                              const EffectiveModel& model) {
  std::string s = "i,j,u1,u2,u3,u4,u5_mean\n";
  const double w_total = model.sw_weight_total();
  for (int j = 0; j < grid.n; ++j)
    for (int i = 0; i < grid.n; ++i) {
      const int c = grid.id(i, j);
      s += std::to_string(i) + "," + std::to_string(j);
      for (int sp = 0; sp < 4; ++sp) s += "," + format_g17(state.u[sp][c]);
      double g5 = 0;
      for (int q = 0; q < state.nq; ++q) g5 += model.sw.w[q] * state.u5_at(c, q);
      s += "," + format_g17(w_total > 0 ? g5 / w_total : 0.0) + "\n";
    }
  return s;
}

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string s = "eps,species,error\n";
  for (const auto& r : rows)
    s += format_g17(r.eps) + "," + std::to_string(r.species) + "," + format_g17(r.error) + "\n";
  return s;
}

/// Stable tag for snapshot file names: time formatted with '.' replaced so
/// names stay portable.
inline std::string time_tag(double t) {
  std::string s = format_g17(t);
  for (char& c : s)
    if (c == '.' || c == '+' || c == '-') c = c == '.' ? 'p' : (c == '+' ? 'a' : 'm');
  return s;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string manifest_json(const ResultBundle& b) {
  std::string s = "{\n";
  s += "  \"version\": \"" + json_escape(b.version) + "\",\n";
  s += "  \"config_digest\": \"" + json_escape(b.config_digest) + "\",\n";
  s += "  \"wall_seconds\": " + format_g17(b.wall_seconds) + ",\n";
  s += "  \"files\": [\n";
  for (std::size_t i = 0; i < b.files.size(); ++i) {
    const auto& f = b.files[i];
    s += "    {\"name\": \"" + json_escape(f.name) + "\", \"size\": " + std::to_string(f.size) +
         ", \"digest\": \"" + f.digest + "\"}";
    s += i + 1 < b.files.size() ? ",\n" : "\n";
  }
  s += "  ]\n}\n";
  return s;
}

}  // namespace corroscale

#endif
