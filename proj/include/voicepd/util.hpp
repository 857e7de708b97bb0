// voicepd/util.hpp

// Copyright 2026  voicepd authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VOICEPD_UTIL_HPP_
#define VOICEPD_UTIL_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "voicepd/error.hpp"

namespace voicepd {

static_assert(std::endian::native == std::endian::little,
              "binary file I/O assumes a little-endian host");

inline constexpr const char* kToolVersion = "0.1.0";

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// "# voicepd <version> seed=<seed> config=<hash>" header embedded in every
// output file. Deterministic: no timestamps.
inline std::string provenance_line(uint64_t seed, uint64_t config_hash) {
  std::ostringstream os;
  os << "# voicepd " << kToolVersion << " seed=" << seed << " config="
     << std::hex << config_hash;
  return os.str();
}

// ---- minimal CSV ----
// Fields are quoted only when they contain a comma, quote or newline.

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

// Reads all non-empty lines; lines starting with '#' are skipped.
inline std::vector<std::string> read_csv_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

// ---- little-endian binary I/O ----

inline void write_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void write_u32(std::ostream& os, uint32_t v) { write_bytes(os, &v, 4); }
inline void write_u8(std::ostream& os, uint8_t v) { write_bytes(os, &v, 1); }

inline void write_f64s(std::ostream& os, const double* p, size_t n) {
  write_bytes(os, p, n * sizeof(double));
}

inline void read_bytes(std::istream& is, void* p, size_t n,
                       const char* what) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(is.gcount()) != n) {
    throw ValidationError(std::string("truncated file while reading ") + what);
  }
}

inline uint32_t read_u32(std::istream& is, const char* what) {
  uint32_t v;
  read_bytes(is, &v, 4, what);
  return v;
}

inline uint8_t read_u8(std::istream& is, const char* what) {
  uint8_t v;
  read_bytes(is, &v, 1, what);
  return v;
}

inline void read_f64s(std::istream& is, double* p, size_t n,
                      const char* what) {
  read_bytes(is, p, n * sizeof(double), what);
}

}  // namespace voicepd

#endif  // VOICEPD_UTIL_HPP_
