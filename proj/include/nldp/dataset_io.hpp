#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "nldp/core.hpp"
#include "nldp/error.hpp"

namespace nldp {

// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(),
          ErrorKind::kInvalidInput, "bad float literal '" + std::string(s) + "'");
  return v;
}

// Line-oriented dataset format:
//   NLDP-DS v1 d=<int> R=<float> kind=<tag> n=<int>
//   x_1 ... x_d y
// Floats use shortest round-trip printing, so write(read(f)) == f byte for
// byte.
inline std::string write_dataset_string(const Dataset& data) {
  std::string out;
  out.reserve(data.size() * (data.dimension * 10 + 4) + 64);
  out += "NLDP-DS v1 d=" + std::to_string(data.dimension) +
         " R=" + format_double(data.radius) + " kind=" + to_string(data.kind) +
         " n=" + std::to_string(data.size()) + "\n";
  for (const Example& e : data.examples) {
    for (double c : e.x) {
      out += format_double(c);
      out += ' ';
    }
    out += std::to_string(e.y);
    out += '\n';
  }
  return out;
}

inline void write_dataset_file(const Dataset& data, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::kInvalidInput, "cannot open '" + path + "' for writing");
  f << write_dataset_string(data);
  require(f.good(), ErrorKind::kInvalidInput, "short write to '" + path + "'");
}

namespace detail {

inline std::string_view expect_field(std::string_view tok, std::string_view key) {
  require(tok.substr(0, key.size()) == key, ErrorKind::kInvalidInput,
          "dataset header: expected '" + std::string(key) + "...', got '" +
              std::string(tok) + "'");
  return tok.substr(key.size());
}

}  // namespace detail

inline Dataset read_dataset_string(const std::string& text) {
  std::istringstream in(text);
  std::string magic, version, tok;
  in >> magic >> version;
  require(magic == "NLDP-DS" && version == "v1", ErrorKind::kInvalidInput,
          "not an NLDP-DS v1 file");
  Dataset data;
  in >> tok;
  data.dimension = static_cast<std::size_t>(std::stoull(std::string(detail::expect_field(tok, "d="))));
  in >> tok;
  data.radius = parse_double(detail::expect_field(tok, "R="));
  in >> tok;
  data.kind = dataset_kind_from_string(std::string(detail::expect_field(tok, "kind=")));
  in >> tok;
  std::size_t n = std::stoull(std::string(detail::expect_field(tok, "n=")));

  data.examples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Example& e = data.examples[i];
    e.x.resize(data.dimension);
    for (std::size_t j = 0; j < data.dimension; ++j) {
      require(static_cast<bool>(in >> tok), ErrorKind::kInvalidInput,
              "dataset truncated at example " + std::to_string(i));
      e.x[j] = parse_double(tok);
    }
    require(static_cast<bool>(in >> e.y), ErrorKind::kInvalidInput,
            "dataset truncated at label " + std::to_string(i));
    require(e.y == -1 || e.y == 0 || e.y == 1, ErrorKind::kInvalidInput,
            "label must be -1, 0 or 1");
  }
  data.validate();
  return data;
}

inline Dataset read_dataset_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::kInvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return read_dataset_string(ss.str());
}

}  // namespace nldp
