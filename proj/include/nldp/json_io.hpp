#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nldp/core.hpp"
#include "nldp/error.hpp"
#include "nldp/ldp_client.hpp"
#include "nldp/selftrain.hpp"

namespace nldp {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// SHA-1, for content hashes of configs and artifacts
// ---------------------------------------------------------------------------

namespace sha1_detail {

inline std::uint32_t rotl(std::uint32_t v, int c) { return (v << c) | (v >> (32 - c)); }

}  // namespace sha1_detail

inline std::string sha1_hex(const std::string& data) {
  using sha1_detail::rotl;
  std::uint32_t h0 = 0x67452301, h1 = 0xEFCDAB89, h2 = 0x98BADCFE, h3 = 0x10325476,
                h4 = 0xC3D2E1F0;
  std::string msg = data;
  std::uint64_t bit_len = static_cast<std::uint64_t>(msg.size()) * 8;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bit_len >> (8 * i)) & 0xFF));

  for (std::size_t chunk = 0; chunk < msg.size(); chunk += 64) {
    std::uint32_t w[80];
    for (int i = 0; i < 16; ++i) {
      w[i] = (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i])) << 24) |
             (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i + 1])) << 16) |
             (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i + 2])) << 8) |
             static_cast<std::uint32_t>(static_cast<unsigned char>(msg[chunk + 4 * i + 3]));
    }
    for (int i = 16; i < 80; ++i) w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
    std::uint32_t a = h0, b = h1, c = h2, d = h3, e = h4;
    for (int i = 0; i < 80; ++i) {
      std::uint32_t f, k;
      if (i < 20) {
        f = (b & c) | ((~b) & d);
        k = 0x5A827999;
      } else if (i < 40) {
        f = b ^ c ^ d;
        k = 0x6ED9EBA1;
      } else if (i < 60) {
        f = (b & c) | (b & d) | (c & d);
        k = 0x8F1BBCDC;
      } else {
        f = b ^ c ^ d;
        k = 0xCA62C1D6;
      }
      std::uint32_t tmp = rotl(a, 5) + f + e + k + w[i];
      e = d;
      d = c;
      c = rotl(b, 30);
      b = a;
      a = tmp;
    }
    h0 += a;
    h1 += b;
    h2 += c;
    h3 += d;
    h4 += e;
  }
  char buf[41];
  std::snprintf(buf, sizeof(buf), "%08x%08x%08x%08x%08x", h0, h1, h2, h3, h4);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Hypothesis and trajectory serialization
// ---------------------------------------------------------------------------

inline Json hypothesis_to_json(const Hypothesis& h, Json meta = Json::object()) {
  return Json{{"w", h.w}, {"meta", std::move(meta)}};
}

inline Hypothesis hypothesis_from_json(const Json& j) {
  require(j.contains("w") && j.at("w").is_array(), ErrorKind::kInvalidInput,
          "hypothesis JSON must carry an array field 'w'");
  Hypothesis h;
  h.w = j.at("w").get<std::vector<double>>();
  return h;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::kInvalidInput, "cannot open '" + path + "' for writing");
  f << content;
  require(f.good(), ErrorKind::kInvalidInput, "short write to '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), ErrorKind::kInvalidInput, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// One iterate per line, so consumers can stream a long trajectory.
inline std::string trajectory_to_jsonl(const selftrain::Trajectory& traj) {
  std::string out;
  for (std::size_t t = 0; t < traj.iterates.size(); ++t) {
    out += Json{{"t", t}, {"w", traj.iterates[t].w}}.dump();
    out += '\n';
  }
  return out;
}

inline selftrain::Trajectory trajectory_from_jsonl(const std::string& text) {
  selftrain::Trajectory traj;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    Hypothesis h;
    h.w = j.at("w").get<std::vector<double>>();
    traj.iterates.push_back(std::move(h));
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Report streams (the client -> server boundary)
// ---------------------------------------------------------------------------

inline Json hinge_report_to_json(const client::HingeReport& r) {
  return Json{{"x0", r.x0},
              {"y0", r.y0},
              {"x_copies", r.x_copies},
              {"y_copies", r.y_copies},
              {"p", r.p},
              {"sigma_base", r.sigma_base},
              {"sigma_copy", r.sigma_copy}};
}

inline client::HingeReport hinge_report_from_json(const Json& j) {
  client::HingeReport r;
  r.x0 = j.at("x0").get<std::vector<double>>();
  r.y0 = j.at("y0").get<double>();
  r.x_copies = j.at("x_copies").get<std::vector<std::vector<double>>>();
  r.y_copies = j.at("y_copies").get<std::vector<double>>();
  r.p = j.at("p").get<std::size_t>();
  r.sigma_base = j.at("sigma_base").get<double>();
  r.sigma_copy = j.at("sigma_copy").get<double>();
  r.validate();
  return r;
}

inline Json logistic_report_to_json(const client::LogisticReport& r) {
  return Json{{"x0", r.x0},
              {"y0", r.y0},
              {"x_copies", r.x_copies},
              {"y_p", r.y_p},
              {"p", r.p},
              {"sigma_base", r.sigma_base},
              {"sigma_copy", r.sigma_copy},
              {"sigma_label", r.sigma_label}};
}

inline client::LogisticReport logistic_report_from_json(const Json& j) {
  client::LogisticReport r;
  r.x0 = j.at("x0").get<std::vector<double>>();
  r.y0 = j.at("y0").get<double>();
  r.x_copies = j.at("x_copies").get<std::vector<std::vector<double>>>();
  r.y_p = j.at("y_p").get<double>();
  r.p = j.at("p").get<std::size_t>();
  r.sigma_base = j.at("sigma_base").get<double>();
  r.sigma_copy = j.at("sigma_copy").get<double>();
  r.sigma_label = j.at("sigma_label").get<double>();
  r.validate();
  return r;
}

}  // namespace nldp
