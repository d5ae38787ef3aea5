#pragma once

// json persistence for code instances. partitions for all k nodes are stored
// so the loader rebuilds the exact same index arrays even after partition
// rewrites, and a checksum over the canonical payload catches edits.

#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "htec/codec.hpp"
#include "htec/construction.hpp"

namespace htec {

struct integrity_error : codec_error {
  using codec_error::codec_error;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const unsigned char* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

namespace detail {

inline nlohmann::json code_payload(const code_instance& ci) {
  nlohmann::json j;
  j["params"] = {{"n", ci.params.n}, {"k", ci.params.k}, {"r", ci.params.r},
                 {"alpha", ci.params.alpha}};
  j["field"] = {{"w", ci.fld.w()}, {"poly", ci.fld.poly()}};
  j["seed"] = ci.seed;
  j["attempt"] = ci.attempt;
  nlohmann::json parts = nlohmann::json::array();
  for (const valid_partition& vp : ci.arrays.partitions) {
    parts.push_back({{"node", vp.node}, {"subsets", vp.subsets}, {"chosen", vp.chosen}});
  }
  j["partitions"] = parts;
  j["coefficients"] = ci.coeffs;
  return j;
}

}  // end of namespace detail

inline nlohmann::json code_to_json(const code_instance& ci) {
  nlohmann::json j = detail::code_payload(ci);
  j["format"] = "htec-code";
  j["version"] = 1;
  j["verified"] = ci.verified;
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(fnv1a64(detail::code_payload(ci).dump())));
  j["checksum"] = std::string(buf);
  return j;
}

inline code_instance code_from_json(const nlohmann::json& j, bool reverify = true,
                                    bool allow_large = false) {
  if (!j.is_object() || j.value("format", std::string()) != "htec-code") {
    throw integrity_error("not an htec code file");
  }
  if (j.value("version", 0) != 1) {
    throw integrity_error("unsupported code file version");
  }
  code_params p;
  p.n = j.at("params").at("n").get<int>();
  p.k = j.at("params").at("k").get<int>();
  p.r = j.at("params").at("r").get<int>();
  p.alpha = j.at("params").at("alpha").get<int>();
  p.field.w = j.at("field").at("w").get<int>();
  p.field.poly = j.at("field").at("poly").get<std::uint32_t>();
  validate_params(p);
  std::vector<partition_override> overrides;
  for (const auto& part : j.at("partitions")) {
    partition_override ov;
    ov.node = part.at("node").get<int>();
    ov.subsets = part.at("subsets").get<std::vector<std::vector<int>>>();
    ov.chosen = part.at("chosen").get<std::vector<int>>();
    overrides.push_back(std::move(ov));
  }
  code_instance ci(p, build_index_arrays(p, overrides), make_field(p.field));
  ci.seed = j.value("seed", std::uint64_t{0});
  ci.attempt = j.value("attempt", -1);
  const auto& co = j.at("coefficients");
  if (static_cast<int>(co.size()) != p.r) throw integrity_error("coefficient shape mismatch");
  for (int l = 1; l <= p.r; ++l) {
    const auto& per_row = co[static_cast<std::size_t>(l - 1)];
    if (static_cast<int>(per_row.size()) != p.alpha) {
      throw integrity_error("coefficient shape mismatch");
    }
    for (int i = 1; i <= p.alpha; ++i) {
      const auto& slots = per_row[static_cast<std::size_t>(i - 1)];
      if (static_cast<int>(slots.size()) != p.k + ci.arrays.g) {
        throw integrity_error("coefficient shape mismatch");
      }
      for (int slot = 0; slot < p.k + ci.arrays.g; ++slot) {
        const gf_t v = slots[static_cast<std::size_t>(slot)].get<gf_t>();
        if (ci.slot_active(l, i, slot) ? v == 0 : v != 0) {
          throw integrity_error("coefficients do not match the index arrays");
        }
        ci.coeffs[static_cast<std::size_t>(l - 1)][static_cast<std::size_t>(i - 1)]
                 [static_cast<std::size_t>(slot)] = v;
      }
    }
  }
  const std::string want = j.value("checksum", std::string());
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx",
                static_cast<unsigned long long>(fnv1a64(detail::code_payload(ci).dump())));
  if (want != buf) throw integrity_error("code file checksum mismatch");
  if (reverify) {
    if (!verify_mds(ci, allow_large)) {
      throw integrity_error("stored coefficients fail mds verification");
    }
    ci.verified = true;
  } else {
    ci.verified = j.value("verified", false);
  }
  return ci;
}

}  // end of namespace htec
